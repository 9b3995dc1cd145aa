"""Backend dispatch for the hot kernels.

Two interchangeable implementations exist: ``numpy_backend`` (pure
vectorized numpy, the reference) and ``numba_backend`` (jitted loops).
The environment variable ``ORLICZ_FLOW_BACKEND`` selects one:

* ``auto`` (default): numba when importable, else numpy
* ``numba``: require numba, raise if missing
* ``numpy``: force the pure-numpy path

``ORLICZ_FLOW_THREADS`` caps the numba thread pool used by the parallel
kernels.  Both variables are read once at import time.
"""

from __future__ import annotations

import os

from .numpy_backend import (  # noqa: F401  (stats layout is backend independent)
    STAT_DISSIPATION,
    STAT_F,
    STAT_LEN,
    STAT_MAX_GRAD,
    STAT_MAX_H,
    STAT_MAX_K,
    STAT_MAX_R,
    STAT_MAX_RADIUS,
    STAT_MAX_RESID,
    STAT_MAX_SPEED,
    STAT_MIN_H,
    STAT_MIN_K,
    STAT_MIN_R,
    STAT_MIN_RADIUS,
)

_requested = os.environ.get("ORLICZ_FLOW_BACKEND", "auto").strip().lower()
if _requested not in ("auto", "numba", "numpy"):
    raise ValueError(
        f"ORLICZ_FLOW_BACKEND must be one of auto/numba/numpy, got {_requested!r}"
    )

if _requested == "numpy":
    from . import numpy_backend as _impl
else:
    # the bundled TBB is too old for numba; omp avoids a warning on import
    os.environ.setdefault("NUMBA_THREADING_LAYER", "omp")
    try:
        from . import numba_backend as _impl
    except ImportError:
        if _requested == "numba":
            raise
        from . import numpy_backend as _impl

BACKEND = _impl.NAME

_threads = os.environ.get("ORLICZ_FLOW_THREADS")
if _threads is not None and _threads.strip() and BACKEND == "numba":
    import numba

    try:
        _cap = int(_threads)
    except ValueError as exc:
        raise ValueError(
            f"ORLICZ_FLOW_THREADS must be an integer, got {_threads!r}"
        ) from exc
    numba.set_num_threads(max(1, min(_cap, numba.config.NUMBA_NUM_THREADS)))

support_max_n2 = _impl.support_max_n2
support_max_n3 = _impl.support_max_n3
step_eval_n2 = _impl.step_eval_n2
step_eval_n3 = _impl.step_eval_n3
euler_update = _impl.euler_update
