#!/usr/bin/env python3
"""Micro-benchmark of the hot kernels: jitted backend vs numpy reference.

Times one fused flow-step evaluation and one support-function query batch
on the circle and on the sphere, then prints the per-call times and the
speedup.  Run from an environment with numba installed; without it only
the numpy column is produced.

    python3 benchmarks/bench_kernels.py --resolution 256 --resolution3 64
"""

import argparse
import timeit

import numpy as np

from orlicz_flow import build_grid
from orlicz_flow.kernels import numpy_backend

try:
    from orlicz_flow.kernels import numba_backend
except ImportError:
    numba_backend = None


def _best_seconds(fn, args, number):
    return min(timeit.repeat(lambda: fn(*args), repeat=5, number=number)) / number


def _cases(resolution, resolution3):
    grid2 = build_grid(2, resolution)
    h2 = np.sqrt((1.5 * np.cos(grid2.theta)) ** 2 + (0.7 * np.sin(grid2.theta)) ** 2)
    g2 = 1.0 + 0.2 * np.cos(grid2.theta)
    rng = np.random.default_rng(11)
    ang = rng.uniform(0.0, 2.0 * np.pi, grid2.num_nodes)
    dirs2 = np.column_stack([np.cos(ang), np.sin(ang)])

    grid3 = build_grid(3, resolution3)
    h3 = 1.0 + 0.05 * (np.cos(grid3.theta) ** 2 - 1.0 / 3.0)
    g3 = np.ones(grid3.num_nodes)
    m, l = grid3.shape
    dirs3 = rng.normal(size=(1024, 3))
    dirs3 /= np.linalg.norm(dirs3, axis=1, keepdims=True)

    return [
        (
            f"step_eval n=2 N={resolution}",
            "step_eval_n2",
            (h2, g2, grid2.weights, grid2.spacing[0], -1.0, False),
            2000,
        ),
        (
            f"step_eval n=3 N={resolution3}",
            "step_eval_n3",
            (h3, g3, grid3.weights, m, l, grid3.lat,
             grid3.spacing[0], grid3.spacing[1], -1.0, False),
            200,
        ),
        (
            f"support_max n=2 N={resolution} ({grid2.num_nodes} dirs)",
            "support_max_n2",
            (h2, grid2.nodes[:, 0].copy(), grid2.nodes[:, 1].copy(),
             dirs2, grid2.spacing[0]),
            200,
        ),
        (
            f"support_max n=3 N={resolution3} (1024 dirs)",
            "support_max_n3",
            (h3.reshape(m, l), grid3.nodes, dirs3, grid3.spacing[0], grid3.spacing[1]),
            20,
        ),
    ]


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--resolution", type=int, default=256, help="circle nodes")
    parser.add_argument("--resolution3", type=int, default=64, help="sphere latitudes")
    args = parser.parse_args()

    cases = _cases(args.resolution, args.resolution3)
    if numba_backend is not None:
        # trigger compilation outside the timed region
        for _, name, call_args, _ in cases:
            getattr(numba_backend, name)(*call_args)

    width = max(len(label) for label, _, _, _ in cases)
    header = f"{'kernel':<{width}}  {'numpy':>10}  {'numba':>10}  {'speedup':>7}"
    print(header)
    print("-" * len(header))
    for label, name, call_args, number in cases:
        t_np = _best_seconds(getattr(numpy_backend, name), call_args, number)
        if numba_backend is None:
            print(f"{label:<{width}}  {t_np * 1e6:>8.1f}us  {'n/a':>10}  {'n/a':>7}")
            continue
        t_nb = _best_seconds(getattr(numba_backend, name), call_args, number)
        print(
            f"{label:<{width}}  {t_np * 1e6:>8.1f}us  {t_nb * 1e6:>8.1f}us  "
            f"{t_np / t_nb:>6.1f}x"
        )


if __name__ == "__main__":
    main()
