"""Backend dispatch and numba-vs-numpy agreement on the hot kernels."""

import importlib.util
import os
import subprocess
import sys

import numpy as np
import pytest

import orlicz_flow.kernels as kernels
from orlicz_flow.kernels import numpy_backend

HAVE_NUMBA = importlib.util.find_spec("numba") is not None

numba_backend = None
if HAVE_NUMBA:
    from orlicz_flow.kernels import numba_backend


def _ellipse_h(grid, a=1.5, b=0.7):
    return np.sqrt((a * np.cos(grid.theta)) ** 2 + (b * np.sin(grid.theta)) ** 2)


def test_backend_constant_is_valid():
    assert kernels.BACKEND in ("numba", "numpy")
    if HAVE_NUMBA:
        # auto dispatch must have picked the jitted path in this environment
        assert kernels.BACKEND == "numba"


@pytest.mark.skipif(not HAVE_NUMBA, reason="numba not installed")
class TestBackendAgreement:
    def test_step_eval_n2(self, grid256, warm_kernels):
        h = _ellipse_h(grid256)
        g = 1.0 + 0.2 * np.cos(grid256.theta)
        w = grid256.weights
        dtheta = grid256.spacing[0]
        for p in (-1.0, -2.0, 2.0):
            for reciprocal in (False, True):
                s_np, st_np = numpy_backend.step_eval_n2(h, g, w, dtheta, p, reciprocal)
                s_nb, st_nb = numba_backend.step_eval_n2(h, g, w, dtheta, p, reciprocal)
                np.testing.assert_allclose(s_nb, s_np, rtol=1e-12, atol=1e-13)
                np.testing.assert_allclose(st_nb, st_np, rtol=1e-12, atol=1e-13)

    def test_step_eval_n3(self, grid3_64, warm_kernels):
        grid = grid3_64
        h = 1.0 + 0.05 * (np.cos(grid.theta) ** 2 - 1.0 / 3.0)
        g = 1.0 + 0.1 * np.cos(grid.theta)
        m, l = grid.shape
        for p in (-1.0, 2.0):
            for reciprocal in (False, True):
                s_np, st_np = numpy_backend.step_eval_n3(
                    h, g, grid.weights, m, l, grid.lat,
                    grid.spacing[0], grid.spacing[1], p, reciprocal,
                )
                s_nb, st_nb = numba_backend.step_eval_n3(
                    h, g, grid.weights, m, l, grid.lat,
                    grid.spacing[0], grid.spacing[1], p, reciprocal,
                )
                np.testing.assert_allclose(s_nb, s_np, rtol=1e-12, atol=1e-13)
                np.testing.assert_allclose(st_nb, st_np, rtol=1e-12, atol=1e-13)

    def test_degenerate_state_flagged_identically(self, grid256, warm_kernels):
        # strong high frequency makes h + h'' change sign, so both backends
        # must bail out with the nan-filled stats vector
        h = 1.0 + 0.5 * np.cos(8.0 * grid256.theta)
        g = np.ones_like(h)
        args = (h, g, grid256.weights, grid256.spacing[0], -1.0, False)
        _, st_np = numpy_backend.step_eval_n2(*args)
        _, st_nb = numba_backend.step_eval_n2(*args)
        assert np.isnan(st_np[numpy_backend.STAT_F])
        assert np.isnan(st_nb[numpy_backend.STAT_F])
        assert st_nb[numpy_backend.STAT_MIN_H] == st_np[numpy_backend.STAT_MIN_H]

    def test_support_max_n2(self, grid256, warm_kernels):
        h = _ellipse_h(grid256)
        rng = np.random.default_rng(3)
        ang = rng.uniform(0.0, 2.0 * np.pi, 257)
        dirs = np.column_stack([np.cos(ang), np.sin(ang)])
        cos_t = grid256.nodes[:, 0].copy()
        sin_t = grid256.nodes[:, 1].copy()
        v_np, a_np = numpy_backend.support_max_n2(h, cos_t, sin_t, dirs, grid256.spacing[0])
        v_nb, a_nb = numba_backend.support_max_n2(h, cos_t, sin_t, dirs, grid256.spacing[0])
        np.testing.assert_allclose(v_nb, v_np, rtol=1e-12, atol=1e-14)
        np.testing.assert_allclose(a_nb, a_np, rtol=1e-12, atol=1e-14)

    def test_support_max_n3(self, grid3_64, warm_kernels):
        grid = grid3_64
        h = 1.0 + 0.05 * (np.cos(grid.theta) ** 2 - 1.0 / 3.0)
        rng = np.random.default_rng(5)
        dirs = rng.normal(size=(257, 3))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        m, l = grid.shape
        out_np = numpy_backend.support_max_n3(
            h.reshape(m, l), grid.nodes, dirs, grid.spacing[0], grid.spacing[1]
        )
        out_nb = numba_backend.support_max_n3(
            h.reshape(m, l), grid.nodes, dirs, grid.spacing[0], grid.spacing[1]
        )
        for got, want in zip(out_nb, out_np):
            np.testing.assert_allclose(got, want, rtol=1e-12, atol=1e-14)

    def test_euler_update(self, grid256, warm_kernels):
        h = _ellipse_h(grid256)
        speed = np.sin(3.0 * grid256.theta)
        got = numba_backend.euler_update(h, speed, 1e-3)
        want = numpy_backend.euler_update(h, speed, 1e-3)
        assert np.array_equal(got, want)


def _spawn(env_overrides, code="import orlicz_flow.kernels as k; print(k.BACKEND)"):
    env = dict(os.environ)
    env.pop("ORLICZ_FLOW_BACKEND", None)
    env.pop("ORLICZ_FLOW_THREADS", None)
    env.update(env_overrides)
    return subprocess.run(
        [sys.executable, "-c", code], capture_output=True, text=True, env=env
    )


def test_env_forces_numpy_backend():
    proc = _spawn({"ORLICZ_FLOW_BACKEND": "numpy"})
    assert proc.returncode == 0, proc.stderr
    assert proc.stdout.strip() == "numpy"


@pytest.mark.skipif(not HAVE_NUMBA, reason="numba not installed")
def test_env_forces_numba_backend():
    proc = _spawn({"ORLICZ_FLOW_BACKEND": "numba"})
    assert proc.returncode == 0, proc.stderr
    assert proc.stdout.strip() == "numba"


def test_env_rejects_unknown_backend():
    proc = _spawn({"ORLICZ_FLOW_BACKEND": "cuda"})
    assert proc.returncode != 0
    assert "ORLICZ_FLOW_BACKEND" in proc.stderr


@pytest.mark.skipif(not HAVE_NUMBA, reason="numba not installed")
def test_env_thread_cap():
    code = (
        "import orlicz_flow.kernels as k; import numba; "
        "print(k.BACKEND, numba.get_num_threads())"
    )
    proc = _spawn({"ORLICZ_FLOW_BACKEND": "numba", "ORLICZ_FLOW_THREADS": "1"}, code)
    assert proc.returncode == 0, proc.stderr
    assert proc.stdout.split() == ["numba", "1"]


@pytest.mark.skipif(not HAVE_NUMBA, reason="numba not installed")
def test_env_rejects_bad_thread_cap():
    proc = _spawn({"ORLICZ_FLOW_BACKEND": "numba", "ORLICZ_FLOW_THREADS": "many"})
    assert proc.returncode != 0
    assert "ORLICZ_FLOW_THREADS" in proc.stderr
