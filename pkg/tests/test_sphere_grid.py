"""Grid construction, differential operators, and quadrature."""

import numpy as np
import pytest

from orlicz_flow import (
    ScalarField,
    UnsupportedDimensionError,
    build_grid,
    integrate,
    spherical_gradient,
    spherical_hessian,
)
from orlicz_flow.errors import GridMismatchError, OrliczFlowError


def ellipse_support(theta, a=1.5, b=0.7):
    return np.sqrt(a * a * np.cos(theta) ** 2 + b * b * np.sin(theta) ** 2)


def test_circle_grid_nodes_and_weights(grid256):
    assert grid256.num_nodes == 256
    assert np.allclose(grid256.weights, 2.0 * np.pi / 256, rtol=0, atol=0)
    assert np.allclose(np.hypot(grid256.nodes[:, 0], grid256.nodes[:, 1]), 1.0)


def test_sphere_grid_nodes_and_weights(grid3_64):
    assert grid3_64.shape == (64, 128)
    assert grid3_64.num_nodes == 64 * 128
    assert abs(grid3_64.weights.sum() - 4.0 * np.pi) <= 1e-12
    # cell-centered latitudes keep every node off the poles
    assert grid3_64.lat[0] == pytest.approx(0.5 * np.pi / 64)
    assert np.sin(grid3_64.theta).min() > 0.0


def test_unsupported_dimension_and_resolution():
    with pytest.raises(UnsupportedDimensionError):
        build_grid(4, 32)
    with pytest.raises(OrliczFlowError):
        build_grid(2, 14)
    with pytest.raises(OrliczFlowError):
        build_grid(2, 17)


def test_gradient_of_constant_is_exactly_zero(grid256, grid3_64):
    for grid in (grid256, grid3_64):
        f = ScalarField(grid, np.full(grid.num_nodes, 5.0))
        assert np.abs(spherical_gradient(grid, f)).max() == 0.0
        assert np.abs(spherical_hessian(grid, f)).max() == 0.0


def test_gradient_of_sine(grid256):
    f = grid256.sample(np.sin)
    grad = spherical_gradient(grid256, f)
    assert abs(grad[0, 0] - 1.0) <= 1e-10


def test_gradient_of_ellipse_support(grid256):
    f = grid256.sample(ellipse_support)
    grad = spherical_gradient(grid256, f)
    # node 32 sits at theta = pi/4; reference value from the Richardson
    # finite-difference oracle (tests/_oracles.py), which matches the
    # closed form -(a^2 - b^2) sin cos / f to 2e-11
    assert abs(grad[32, 0] - (-0.751834738813943)) <= 5e-4


def test_hessian_of_cosine(grid256):
    f = grid256.sample(np.cos)
    hess = spherical_hessian(grid256, f)
    assert np.abs(hess[:, 0, 0] + np.cos(grid256.theta)).max() <= 1e-10


def test_first_harmonics_annihilated(grid256):
    f = grid256.sample(lambda t: 0.7 * np.cos(t) - 1.3 * np.sin(t))
    hess = spherical_hessian(grid256, f)
    assert np.abs(hess[:, 0, 0] + f.values).max() <= 1e-10


def test_sphere_hessian_of_constant_plus_identity(grid3_64):
    # a round sphere of radius c has curvature matrix c * I
    c = 1.7
    f = ScalarField(grid3_64, np.full(grid3_64.num_nodes, c))
    hess = spherical_hessian(grid3_64, f)
    b = hess + c * np.eye(2)[None, :, :]
    assert np.abs(b - c * np.eye(2)).max() == 0.0


def test_integrate_constants(grid256, grid3_64):
    one2 = ScalarField(grid256, np.ones(grid256.num_nodes))
    one3 = ScalarField(grid3_64, np.ones(grid3_64.num_nodes))
    assert abs(integrate(grid256, one2) - 2.0 * np.pi) <= 1e-12
    assert abs(integrate(grid3_64, one3) - 4.0 * np.pi) <= 1e-12


def test_integrate_cosine_squared(grid256):
    f = grid256.sample(lambda t: np.cos(t) ** 2)
    assert abs(integrate(grid256, f) - np.pi) <= 1e-10


def test_integrate_linear_and_positive(grid256):
    rng = np.random.default_rng(3)
    f = ScalarField(grid256, rng.uniform(0.0, 2.0, grid256.num_nodes))
    g = ScalarField(grid256, rng.uniform(-1.0, 1.0, grid256.num_nodes))
    combo = ScalarField(grid256, 2.0 * f.values - 0.5 * g.values)
    lhs = integrate(grid256, combo)
    rhs = 2.0 * integrate(grid256, f) - 0.5 * integrate(grid256, g)
    assert abs(lhs - rhs) <= 1e-12
    assert integrate(grid256, f) >= 0.0


def test_grid_mismatch_rejected(grid256, grid128):
    f = grid128.sample(np.sin)
    with pytest.raises(GridMismatchError):
        spherical_gradient(grid256, f)
    with pytest.raises(GridMismatchError):
        integrate(grid256, f)


def _planar_errors(grid):
    f = grid.sample(ellipse_support)
    a2, b2 = 2.25, 0.49
    fv = f.values
    fp = (b2 - a2) * np.sin(grid.theta) * np.cos(grid.theta) / fv
    cos2 = np.cos(2.0 * grid.theta)
    fpp = (b2 - a2) * cos2 / fv - fp * fp / fv
    ge = np.abs(spherical_gradient(grid, f)[:, 0] - fp).max()
    he = np.abs(spherical_hessian(grid, f)[:, 0, 0] - fpp).max()
    return ge, he


def test_refinement_second_order_planar(grid128, grid256):
    ge1, he1 = _planar_errors(grid128)
    ge2, he2 = _planar_errors(grid256)
    assert ge1 / ge2 >= 3.5
    assert he1 / he2 >= 3.5


def _sphere_errors(grid):
    # smooth test function, even across both poles; generic functions pay
    # a first-order penalty on the two polar rows where cot(theta)
    # amplifies the theta-stencil error, a lat-long artifact that would
    # mask the interior order measured here
    th, ph = grid.theta, grid.phi
    st, ct = np.sin(th), np.cos(th)
    f = ScalarField(grid, np.exp(ct) + 0.3 * st * st * np.cos(2.0 * ph))
    ft = -st * np.exp(ct) + 0.6 * st * ct * np.cos(2.0 * ph)
    fp_frame = -0.6 * st * np.sin(2.0 * ph)
    ftt = (st * st - ct) * np.exp(ct) + 0.6 * np.cos(2.0 * th) * np.cos(2.0 * ph)
    fthph = -1.2 * st * ct * np.sin(2.0 * ph)
    h12 = (fthph - (ct / st) * (-0.6 * st * st * np.sin(2.0 * ph))) / st
    h22 = -1.2 * np.cos(2.0 * ph) + (ct / st) * ft
    grad = spherical_gradient(grid, f)
    hess = spherical_hessian(grid, f)
    ge = max(np.abs(grad[:, 0] - ft).max(), np.abs(grad[:, 1] - fp_frame).max())
    he = max(
        np.abs(hess[:, 0, 0] - ftt).max(),
        np.abs(hess[:, 0, 1] - h12).max(),
        np.abs(hess[:, 1, 1] - h22).max(),
    )
    return ge, he


def test_refinement_second_order_sphere(grid3_64):
    ge1, he1 = _sphere_errors(build_grid(3, 32))
    ge2, he2 = _sphere_errors(grid3_64)
    assert ge1 / ge2 >= 3.5
    assert he1 / he2 >= 3.5
