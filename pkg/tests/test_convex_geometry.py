"""Support-function bodies, the radial/support/polar dictionary, file I/O."""

import numpy as np
import pytest

from orlicz_flow import (
    ConvexBody,
    InvalidBodyError,
    ball_body,
    ellipse_body,
    embedding,
    jac_normal_to_ray,
    jac_ray_to_normal,
    load_body,
    offset_ball_body,
    polar_body,
    radial_eval,
    radial_gauss_map,
    radial_norm_field,
    reverse_radial_gauss,
    save_body,
    validate,
)
from orlicz_flow.errors import GridMismatchError


@pytest.fixture(scope="module")
def offset(grid256):
    return offset_ball_body(grid256, 1.0, (0.3, 0.0))


@pytest.fixture(scope="module")
def ellipse(grid256):
    return ellipse_body(grid256, 1.5, 0.7)


def test_embedding_of_balls(grid256, grid3_64):
    for grid in (grid256, grid3_64):
        assert np.abs(embedding(ball_body(grid, 1.0)) - grid.nodes).max() == 0.0
        assert np.abs(embedding(ball_body(grid, 2.0)) - 2.0 * grid.nodes).max() == 0.0


def test_embedding_of_offset_circle(grid256, offset):
    # support function of the unit circle centered at (0.3, 0)
    expected = np.column_stack(
        [0.3 + np.cos(grid256.theta), np.sin(grid256.theta)]
    )
    assert np.abs(embedding(offset) - expected).max() <= 1e-12


def test_radial_norm_constant(grid256):
    r = radial_norm_field(ball_body(grid256, 1.7))
    assert np.abs(r.values - 1.7).max() == 0.0


def test_radial_norm_offset_circle(grid256, offset):
    r = radial_norm_field(offset).values
    assert abs(r[0] - 1.3) <= 1e-12
    # node 64 sits at theta = pi/2
    assert abs(r[64] - np.sqrt(1.09)) <= 1e-12


def test_radial_norm_matches_embedding(ellipse, offset):
    for body in (ellipse, offset):
        r = radial_norm_field(body).values
        lengths = np.linalg.norm(embedding(body), axis=1)
        assert np.abs(r - lengths).max() <= 1e-12


def test_radial_eval_on_balls(grid256, grid3_64):
    dirs2 = np.array([[1.0, 0.0], [np.cos(0.37), np.sin(0.37)]])
    assert np.abs(radial_eval(ball_body(grid256, 1.0), dirs2) - 1.0).max() <= 1e-12
    assert np.abs(radial_eval(ball_body(grid256, 2.0), dirs2) - 2.0).max() <= 1e-12
    dirs3 = np.array([[0.0, 0.0, 1.0], [0.6, 0.0, 0.8]])
    assert np.abs(radial_eval(ball_body(grid3_64, 2.0), dirs3) - 2.0).max() <= 1e-6


def test_radial_eval_offset_circle(offset):
    # boundary point on the +x ray is (1.3, 0); dense-polygon oracle
    # (tests/_oracles.py) returns 1.3 exactly
    rho = radial_eval(offset, np.array([[1.0, 0.0], [0.0, 1.0]]))
    assert abs(rho[0] - 1.3) <= 1e-9
    assert abs(rho[1] - np.sqrt(0.91)) <= 1e-6


def test_radial_eval_matches_embedding(ellipse):
    rho = radial_eval(ellipse, radial_gauss_map(ellipse))
    r = radial_norm_field(ellipse).values
    assert np.abs(rho - r).max() <= 1e-4


def test_reverse_radial_gauss_identity_on_ball(grid256):
    dirs = np.array([[0.0, 1.0], [np.cos(2.1), np.sin(2.1)]])
    out = reverse_radial_gauss(ball_body(grid256, 1.0), dirs)
    assert np.abs(out - dirs).max() <= 1e-6


def test_reverse_radial_gauss_offset_circle(offset):
    # dense-polygon oracle (tests/_oracles.py): the ray (0, 1) hits the
    # circle at (0, sqrt(0.91)) whose outward normal is (-0.3, sqrt(0.91))
    out = reverse_radial_gauss(offset, np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert np.abs(out[0] - np.array([-0.3, 0.953939201416946])).max() <= 5e-4
    assert np.abs(out[1] - np.array([1.0, 0.0])).max() <= 1e-12


def test_radial_gauss_map_examples(grid256, offset):
    assert np.abs(radial_gauss_map(ball_body(grid256, 1.0)) - grid256.nodes).max() <= 1e-15
    xi = radial_gauss_map(offset)
    assert np.abs(xi[0] - np.array([1.0, 0.0])).max() <= 1e-15
    expected = np.array([0.3, 1.0]) / np.sqrt(1.09)
    assert np.abs(xi[64] - expected).max() <= 1e-12


def test_map_round_trip(ellipse, offset):
    for body in (ellipse, offset):
        xi = radial_gauss_map(body)
        back = reverse_radial_gauss(body, xi)
        err = np.abs(np.arctan2(back[:, 1], back[:, 0]) - body.grid.theta)
        err = np.minimum(err, 2.0 * np.pi - err)
        assert err.max() <= 2.0 * body.grid.spacing[0]


def test_polar_of_balls(grid256):
    pol = polar_body(ball_body(grid256, 2.0))
    assert np.abs(pol.h.values - 0.5).max() <= 1e-12
    self_polar = polar_body(ball_body(grid256, 1.0))
    assert np.abs(self_polar.h.values - 1.0).max() <= 1e-12


def test_bipolar_round_trip(ellipse):
    again = polar_body(polar_body(ellipse))
    assert np.abs(again.h.values - ellipse.h.values).max() <= 1e-3


def test_duality_product(ellipse):
    rho_polar = radial_eval(polar_body(ellipse), ellipse.grid.nodes)
    assert np.abs(ellipse.h.values * rho_polar - 1.0).max() <= 1e-6


def test_jacobians_on_balls(grid256, grid3_64):
    for grid, c in ((grid256, 1.0), (grid256, 2.0), (grid3_64, 1.6)):
        body = ball_body(grid, c)
        assert np.abs(jac_ray_to_normal(body).values - 1.0).max() <= 1e-12
        assert np.abs(jac_normal_to_ray(body).values - 1.0).max() <= 1e-12


def test_jacobian_of_ellipse(ellipse):
    # closed form h / (r^2 K) at the normal (1, 0), cross-checked by the
    # dense-polygon density oracle (tests/_oracles.py) to 2.2e-8
    assert abs(jac_normal_to_ray(ellipse).values[0] - 0.217777777777778) <= 1e-3


def test_jacobian_reciprocity(ellipse, offset):
    for body in (ellipse, offset):
        prod = jac_ray_to_normal(body).values * jac_normal_to_ray(body).values
        assert np.abs(prod - 1.0).max() <= 1e-10


def test_translation_leaves_margin(grid256, ellipse):
    shifted = ellipse.h.values + grid256.nodes @ np.array([0.07, -0.11])
    m0 = validate(grid256, ellipse.h.values).convexity_margin
    m1 = validate(grid256, shifted).convexity_margin
    assert abs(m0 - m1) <= 1e-10


def test_validate_examples(grid256):
    rep = validate(grid256, np.ones(grid256.num_nodes))
    assert rep.accepted and rep.convexity_margin == pytest.approx(1.0)
    # support data of a single point: degenerate, margin 0
    rep = validate(grid256, np.cos(grid256.theta))
    assert not rep.accepted
    assert abs(rep.convexity_margin) <= 1e-10
    rep = validate(grid256, 1.0 + 0.3 * np.cos(grid256.theta))
    assert rep.accepted
    assert abs(rep.convexity_margin - 1.0) <= 1e-10


def test_degenerate_body_rejected(grid256):
    with pytest.raises(InvalidBodyError):
        ConvexBody(grid256, np.cos(grid256.theta))
    with pytest.raises(InvalidBodyError):
        ConvexBody(grid256, -np.ones(grid256.num_nodes))


def test_body_grid_mismatch(grid256, grid128):
    field = grid128.sample(lambda t: 1.0 + 0.1 * np.cos(2.0 * t))
    with pytest.raises(GridMismatchError):
        ConvexBody(grid256, field)


def test_body_values_are_immutable(ellipse):
    with pytest.raises(ValueError):
        ellipse.h.values[0] = 2.0


def test_body_file_round_trip(tmp_path, ellipse, grid3_64):
    bump = ConvexBody(
        grid3_64, 1.0 + 0.05 * (np.cos(grid3_64.theta) ** 2 - 1.0 / 3.0)
    )
    for body in (ellipse, bump):
        path = tmp_path / "body.txt"
        save_body(body, path)
        again = load_body(path)
        assert again.grid == body.grid
        assert np.abs(again.h.values - body.h.values).max() == 0.0


def test_body_file_rejects_garbage(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("n=5 resolution=64\n")
    with pytest.raises(Exception):
        load_body(path)
