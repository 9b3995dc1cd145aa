"""Convex bodies with the origin in their interior, stored as support values.

A body is represented by its support function h sampled on the grid of
outer normal directions x.  The boundary point with normal x is
X(x) = h(x) x + grad h(x), its distance from the origin is
r = sqrt(h^2 + |grad h|^2), and discrete convexity means the matrix
b = hess(h) + h I has positive eigenvalues at every node.

The radial picture uses ray directions xi: rho(xi) is the largest t with
t*xi inside the body, recovered from support values through
1/rho(xi) = max_v (xi . v)/h(v).  The maximizing node, refined by a
quadratic fit, is the outer normal at the boundary point rho(xi) xi, which
gives the discrete map between ray and normal directions in both ways.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import ConvexityLostError, GridMismatchError, InvalidBodyError
from .sphere_grid import (
    ScalarField,
    SphereGrid,
    build_grid,
    gradient_components,
    hessian_components,
)

__all__ = [
    "ConvexBody",
    "ValidationReport",
    "validate",
    "embedding",
    "radial_norm_field",
    "radial_eval",
    "reverse_radial_gauss",
    "radial_gauss_map",
    "polar_body",
    "jac_ray_to_normal",
    "jac_normal_to_ray",
    "save_body",
    "load_body",
    "save_field_file",
    "load_field_file",
    "ball_body",
    "offset_ball_body",
    "ellipse_body",
]


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of the support-data checks: positivity and discrete convexity."""

    min_h: float
    convexity_margin: float
    accepted: bool


def _curvature_matrix_eigs(grid: SphereGrid, values: np.ndarray):
    """Eigenvalues (ascending) of b = hess + h*I at every node."""
    hess = hessian_components(grid, values)
    if grid.dim == 2:
        b = hess[0] + values
        return b[:, None]
    b11 = hess[0] + values
    b12 = hess[1]
    b22 = hess[2] + values
    mid = 0.5 * (b11 + b22)
    disc = np.sqrt(np.maximum(0.25 * (b11 - b22) ** 2 + b12 * b12, 0.0))
    return np.column_stack([mid - disc, mid + disc])


def validate(grid: SphereGrid, h_values) -> ValidationReport:
    """Check support data without raising: h > 0 and min eig(b) > 0."""
    values = h_values.values if isinstance(h_values, ScalarField) else np.asarray(
        h_values, dtype=float
    )
    if values.shape != (grid.num_nodes,):
        raise GridMismatchError(
            f"{values.shape} support values on a grid with {grid.num_nodes} nodes"
        )
    min_h = float(values.min())
    if not np.all(np.isfinite(values)):
        return ValidationReport(min_h=min_h, convexity_margin=-math.inf, accepted=False)
    margin = float(_curvature_matrix_eigs(grid, values)[:, 0].min())
    return ValidationReport(
        min_h=min_h, convexity_margin=margin, accepted=min_h > 0.0 and margin > 0.0
    )


@dataclass(frozen=True)
class ConvexBody:
    """A discrete convex body; construction validates the support data."""

    grid: SphereGrid
    h: ScalarField
    convexity_margin: float = field(init=False, default=math.nan)

    def __post_init__(self):
        h = self.h
        if not isinstance(h, ScalarField):
            h = ScalarField(self.grid, np.asarray(h, dtype=float))
            object.__setattr__(self, "h", h)
        elif h.grid != self.grid:
            raise GridMismatchError("support field lives on a different grid")
        report = validate(self.grid, h.values)
        if not report.accepted:
            raise InvalidBodyError(
                f"support data rejected: min h = {report.min_h:.6g}, "
                f"convexity margin = {report.convexity_margin:.6g}"
            )
        object.__setattr__(self, "convexity_margin", report.convexity_margin)


def _frame(grid: SphereGrid):
    """Orthonormal tangent frame at every node."""
    if grid.dim == 2:
        e_t = np.column_stack([-np.sin(grid.theta), np.cos(grid.theta)])
        return (e_t,)
    st, ct = np.sin(grid.theta), np.cos(grid.theta)
    sp, cp = np.sin(grid.phi), np.cos(grid.phi)
    e_t = np.column_stack([ct * cp, ct * sp, -st])
    e_p = np.column_stack([-sp, cp, np.zeros_like(sp)])
    return e_t, e_p


def embedding(body: ConvexBody) -> np.ndarray:
    """Boundary points X = h x + grad h, shape (num_nodes, dim)."""
    grid = body.grid
    values = body.h.values
    comps = gradient_components(grid, values)
    x = values[:, None] * grid.nodes
    for c, e in zip(comps, _frame(grid)):
        x = x + c[:, None] * e
    return x


def radial_norm_field(body: ConvexBody) -> ScalarField:
    """Distance from the origin of the boundary point with normal x."""
    values = body.h.values
    comps = gradient_components(body.grid, values)
    grad_sq = sum(c * c for c in comps)
    return ScalarField(body.grid, np.sqrt(values * values + grad_sq))


def _as_directions(dim: int, directions):
    dirs = np.asarray(directions, dtype=float)
    single = dirs.ndim == 1
    dirs = np.atleast_2d(dirs)
    if dirs.shape[1] != dim:
        raise ValueError(f"directions must have {dim} components")
    norms = np.linalg.norm(dirs, axis=1)
    if np.any(norms <= 0.0) or not np.all(np.isfinite(norms)):
        raise ValueError("directions must be nonzero finite vectors")
    return np.ascontiguousarray(dirs / norms[:, None]), single


def _support_max(body: ConvexBody, dirs: np.ndarray):
    """Max of (xi . v)/h(v) per direction, with refined maximizer angles.

    The discrete argmax is refined by a quadratic fit through the
    maximizing node and its neighbors; on the circle the value is the
    objective re-evaluated at the refined angle, which keeps its error
    smooth across cells.
    """
    grid = body.grid
    h = body.h.values
    if grid.dim == 2:
        dtheta = grid.spacing[0]
        vals, ang = kernels.support_max_n2(
            h, grid.nodes[:, 0].copy(), grid.nodes[:, 1].copy(), dirs, dtheta
        )
        return vals, (ang,)
    m, l = grid.shape
    vals, th, ph = kernels.support_max_n3(
        h.reshape(m, l), grid.nodes, dirs, grid.spacing[0], grid.spacing[1]
    )
    return vals, (th, ph)


def radial_eval(body: ConvexBody, directions):
    """Radial function rho(xi): distance to the boundary along ray xi."""
    dirs, single = _as_directions(body.grid.dim, directions)
    vals, _ = _support_max(body, dirs)
    rho = 1.0 / vals
    return float(rho[0]) if single else rho


def reverse_radial_gauss(body: ConvexBody, directions):
    """Outer unit normal at the boundary point rho(xi) xi."""
    dirs, single = _as_directions(body.grid.dim, directions)
    _, angles = _support_max(body, dirs)
    if body.grid.dim == 2:
        (ang,) = angles
        out = np.column_stack([np.cos(ang), np.sin(ang)])
    else:
        th, ph = angles
        st = np.sin(th)
        out = np.column_stack([st * np.cos(ph), st * np.sin(ph), np.cos(th)])
    return out[0] if single else out


def radial_gauss_map(body: ConvexBody, node: int | None = None):
    """Ray direction xi = X(x)/|X(x)| of the boundary point with normal x.

    ``node`` is a flat node index; omit it to get the directions of every
    node as an (num_nodes, dim) array.
    """
    x = embedding(body)
    dirs = x / np.linalg.norm(x, axis=1)[:, None]
    return dirs if node is None else dirs[node]


def polar_body(body: ConvexBody) -> ConvexBody:
    """Polar dual: support values h*(u) = 1/rho(u) on the same grid."""
    vals, _ = _support_max(body, body.grid.nodes)
    try:
        return ConvexBody(body.grid, vals)
    except InvalidBodyError as exc:
        raise ConvexityLostError(
            f"polar body lost discrete convexity ({exc}); resolution too coarse"
        ) from exc


def _det_b(grid: SphereGrid, values: np.ndarray) -> np.ndarray:
    hess = hessian_components(grid, values)
    if grid.dim == 2:
        return hess[0] + values
    b11 = hess[0] + values
    b12 = hess[1]
    b22 = hess[2] + values
    return b11 * b22 - b12 * b12


def jac_ray_to_normal(body: ConvexBody) -> ScalarField:
    """Jacobian r^n K / h of the ray-to-normal direction map, per node."""
    grid = body.grid
    r = radial_norm_field(body).values
    det = _det_b(grid, body.h.values)
    return ScalarField(grid, r**grid.dim / (det * body.h.values))


def jac_normal_to_ray(body: ConvexBody) -> ScalarField:
    """Jacobian h / (r^n K) of the normal-to-ray direction map, per node."""
    grid = body.grid
    r = radial_norm_field(body).values
    det = _det_b(grid, body.h.values)
    return ScalarField(grid, body.h.values * det / r**grid.dim)


# ---------------------------------------------------------------------------
# file format: header "n=<2|3> resolution=<N>", one node per line in grid
# order, angles then value, 17 significant digits
# ---------------------------------------------------------------------------


def save_field_file(path, grid: SphereGrid, values: np.ndarray) -> None:
    values = np.asarray(values, dtype=float)
    with open(path, "w") as fh:
        fh.write(f"n={grid.dim} resolution={grid.resolution}\n")
        if grid.dim == 2:
            for t, v in zip(grid.theta, values):
                fh.write(f"{t:.17g} {v:.17g}\n")
        else:
            for t, p, v in zip(grid.theta, grid.phi, values):
                fh.write(f"{t:.17g} {p:.17g} {v:.17g}\n")


def load_field_file(path):
    """Read a field file back as (grid, values)."""
    with open(path) as fh:
        header = fh.readline().split()
        try:
            n = int(header[0].split("=")[1])
            resolution = int(header[1].split("=")[1])
        except (IndexError, ValueError) as exc:
            raise ValueError(f"malformed field file header in {path}") from exc
        grid = build_grid(n, resolution)
        rows = np.loadtxt(fh, ndmin=2)
    if rows.shape != (grid.num_nodes, grid.dim):
        raise ValueError(
            f"field file {path} has shape {rows.shape}, expected "
            f"({grid.num_nodes}, {grid.dim})"
        )
    if not np.allclose(rows[:, 0], grid.theta, atol=1e-12, rtol=0.0):
        raise ValueError(f"node angles in {path} do not match the grid")
    if grid.dim == 3 and not np.allclose(rows[:, 1], grid.phi, atol=1e-12, rtol=0.0):
        raise ValueError(f"node longitudes in {path} do not match the grid")
    return grid, rows[:, -1].copy()


def save_body(body: ConvexBody, path) -> None:
    """Write the body's support values; reloads bit-exactly."""
    save_field_file(path, body.grid, body.h.values)


def load_body(path) -> ConvexBody:
    grid, values = load_field_file(path)
    return ConvexBody(grid, values)


# ---------------------------------------------------------------------------
# stock bodies
# ---------------------------------------------------------------------------


def ball_body(grid: SphereGrid, radius: float = 1.0) -> ConvexBody:
    """Origin-centered ball: h = radius."""
    if radius <= 0.0:
        raise InvalidBodyError(f"ball radius must be positive, got {radius}")
    return ConvexBody(grid, np.full(grid.num_nodes, float(radius)))


def offset_ball_body(grid: SphereGrid, radius: float, center) -> ConvexBody:
    """Ball of given radius centered at ``center``: h = radius + center . x."""
    center = np.asarray(center, dtype=float)
    if center.shape != (grid.dim,):
        raise InvalidBodyError(f"center must have {grid.dim} components")
    if np.linalg.norm(center) >= radius:
        raise InvalidBodyError("center must lie strictly inside the ball")
    return ConvexBody(grid, radius + grid.nodes @ center)


def ellipse_body(grid: SphereGrid, a: float, b: float) -> ConvexBody:
    """Origin-centered ellipse h = sqrt(a^2 cos^2 + b^2 sin^2 theta).

    On the sphere this is the axisymmetric spheroid with polar semi-axis
    ``a`` and equatorial semi-axis ``b``.
    """
    if a <= 0.0 or b <= 0.0:
        raise InvalidBodyError("semi-axes must be positive")
    t = grid.theta
    return ConvexBody(
        grid, np.sqrt(a**2 * np.cos(t) ** 2 + b**2 * np.sin(t) ** 2)
    )
