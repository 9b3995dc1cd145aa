"""Uniform grids on S^1 and S^2 with quadrature and finite-difference operators.

For the circle (``dim == 2``) the nodes are theta_k = 2*pi*k/N.  For the
sphere (``dim == 3``) the grid is latitude-longitude with cell-centered
colatitudes theta_j = (j + 1/2)*pi/M and L = 2*M longitudes, so no node sits
on a pole.  Stencils crossing a pole pick up the value on the meridian
phi + pi, which is the smooth continuation of the field along the great
circle.

Derivatives use centered differences with trigonometric denominators
(2*sin(dt) for first, 4*sin(dt/2)^2 for second differences).  These are
second-order accurate and annihilate first spherical harmonics exactly, so
b_ij = hess(h) + h*I is exactly translation covariant on the discrete level.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GridMismatchError, ResolutionError, UnsupportedDimensionError

__all__ = [
    "SphereGrid",
    "ScalarField",
    "DensityField",
    "build_grid",
    "spherical_gradient",
    "spherical_hessian",
    "integrate",
]


@dataclass(frozen=True)
class SphereGrid:
    """Grid geometry: unit nodes, quadrature weights and angular steps."""

    dim: int
    resolution: int
    nodes: np.ndarray            # (num_nodes, dim) unit vectors
    weights: np.ndarray          # (num_nodes,) positive, sums to the sphere area
    spacing: tuple               # (dtheta,) for dim 2, (dtheta, dphi) for dim 3
    theta: np.ndarray            # (num_nodes,) angle / colatitude
    phi: np.ndarray | None       # (num_nodes,) longitude, dim 3 only
    shape: tuple                 # (N,) or (M, L) for reshaping node-indexed arrays
    lat: np.ndarray | None       # (M,) colatitude rows, dim 3 only
    lon: np.ndarray | None       # (L,) longitude columns, dim 3 only

    @property
    def num_nodes(self) -> int:
        return self.nodes.shape[0]

    def sample(self, fn) -> "ScalarField":
        """Evaluate ``fn(theta)`` (dim 2) or ``fn(theta, phi)`` (dim 3) on the nodes."""
        if self.dim == 2:
            values = np.asarray(fn(self.theta), dtype=float)
        else:
            values = np.asarray(fn(self.theta, self.phi), dtype=float)
        return ScalarField(self, values)

    def __eq__(self, other):
        return (
            isinstance(other, SphereGrid)
            and other.dim == self.dim
            and other.resolution == self.resolution
        )

    def __hash__(self):
        return hash((self.dim, self.resolution))


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr, dtype=float)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class ScalarField:
    """A real-valued function sampled on the nodes of a grid."""

    grid: SphereGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.grid.num_nodes,):
            raise GridMismatchError(
                f"field has {values.shape} values, grid has {self.grid.num_nodes} nodes"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("field values must be finite")
        object.__setattr__(self, "values", _freeze(values))


class DensityField(ScalarField):
    """A strictly positive scalar field (prescribed data g)."""

    def __post_init__(self):
        super().__post_init__()
        if np.min(self.values) <= 0.0:
            raise ValueError(
                f"density must be strictly positive, min value {np.min(self.values):g}"
            )


def build_grid(n: int, resolution: int) -> SphereGrid:
    """Build the uniform grid on S^{n-1} for ambient dimension n in {2, 3}.

    ``resolution`` is the node count per angular axis: N nodes on the circle,
    M latitudes (and 2*M longitudes) on the sphere.  It must be even and at
    least 16.  Weights are exact on constants: they sum to 2*pi (n=2) or
    4*pi (n=3) up to roundoff.
    """
    if n not in (2, 3):
        raise UnsupportedDimensionError(f"ambient dimension must be 2 or 3, got {n}")
    if resolution < 16 or resolution % 2 != 0:
        raise ResolutionError(f"resolution must be even and >= 16, got {resolution}")

    if n == 2:
        dtheta = 2.0 * np.pi / resolution
        theta = dtheta * np.arange(resolution)
        nodes = np.column_stack([np.cos(theta), np.sin(theta)])
        weights = np.full(resolution, dtheta)
        return SphereGrid(
            dim=2,
            resolution=resolution,
            nodes=_freeze(nodes),
            weights=_freeze(weights),
            spacing=(dtheta,),
            theta=_freeze(theta),
            phi=None,
            shape=(resolution,),
            lat=None,
            lon=None,
        )

    m = resolution
    l = 2 * m
    dtheta = np.pi / m
    dphi = 2.0 * np.pi / l
    lat = (np.arange(m) + 0.5) * dtheta
    lon = np.arange(l) * dphi
    theta = np.repeat(lat, l)
    phi = np.tile(lon, m)
    sin_t, cos_t = np.sin(theta), np.cos(theta)
    nodes = np.column_stack([sin_t * np.cos(phi), sin_t * np.sin(phi), cos_t])
    # exact integral of sin over each latitude band: 2*sin(dtheta/2)*sin(theta_j)
    band = 2.0 * np.sin(0.5 * dtheta) * np.sin(lat)
    weights = np.repeat(band, l) * dphi
    return SphereGrid(
        dim=3,
        resolution=resolution,
        nodes=_freeze(nodes),
        weights=_freeze(weights),
        spacing=(dtheta, dphi),
        theta=_freeze(theta),
        phi=_freeze(phi),
        shape=(m, l),
        lat=_freeze(lat),
        lon=_freeze(lon),
    )


def _check_field(grid: SphereGrid, f: ScalarField) -> np.ndarray:
    if f.grid != grid:
        raise GridMismatchError(
            f"field lives on grid {(f.grid.dim, f.grid.resolution)}, "
            f"expected {(grid.dim, grid.resolution)}"
        )
    return f.values


# ---------------------------------------------------------------------------
# raw-array operators
# ---------------------------------------------------------------------------


def _pad_poles(f2d: np.ndarray) -> np.ndarray:
    """Add ghost rows beyond both poles from the antipodal-in-longitude column."""
    half = f2d.shape[1] // 2
    top = np.roll(f2d[0], half)
    bot = np.roll(f2d[-1], half)
    return np.vstack([top[None, :], f2d, bot[None, :]])


def _grad2(grid: SphereGrid, v: np.ndarray) -> np.ndarray:
    dtheta = grid.spacing[0]
    return (np.roll(v, -1) - np.roll(v, 1)) / (2.0 * np.sin(dtheta))


def _hess2(grid: SphereGrid, v: np.ndarray) -> np.ndarray:
    dtheta = grid.spacing[0]
    den = 4.0 * np.sin(0.5 * dtheta) ** 2
    return (np.roll(v, -1) - 2.0 * v + np.roll(v, 1)) / den


def _grad3(grid: SphereGrid, v: np.ndarray):
    """Orthonormal-frame gradient components (f_theta, f_phi / sin theta)."""
    dtheta, dphi = grid.spacing
    f = v.reshape(grid.shape)
    p = _pad_poles(f)
    f_t = (p[2:] - p[:-2]) / (2.0 * np.sin(dtheta))
    f_p = (np.roll(f, -1, axis=1) - np.roll(f, 1, axis=1)) / (2.0 * np.sin(dphi))
    sin_t = np.sin(grid.lat)[:, None]
    return f_t, f_p / sin_t


def _hess3(grid: SphereGrid, v: np.ndarray):
    """Covariant-Hessian frame components (H11, H12, H22) on the sphere."""
    dtheta, dphi = grid.spacing
    f = v.reshape(grid.shape)
    p = _pad_poles(f)
    inv2st = 1.0 / (2.0 * np.sin(dtheta))
    inv2sp = 1.0 / (2.0 * np.sin(dphi))
    f_t = (p[2:] - p[:-2]) * inv2st
    f_p = (np.roll(f, -1, axis=1) - np.roll(f, 1, axis=1)) * inv2sp
    f_tt = (p[2:] - 2.0 * f + p[:-2]) / (4.0 * np.sin(0.5 * dtheta) ** 2)
    f_pp = (np.roll(f, -1, axis=1) - 2.0 * f + np.roll(f, 1, axis=1)) / (
        4.0 * np.sin(0.5 * dphi) ** 2
    )
    f_tp = (np.roll(f_t, -1, axis=1) - np.roll(f_t, 1, axis=1)) * inv2sp
    sin_t = np.sin(grid.lat)[:, None]
    cot_t = (np.cos(grid.lat) / np.sin(grid.lat))[:, None]
    h11 = f_tt
    h12 = (f_tp - cot_t * f_p) / sin_t
    h22 = f_pp / sin_t**2 + cot_t * f_t
    return h11, h12, h22


def gradient_components(grid: SphereGrid, values: np.ndarray):
    """Frame components of the spherical gradient, as flat arrays."""
    if grid.dim == 2:
        return (_grad2(grid, values),)
    g1, g2 = _grad3(grid, values)
    return g1.ravel(), g2.ravel()


def hessian_components(grid: SphereGrid, values: np.ndarray):
    """Frame components of the covariant Hessian, as flat arrays."""
    if grid.dim == 2:
        return (_hess2(grid, values),)
    h11, h12, h22 = _hess3(grid, values)
    return h11.ravel(), h12.ravel(), h22.ravel()


# ---------------------------------------------------------------------------
# public operators
# ---------------------------------------------------------------------------


def spherical_gradient(grid: SphereGrid, f: ScalarField) -> np.ndarray:
    """Gradient of ``f`` on S^{dim-1}, shape (num_nodes, dim-1).

    Components are taken in the orthonormal frame: d/dtheta on the circle,
    (d/dtheta, (1/sin theta) d/dphi) on the sphere.
    """
    v = _check_field(grid, f)
    comps = gradient_components(grid, v)
    return np.column_stack(comps)


def spherical_hessian(grid: SphereGrid, f: ScalarField) -> np.ndarray:
    """Covariant Hessian of ``f``, shape (num_nodes, dim-1, dim-1)."""
    v = _check_field(grid, f)
    if grid.dim == 2:
        h = _hess2(grid, v)
        return h.reshape(-1, 1, 1)
    h11, h12, h22 = (c.ravel() for c in _hess3(grid, v))
    out = np.empty((grid.num_nodes, 2, 2))
    out[:, 0, 0] = h11
    out[:, 0, 1] = h12
    out[:, 1, 0] = h12
    out[:, 1, 1] = h22
    return out


def integrate(grid: SphereGrid, f) -> float:
    """Quadrature of ``f`` (field or raw node array) over the sphere."""
    if isinstance(f, ScalarField):
        v = _check_field(grid, f)
    else:
        v = np.asarray(f, dtype=float)
        if v.shape != (grid.num_nodes,):
            raise GridMismatchError(
                f"array of shape {v.shape} on a grid with {grid.num_nodes} nodes"
            )
    return float(np.sum(grid.weights * v))
