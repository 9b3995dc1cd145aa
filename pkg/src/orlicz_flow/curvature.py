"""Curvature fields and curvature measures of a convex body.

The frame matrix b = hess(h) + h I has the principal curvature radii as
eigenvalues; the Gauss curvature is 1/det(b).  The density
h det(b)/r^n, integrated over normal-direction nodes, realizes the
Aleksandrov measure of ray-direction sets: its total mass is the full
sphere measure for every valid body.  Reweighting by phi(1/h) gives the
Orlicz variant that the solver drives toward a prescribed density g.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .convex_geometry import (
    ConvexBody,
    polar_body,
    radial_norm_field,
    reverse_radial_gauss,
)
from .errors import InvalidBodyError, UnsupportedDimensionError
from .orlicz_model import PhiModel
from .sphere_grid import ScalarField, hessian_components, integrate

__all__ = [
    "CurvatureReport",
    "principal_radii",
    "gauss_curvature",
    "mean_curvature",
    "curvature_report",
    "integral_curvature_density",
    "orlicz_density",
    "total_integral_curvature",
    "radial_gauss_image_measure",
    "arc_density_quadrature",
    "write_curvature_csv",
]


def principal_radii(body: ConvexBody) -> np.ndarray:
    """Eigenvalues of b = hess(h) + h I per node, ascending, (N, dim-1)."""
    grid = body.grid
    values = body.h.values
    hess = hessian_components(grid, values)
    if grid.dim == 2:
        return (hess[0] + values)[:, None]
    b11 = hess[0] + values
    b12 = hess[1]
    b22 = hess[2] + values
    mid = 0.5 * (b11 + b22)
    disc = np.sqrt(np.maximum(0.25 * (b11 - b22) ** 2 + b12 * b12, 0.0))
    return np.column_stack([mid - disc, mid + disc])


def _det_b(body: ConvexBody) -> np.ndarray:
    radii = principal_radii(body)
    return radii.prod(axis=1)


def gauss_curvature(body: ConvexBody) -> ScalarField:
    """Gauss curvature 1/det(b)."""
    det = _det_b(body)
    if det.min() <= 0.0:
        raise InvalidBodyError(
            "non-positive curvature determinant: body is not discretely convex"
        )
    return ScalarField(body.grid, 1.0 / det)


def mean_curvature(body: ConvexBody) -> ScalarField:
    """Sum of principal curvatures (reciprocal radii)."""
    radii = principal_radii(body)
    if radii[:, 0].min() <= 0.0:
        raise InvalidBodyError("non-positive principal radius")
    return ScalarField(body.grid, (1.0 / radii).sum(axis=1))


@dataclass(frozen=True)
class CurvatureReport:
    K: ScalarField
    principal_radii: np.ndarray
    mean_curvature: ScalarField


def curvature_report(body: ConvexBody) -> CurvatureReport:
    return CurvatureReport(
        K=gauss_curvature(body),
        principal_radii=principal_radii(body),
        mean_curvature=mean_curvature(body),
    )


def integral_curvature_density(body: ConvexBody) -> ScalarField:
    """Density h det(b)/r^n of the body's curvature measure, per node.

    At node x this equals the Jacobian of the normal-to-ray direction
    map, so integrating it over any normal-direction set measures the
    corresponding set of rays.
    """
    r = radial_norm_field(body).values
    density = body.h.values * _det_b(body) / r**body.grid.dim
    return ScalarField(body.grid, density)


def orlicz_density(body: ConvexBody, phi: PhiModel) -> ScalarField:
    """Weighted density phi(1/h) * h det(b)/r^n."""
    base = integral_curvature_density(body)
    weight = phi.eval(1.0 / body.h.values)
    return ScalarField(body.grid, weight * base.values)


def total_integral_curvature(body: ConvexBody) -> float:
    """Total mass of the curvature measure: the full sphere measure."""
    return integrate(body.grid, integral_curvature_density(body).values)


def radial_gauss_image_measure(body: ConvexBody, arc) -> float:
    """Measure of a ray-direction arc: length of its image normal arc.

    ``arc`` is a pair of angles (a, b), the counterclockwise interval of
    ray directions from a to b.  The image endpoints come from the
    refined normal-direction lookup; the map is a monotone degree-one
    circle map, so endpoint angles determine the image length.  Only the
    planar case supports this measure directly.
    """
    if body.grid.dim != 2:
        raise UnsupportedDimensionError(
            "arc measures are defined for planar bodies only"
        )
    a, b = float(arc[0]), float(arc[1])
    span = (b - a) % (2.0 * np.pi)
    if span == 0.0:
        return 0.0 if b == a else 2.0 * np.pi
    ends = np.array([[np.cos(a), np.sin(a)], [np.cos(b), np.sin(b)]])
    normals = reverse_radial_gauss(body, ends)
    image_a = np.arctan2(normals[0, 1], normals[0, 0])
    image_b = np.arctan2(normals[1, 1], normals[1, 0])
    return float((image_b - image_a) % (2.0 * np.pi))


def write_curvature_csv(path, body: ConvexBody) -> None:
    """Per-node curvature table.

    Columns: node_index, theta, [phi,] h, K, radius_1, [radius_2,]
    density, where density is the curvature-measure density.
    """
    grid = body.grid
    report = curvature_report(body)
    density = integral_curvature_density(body).values
    with open(path, "w") as fh:
        if grid.dim == 2:
            fh.write("node_index,theta,h,K,radius_1,density\n")
            cols = (grid.theta, body.h.values, report.K.values,
                    report.principal_radii[:, 0], density)
        else:
            fh.write("node_index,theta,phi,h,K,radius_1,radius_2,density\n")
            cols = (grid.theta, grid.phi, body.h.values, report.K.values,
                    report.principal_radii[:, 0], report.principal_radii[:, 1],
                    density)
        for idx, row in enumerate(zip(*cols)):
            fh.write(str(idx) + "," + ",".join(f"{v:.17g}" for v in row) + "\n")


# polar-body route to the same arc measure, used by the oracle battery:
# the image length of an arc equals the quadrature of the polar body's
# curvature density over the arc's own nodes.
def arc_density_quadrature(body: ConvexBody, arc) -> float:
    """Quadrature form of radial_gauss_image_measure via the polar body."""
    if body.grid.dim != 2:
        raise UnsupportedDimensionError(
            "arc measures are defined for planar bodies only"
        )
    grid = body.grid
    density = integral_curvature_density(polar_body(body)).values
    a, b = float(arc[0]), float(arc[1])
    span = (b - a) % (2.0 * np.pi)
    if span == 0.0 and b != a:
        span = 2.0 * np.pi
    # cell k covers [theta_k - d/2, theta_k + d/2); weight by its overlap
    # with the arc, including the two pieces of cells cut by the wrap point
    d = grid.spacing[0]
    offsets = (grid.theta - a) % (2.0 * np.pi)
    overlap = np.clip(offsets + 0.5 * d, 0.0, span) - np.clip(
        offsets - 0.5 * d, 0.0, span
    )
    wrap_hi = np.clip(offsets + 0.5 * d - 2.0 * np.pi, 0.0, span)
    wrap_lo = np.clip(span - (2.0 * np.pi - 0.5 * d + offsets), 0.0, d)
    return float(np.sum(density * (overlap + wrap_hi + wrap_lo)))
