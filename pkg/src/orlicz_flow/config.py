"""Run configuration: flat key=value files turned into solver objects.

A config file holds one `section.key=value` pair per line; `#` starts a
comment.  The recognized keys cover the grid, the density g (constant,
truncated harmonic series, or node-value file), the weight phi, the
initial body, the flow controls, and output options.  Unknown keys are
rejected so typos fail loudly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .convex_geometry import (
    ConvexBody,
    ball_body,
    ellipse_body,
    load_body,
    load_field_file,
    offset_ball_body,
)
from .errors import ConfigError, OrliczFlowError
from .flow import FlowConfig
from .orlicz_model import PhiModel, power_phi, reciprocal_phi, tabulated_phi
from .sphere_grid import DensityField, SphereGrid, build_grid

__all__ = ["RunConfig", "parse_config_text", "load_config", "build_run_config"]

_KNOWN_KEYS = {
    "grid.n",
    "grid.resolution",
    "g.kind",
    "g.value",
    "g.a0",
    "g.cos",
    "g.sin",
    "g.file",
    "phi.kind",
    "phi.p",
    "phi.table",
    "initial_body.kind",
    "initial_body.radius",
    "initial_body.a",
    "initial_body.b",
    "initial_body.center",
    "initial_body.file",
    "flow.mode",
    "flow.dt_init",
    "flow.dt_min",
    "flow.shrink_factor",
    "flow.step_cap",
    "flow.tol_speed",
    "flow.tol_residual",
    "flow.max_steps",
    "output.dir",
    "output.stride",
    "uniqueness.tol",
}


@dataclass(frozen=True)
class RunConfig:
    grid: SphereGrid
    g: DensityField
    phi: PhiModel
    initial_body: ConvexBody
    flow: FlowConfig
    out_dir: str
    stride: int
    tol_uniqueness: float


def parse_config_text(text: str) -> dict:
    pairs = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _KNOWN_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in pairs:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        if not value:
            raise ConfigError(f"line {lineno}: empty value for {key!r}")
        pairs[key] = value
    return pairs


def _get(pairs, key, cast, default=None, required=False):
    if key not in pairs:
        if required:
            raise ConfigError(f"missing required key {key!r}")
        return default
    try:
        return cast(pairs[key])
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad value for {key!r}: {pairs[key]!r}") from exc


def _float_list(text: str):
    return [float(part) for part in text.split(",") if part.strip()]


def _synthesize_harmonic(grid: SphereGrid, a0, cos_coeffs, sin_coeffs):
    """g(theta) = a0 + sum a_k cos(k theta) + sum b_k sin(k theta).

    On the sphere only the cosine series is allowed: it is a polynomial
    in cos(theta) and stays smooth at the poles, sine terms do not.
    """
    if grid.dim == 3 and sin_coeffs:
        raise ConfigError("g.sin is not available on the sphere (pole smoothness)")

    def series(theta):
        total = np.full_like(theta, a0)
        for k, a in enumerate(cos_coeffs, start=1):
            total += a * np.cos(k * theta)
        for k, b in enumerate(sin_coeffs, start=1):
            total += b * np.sin(k * theta)
        return total

    # positivity is checked on a 4x oversampled angle grid, not just nodes
    if grid.dim == 2:
        fine = np.linspace(0.0, 2.0 * np.pi, 4 * grid.resolution, endpoint=False)
    else:
        fine = np.linspace(0.0, np.pi, 4 * grid.resolution + 1)
    if series(fine).min() <= 0.0:
        raise ConfigError("synthesized g is not strictly positive")
    return series(grid.theta)


def _build_g(pairs, grid: SphereGrid) -> DensityField:
    kind = _get(pairs, "g.kind", str, default="constant")
    if kind == "constant":
        value = _get(pairs, "g.value", float, default=1.0)
        if value <= 0.0:
            raise ConfigError("g.value must be positive")
        return DensityField(grid, np.full(grid.num_nodes, value))
    if kind == "harmonic":
        a0 = _get(pairs, "g.a0", float, required=True)
        cos_coeffs = _get(pairs, "g.cos", _float_list, default=[])
        sin_coeffs = _get(pairs, "g.sin", _float_list, default=[])
        return DensityField(grid, _synthesize_harmonic(grid, a0, cos_coeffs, sin_coeffs))
    if kind == "file":
        path = _get(pairs, "g.file", str, required=True)
        try:
            file_grid, values = load_field_file(path)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read g from {path}: {exc}") from exc
        if file_grid != grid:
            raise ConfigError("g file grid does not match grid.n/grid.resolution")
        try:
            return DensityField(grid, values)
        except ValueError as exc:
            raise ConfigError(f"g from {path} is invalid: {exc}") from exc
    raise ConfigError(f"g.kind must be constant/harmonic/file, got {kind!r}")


def _build_phi(pairs) -> PhiModel:
    kind = _get(pairs, "phi.kind", str, default="reciprocal")
    if kind == "reciprocal":
        return reciprocal_phi()
    if kind == "power":
        return power_phi(_get(pairs, "phi.p", float, required=True))
    if kind in ("tabulated", "custom"):
        # a config file cannot carry code, so `custom` means table-backed
        path = _get(pairs, "phi.table", str, required=True)
        try:
            rows = np.loadtxt(path, ndmin=2)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read phi table {path}: {exc}") from exc
        if rows.shape[1] != 2:
            raise ConfigError("phi table needs two columns: t value")
        try:
            return tabulated_phi(rows[:, 0], rows[:, 1])
        except OrliczFlowError as exc:
            raise ConfigError(f"bad phi table {path}: {exc}") from exc
    raise ConfigError(
        f"phi.kind must be power/reciprocal/tabulated/custom, got {kind!r}"
    )


def _build_body(pairs, grid: SphereGrid) -> ConvexBody:
    kind = _get(pairs, "initial_body.kind", str, default="ball")
    try:
        if kind == "ball":
            return ball_body(grid, _get(pairs, "initial_body.radius", float, default=1.0))
        if kind == "ellipse":
            return ellipse_body(
                grid,
                _get(pairs, "initial_body.a", float, required=True),
                _get(pairs, "initial_body.b", float, required=True),
            )
        if kind == "offset_ball":
            center = _get(pairs, "initial_body.center", _float_list, required=True)
            return offset_ball_body(
                grid,
                _get(pairs, "initial_body.radius", float, default=1.0),
                center,
            )
        if kind == "file":
            path = _get(pairs, "initial_body.file", str, required=True)
            body = load_body(path)
            if body.grid != grid:
                raise ConfigError("body file grid does not match grid.n/grid.resolution")
            return body
    except ConfigError:
        raise
    except (OSError, OrliczFlowError, ValueError) as exc:
        raise ConfigError(f"cannot build initial body: {exc}") from exc
    raise ConfigError(
        f"initial_body.kind must be ball/ellipse/offset_ball/file, got {kind!r}"
    )


def build_run_config(pairs: dict) -> RunConfig:
    n = _get(pairs, "grid.n", int, required=True)
    resolution = _get(pairs, "grid.resolution", int, required=True)
    try:
        grid = build_grid(n, resolution)
    except OrliczFlowError as exc:
        raise ConfigError(str(exc)) from exc
    g = _build_g(pairs, grid)
    phi = _build_phi(pairs)
    body = _build_body(pairs, grid)
    try:
        flow_cfg = FlowConfig(
            mode=_get(pairs, "flow.mode", str, default="radial"),
            dt_init=_get(pairs, "flow.dt_init", float, default=1e-4),
            dt_min=_get(pairs, "flow.dt_min", float, default=1e-12),
            shrink_factor=_get(pairs, "flow.shrink_factor", float, default=0.5),
            step_cap=_get(pairs, "flow.step_cap", float, default=0.05),
            tol_speed=_get(pairs, "flow.tol_speed", float, default=1e-6),
            tol_residual=_get(pairs, "flow.tol_residual", float, default=1e-6),
            max_steps=_get(pairs, "flow.max_steps", int, default=500_000),
        )
    except ConfigError:
        raise
    stride = _get(pairs, "output.stride", int, default=100)
    if stride < 1:
        raise ConfigError("output.stride must be at least 1")
    tol_uni = _get(pairs, "uniqueness.tol", float, default=1e-3)
    if tol_uni <= 0.0:
        raise ConfigError("uniqueness.tol must be positive")
    return RunConfig(
        grid=grid,
        g=g,
        phi=phi,
        initial_body=body,
        flow=flow_cfg,
        out_dir=_get(pairs, "output.dir", str, default="out"),
        stride=stride,
        tol_uniqueness=tol_uni,
    )


def load_config(path) -> RunConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return build_run_config(parse_config_text(text))
