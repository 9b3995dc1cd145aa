"""Command line driver.

Four subcommands: `check` reports solvability and uniqueness verdicts
for the configured (g, phi); `solve` runs the flow and writes artifacts;
`uniqueness` flows several initial bodies to their limits and compares
them; `oracle` runs the internal consistency battery on the configured
body.

Exit codes partition outcomes: 0 success/converged, 1 precondition
failed or not converged or an oracle FAIL, 2 config error, 3 flow
failure (convexity lost or step size underflow).
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .config import RunConfig, load_config
from .convex_geometry import (
    ball_body,
    ellipse_body,
    jac_normal_to_ray,
    jac_ray_to_normal,
    load_body,
    offset_ball_body,
    polar_body,
    save_body,
)
from .curvature import (
    arc_density_quadrature,
    radial_gauss_image_measure,
    total_integral_curvature,
)
from .errors import ConfigError, OrliczFlowError
from .flow import (
    dual_flow_residual,
    euler_pair,
    functional_F,
    functional_F_direct,
    radial_speed_check,
    run,
    support_bounds_from_phi,
    write_plot_series,
    write_trace_csv,
)
from .orlicz_model import check_solvability, check_uniqueness_condition

__all__ = ["main"]


def _cmd_check(cfg: RunConfig) -> int:
    solv = check_solvability(cfg.phi, cfg.g)
    print(f"g range: [{solv.g_min:.6g}, {solv.g_max:.6g}]")
    print(
        f"phi limits: t->0 {solv.limit_at_zero:.6g}, "
        f"t->inf {solv.limit_at_infinity:.6g}"
    )
    print(
        f"solvability margins: at infinity {solv.margin_at_infinity:.6g}, "
        f"at zero {solv.margin_at_zero:.6g}"
    )
    print(f"solvability: {'PASS' if solv.passed else 'FAIL'}")
    if solv.passed:
        low, high = support_bounds_from_phi(cfg.phi, solv.g_min, solv.g_max)
        print(f"a-priori support band: [{low:.6g}, {high:.6g}]")
    uni = check_uniqueness_condition(cfg.phi)
    if uni.holds:
        print("uniqueness condition: holds")
    else:
        c, s = uni.witness
        print(f"uniqueness condition: violated (witness c={c:.6g}, s={s:.6g})")
    return 0 if solv.passed else 1


def _write_summary(path, trace) -> None:
    final = trace.states[-1]
    with open(path, "w") as fh:
        fh.write(f"termination={trace.termination}\n")
        fh.write(f"steps={trace.accepted_steps}\n")
        fh.write(f"rejected_steps={trace.rejected_steps}\n")
        fh.write(f"t_final={final.t:.17g}\n")
        fh.write(f"F_final={final.F:.17g}\n")
        fh.write(f"residual_max={final.residual_max:.17g}\n")


def _cmd_solve(cfg: RunConfig, out_dir: str | None) -> int:
    out = out_dir if out_dir is not None else cfg.out_dir
    os.makedirs(out, exist_ok=True)
    trace = run(cfg.initial_body, cfg.g, cfg.phi, cfg.flow, trace_stride=cfg.stride)
    final = trace.states[-1]
    save_body(final.body, os.path.join(out, "body_final.txt"))
    write_trace_csv(trace, os.path.join(out, "trace.csv"))
    write_plot_series(
        trace,
        os.path.join(out, "series_F.txt"),
        os.path.join(out, "series_residual.txt"),
    )
    _write_summary(os.path.join(out, "summary.txt"), trace)
    print(
        f"termination={trace.termination} steps={trace.accepted_steps} "
        f"t={final.t:.6g} F={final.F:.9g} residual={final.residual_max:.3e}"
    )
    if trace.termination == "converged":
        return 0
    if trace.termination == "max_steps":
        print("flow did not converge within flow.max_steps", file=sys.stderr)
        return 1
    print(f"flow failed: {trace.termination}", file=sys.stderr)
    return 3


def _parse_body_spec(spec: str, grid):
    parts = spec.split(":")
    kind, args = parts[0], parts[1:]
    try:
        if kind == "ball":
            (radius,) = args or ["1"]
            return ball_body(grid, float(radius))
        if kind == "ellipse":
            a, b = args
            return ellipse_body(grid, float(a), float(b))
        if kind == "offset_ball":
            radius, *center = args
            if len(center) != grid.dim:
                raise ValueError(f"center needs {grid.dim} components")
            return offset_ball_body(grid, float(radius), [float(c) for c in center])
        if kind == "file":
            (path,) = args
            body = load_body(path)
            if body.grid != grid:
                raise ValueError("body file grid does not match the config grid")
            return body
    except (ValueError, OSError, OrliczFlowError) as exc:
        raise ConfigError(f"bad body spec {spec!r}: {exc}") from exc
    raise ConfigError(f"unknown body kind in spec {spec!r}")


def _cmd_uniqueness(cfg: RunConfig, body_specs: str) -> int:
    uni = check_uniqueness_condition(cfg.phi)
    if not uni.holds:
        c, s = uni.witness
        print(
            "uniqueness condition violated "
            f"(witness c={c:.6g}, s={s:.6g}); refusing to compare limits",
            file=sys.stderr,
        )
        return 1
    specs = [s for s in body_specs.split(",") if s.strip()]
    if len(specs) < 2:
        print("need at least two initial bodies to compare", file=sys.stderr)
        return 1
    bodies = [_parse_body_spec(spec, cfg.grid) for spec in specs]
    limits = []
    for spec, body in zip(specs, bodies):
        trace = run(body, cfg.g, cfg.phi, cfg.flow, trace_stride=cfg.stride)
        if trace.termination != "converged":
            print(f"run from {spec!r} ended with {trace.termination}", file=sys.stderr)
            return 3 if trace.termination in ("convexity_lost", "dt_underflow") else 1
        limits.append(trace.states[-1].body.h.values)
        print(f"run from {spec!r}: converged in {trace.accepted_steps} steps")
    worst = 0.0
    for i in range(len(limits)):
        for j in range(i + 1, len(limits)):
            dist = float(np.max(np.abs(limits[i] - limits[j])))
            worst = max(worst, dist)
            print(f"sup distance {specs[i]!r} vs {specs[j]!r}: {dist:.3e}")
    ok = worst <= cfg.tol_uniqueness
    print(
        f"uniqueness {'PASS' if ok else 'FAIL'}: "
        f"worst {worst:.3e} vs tol {cfg.tol_uniqueness:.3e}"
    )
    return 0 if ok else 1


def _check_line(label: str, measured: float, tol: float) -> bool:
    ok = measured <= tol
    print(f"{'PASS' if ok else 'FAIL'} {label}: {measured:.3e} (tol {tol:.0e})")
    return ok


def _cmd_oracle(cfg: RunConfig) -> int:
    body, g, phi = cfg.initial_body, cfg.g, cfg.phi
    grid = body.grid
    results = []

    jac_fwd = jac_ray_to_normal(body).values
    jac_bwd = jac_normal_to_ray(body).values
    results.append(
        _check_line(
            "jacobian reciprocity", float(np.max(np.abs(jac_fwd * jac_bwd - 1.0))), 1e-10
        )
    )

    # the total is exact in the continuum; the finite-difference error
    # constant depends on the body, so the diagnostic threshold scales
    # with the grid spacing
    sphere_area = float(np.sum(grid.weights))
    total = total_integral_curvature(body)
    results.append(
        _check_line(
            "total integral curvature",
            abs(total - sphere_area),
            10.0 * grid.spacing[0] ** 2,
        )
    )

    bipolar = polar_body(polar_body(body))
    results.append(
        _check_line(
            "bipolar round trip",
            float(np.max(np.abs(bipolar.h.values - body.h.values))),
            1e-3,
        )
    )

    if grid.dim == 2:
        f_table = functional_F(body, g, phi)
        f_direct = functional_F_direct(body, g, phi)
        results.append(_check_line("functional two-route", abs(f_table - f_direct), 5e-3))

        rng = np.random.default_rng(7)
        worst = 0.0
        for _ in range(4):
            a = float(rng.uniform(0.0, 2.0 * np.pi))
            span = float(rng.uniform(0.3, 2.0))
            arc = (a, a + span)
            measure = radial_gauss_image_measure(body, arc)
            quad = arc_density_quadrature(body, arc)
            worst = max(worst, abs(measure - quad))
        results.append(_check_line("patch measure two-route", worst, 5e-3))

    state_a, state_b = euler_pair(body, g, phi, mode=cfg.flow.mode, dt=1e-4)
    results.append(
        _check_line("radial speed identity", radial_speed_check(state_a, state_b), 5e-3)
    )
    results.append(
        _check_line(
            "dual flow residual", dual_flow_residual(state_a, state_b, g, phi), 1e-2
        )
    )
    return 0 if all(results) else 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="orlicz-flow",
        description="Curvature flow solver for weighted Monge-Ampere equations "
        "on the sphere",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("check", "report solvability and uniqueness verdicts"),
        ("solve", "run the flow and write artifacts"),
        ("uniqueness", "compare flow limits from several initial bodies"),
        ("oracle", "run the internal consistency battery"),
    ):
        cmd = sub.add_parser(name, help=text)
        cmd.add_argument("--config", required=True, help="path to key=value config")
        if name == "solve":
            cmd.add_argument("--out", default=None, help="override output.dir")
        if name == "uniqueness":
            cmd.add_argument(
                "--bodies",
                required=True,
                help="comma list of specs: ball:R, ellipse:A:B, "
                "offset_ball:R:X:Y[:Z], file:PATH",
            )
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.command == "check":
            return _cmd_check(cfg)
        if args.command == "solve":
            return _cmd_solve(cfg, args.out)
        if args.command == "uniqueness":
            return _cmd_uniqueness(cfg, args.bodies)
        return _cmd_oracle(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OrliczFlowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
