"""Command-line interface: ``mnlab <subcommand> ...``.

Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import continuation, export, svgplot
from .core import PI2, ProblemParams, Symmetry
from .errors import DomainError, LandscapeError, MNLabError, NoSolutionError, NumericalError
from .quadrature import QuadratureConfig
from .shooting import FlowConfig
from .solvers import (find_all_positive, matching_to_solution, phi_landscape, reflect,
                      solve_matching, solve_symmetric)
from .timemaps import HALF_PI, phi

logger = logging.getLogger("mnlab")

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3


class UsageError(Exception):
    """Invalid command-line input detected after parsing."""


def _floats(text: str) -> list[float]:
    """Parse ``a,b,c`` or ``start:stop:count`` (inclusive linspace)."""
    try:
        if ":" in text:
            a, b, n = text.split(":")
            return [float(v) for v in np.linspace(float(a), float(b), int(n))]
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number list: {text!r}") from None


def _positive(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _globals(parser: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    g = parser.add_argument_group("global options")
    g.add_argument("--tol-quad", type=_positive, default=d(1e-12), help="quadrature tolerance")
    g.add_argument("--tol-rk", type=_positive, default=d(1e-11), help="ODE integrator tolerance")
    g.add_argument("--format", choices=("csv", "json"), default=d("csv"), help="table format")
    g.add_argument("--out", type=Path, default=d(Path(".")), help="output directory")
    g.add_argument("--plot", action="store_true", default=d(False), help="also write SVG plots")
    g.add_argument("-v", "--verbose", action="count", default=d(0))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mnlab", description="Positive solutions of the "
                                 "indefinite-weight Dirichlet problem -u'' = lam u + a_h(x) u^p.")
    _globals(ap, suppress=False)
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name: str, help_: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_)
        _globals(p, suppress=True)
        return p

    s = add("solve", "solve at one parameter point")
    s.add_argument("--lambda", dest="lam", type=float, required=True)
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--h", type=float, help="window width (not used with --match)")
    s.add_argument("--all", action="store_true", help="scan for every positive solution")
    s.add_argument("--n-scan", type=int, default=400)
    s.add_argument("--match", action="store_true", help="asymmetric pair from the angle landscape")
    s.add_argument("--R", type=float, help="amplitude for --match")
    s.add_argument("--epsilon", type=float)

    s = add("sweep", "symmetric (and asymmetric) branch over a lambda grid")
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--h", type=float, required=True)
    s.add_argument("--lambda", dest="lam", type=_floats, required=True,
                   help="comma list or start:stop:count")
    s.add_argument("--symmetric-only", action="store_true")
    s.add_argument("--workers", type=int)

    s = add("blowup", "symmetric solution values as h approaches 1")
    s.add_argument("--lambda", dest="lam", type=float, required=True)
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--h", type=_floats, required=True)
    s.add_argument("--probes", type=_floats, default=[0.25, 0.5, 0.75])

    s = add("sequence", "metasolution sequence of fixed amplitude")
    s.add_argument("--alpha", type=float, required=True)
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--n", type=int, required=True)

    s = add("landscape", "phi(R, theta) curves and their critical points")
    s.add_argument("--lambda", dest="lam", type=float, required=True)
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--R", type=_floats, required=True)
    s.add_argument("--epsilon", type=float)
    s.add_argument("--n-theta", type=int, default=401)

    s = add("pitchfork", "empirical onset of the asymmetric pair")
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--h", type=float, required=True)
    s.add_argument("--lambda-lo", type=float, required=True)
    s.add_argument("--lambda-hi", type=float, required=True)
    s.add_argument("--resolution", type=_positive, default=1e-3)
    return ap


# ---------------------------------------------------------------- commands


def _configs(args) -> tuple[QuadratureConfig, FlowConfig]:
    return (QuadratureConfig(abs_tol=args.tol_quad, rel_tol=args.tol_quad),
            FlowConfig(rk_abs_tol=args.tol_rk, rk_rel_tol=args.tol_rk))


def _params(lam: float, p: float, h: float | None) -> ProblemParams:
    if h is None:
        raise UsageError("--h is required")
    try:
        params = ProblemParams(lam, p, h)
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    if not lam < PI2:
        raise UsageError(f"lambda must be below pi^2 = {PI2!r} (no positive solution), got {lam!r}")
    return params


def _emit_solutions(args, sols, stem: str = "solutions", extra: dict | None = None) -> None:
    out: Path = args.out
    rows, records = [], []
    for k, sol in enumerate(sols):
        ref = f"{stem}_{k}_trajectory.csv"
        export.write_trajectory(out / ref, sol)
        rows.append(export.solution_row(sol, ref))
        records.append(export.solution_record(sol, ref))
        if args.plot:
            svgplot.save(out / f"{stem}_{k}_phase.svg", svgplot.phase_series(sol),
                         f"phase plane, v0={sol.v0:.6g} ({sol.symmetry.value})", "u", "v")
        flag = "  WARN" if records[-1]["residuals"]["warn"] else ""
        print(f"{sol.symmetry.value:17s} v0={sol.v0:.12g} r_max={sol.r_max:.12g} "
              f"x_max={sol.x_max:.6f} res=({sol.shoot_residual:.1e}, {sol.fixed_point_residual:.1e}){flag}")
    if args.format == "json":
        payload = {"solutions": records}
        if extra:
            payload.update(extra)
        export.write_json(out / f"{stem}.json", payload)
    else:
        export.write_csv(out / f"{stem}.csv", export.SOLUTION_COLUMNS, rows)


def cmd_solve(args) -> int:
    quad, flow = _configs(args)
    if args.match:
        if args.R is None:
            raise UsageError("--match requires --R")
        if not 0.25 * PI2 < args.lam < PI2:
            raise UsageError("--match requires pi^2/4 < lambda < pi^2")
        m = solve_matching(args.lam, args.p, args.R, args.epsilon, quad, flow, reconstruct=False)
        sol = matching_to_solution(m, flow=flow)
        print(f"matching: theta0={m.theta0:.12g} theta1={m.theta1:.12g} h={m.h:.12g} "
              f"s_hat={m.s_hat:.12g} defect={m.matching_residual:.1e}")
        extra = {"matching": {"R": m.R, "theta0": m.theta0, "theta1": m.theta1, "h": m.h,
                              "s_hat": m.s_hat, "matching_residual": m.matching_residual}}
        _emit_solutions(args, [sol, reflect(sol)], extra=extra)
        return EXIT_OK
    params = _params(args.lam, args.p, args.h)
    if args.all:
        if args.n_scan < 100:
            raise UsageError("--n-scan must be at least 100")
        sols = find_all_positive(params, n_scan=args.n_scan, quad=quad, flow=flow)
        extra = {}
        if 0.0 < params.lam <= 0.25 * PI2:
            extra["note"] = "exploratory: asymmetric search by scan only in this lambda range"
        if not sols:
            print("no positive solution found")
    else:
        sols = [solve_symmetric(params, quad, flow)]
        extra = None
    _emit_solutions(args, sols, extra=extra)
    return EXIT_OK


def cmd_sweep(args) -> int:
    quad, flow = _configs(args)
    grid = args.lam
    if not grid:
        raise UsageError("empty lambda grid")
    if max(grid) >= PI2:
        raise UsageError(f"every lambda must be below pi^2 = {PI2!r}")
    _params(min(grid), args.p, args.h)
    res = continuation.sweep_lambda(args.p, args.h, grid, asymmetric=not args.symmetric_only,
                                    quad=quad, flow=flow, workers=args.workers)
    header = ("lambda", "h", "r_max", "v0", "symmetry", "shoot_residual", "fixed_point_residual", "warn")
    rows = [[b.lam, b.h, b.r_max, b.v0, b.symmetry.value, b.shoot_residual, b.fixed_point_residual,
             not b.verified] for b in res]
    extra = {"failures": [{"lambda": f.lam, "h": f.h, "reason": f.reason} for f in res.failures]}
    export.write_table(args.out / "branch", header, rows, args.format, extra)
    for f in res.failures:
        print(f"failed at lambda={f.lam!r}: {f.reason}", file=sys.stderr)
    print(f"{len(res)} branch points, {len(res.failures)} failures")
    if args.plot:
        series = []
        for sym, color in ((Symmetry.SYMMETRIC, svgplot.PALETTE[0]),
                           (Symmetry.ASYMMETRIC_LEFT, svgplot.PALETTE[1])):
            pts = [b for b in res if (b.symmetry is Symmetry.SYMMETRIC) == (sym is Symmetry.SYMMETRIC)]
            if pts:
                series.append(svgplot.Series(np.array([b.lam for b in pts]), np.array([b.r_max for b in pts]),
                                             "symmetric" if sym is Symmetry.SYMMETRIC else "asymmetric",
                                             color, markers=True))
        svgplot.save(args.out / "branch.svg", series, f"branch, p={args.p:g}, h={args.h:g}",
                     "lambda", "sup norm")
    return EXIT_OK


def cmd_blowup(args) -> int:
    quad, flow = _configs(args)
    if not args.lam < PI2:
        raise UsageError(f"lambda must be below pi^2 = {PI2!r}")
    try:
        tab = continuation.blowup_study(args.lam, args.p, args.h, args.probes, quad, flow)
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    header = ["h", "r_max"] + [f"u(x={export.fmt(x)})" for x in tab.x_probes]
    rows = [[h, r] + list(map(float, vals)) for h, r, vals in zip(tab.h_grid, tab.r_max, tab.values)]
    export.write_table(args.out / "blowup", header, rows, args.format,
                       {"failure": tab.failure} if args.format == "json" else None)
    if tab.failure:
        print(f"stopped: {tab.failure}", file=sys.stderr)
    for r in rows:
        print("  ".join(f"{v:.10g}" for v in r))
    if args.plot:
        series = [svgplot.Series(np.array(tab.h_grid), tab.values[:, j], f"x={x:g}",
                                 svgplot.PALETTE[j % len(svgplot.PALETTE)], markers=True)
                  for j, x in enumerate(tab.x_probes)]
        svgplot.save(args.out / "blowup.svg", series, f"u_h at probes, lambda={args.lam:g}", "h", "u_h(x)")
    return EXIT_OK if tab.failure is None else EXIT_NUMERIC


def cmd_sequence(args) -> int:
    quad, flow = _configs(args)
    if not args.alpha > 0 or args.n < 1:
        raise UsageError("need alpha > 0 and n >= 1")
    rows_ = continuation.metasolution_sequence(args.alpha, args.p, args.n, quad, flow)
    rows = [[r.n, r.h, r.lam, r.r_max, r.sup_error] for r in rows_]
    export.write_table(args.out / "sequence", ("n", "h", "lambda", "r_max", "sup_error"), rows, args.format)
    for r in rows:
        print(f"n={r[0]} h={r[1]:.12g} lambda={r[2]:.15g} r_max={r[3]:.12g} sup_error={r[4]:.3e}")
    if args.plot and rows:
        svgplot.save(args.out / "sequence.svg",
                     [svgplot.Series(np.array([r[0] for r in rows], dtype=float),
                                     np.log10(np.array([r[4] for r in rows])), "log10 sup error",
                                     svgplot.PALETTE[0], markers=True)],
                     f"distance to alpha sin(pi x), alpha={args.alpha:g}", "n", "log10 error")
    return EXIT_OK if len(rows) == args.n else EXIT_NUMERIC


def cmd_landscape(args) -> int:
    quad, _ = _configs(args)
    if not args.lam > 0:
        raise UsageError("landscape requires lambda > 0")
    if any(R <= 0 for R in args.R) or not args.R:
        raise UsageError("--R values must be positive")
    if args.n_theta < 3:
        raise UsageError("--n-theta must be at least 3")
    thetas = np.linspace(0.0, HALF_PI, args.n_theta)
    curve_rows, summary, series = [], [], []
    for k, R in enumerate(args.R):
        vals = np.array([phi(R, float(t), args.lam, args.p, quad) for t in thetas])
        curve_rows.extend([R, float(t), float(v)] for t, v in zip(thetas, vals))
        series.append(svgplot.Series(thetas, vals, f"R={R:g}", svgplot.PALETTE[k % len(svgplot.PALETTE)]))
        try:
            ls = phi_landscape(R, args.lam, args.p, args.epsilon, quad)
            summary.append([R, ls.epsilon, ls.theta_m, ls.phi_m, ls.theta_M, ls.phi_M, ls.theta_bar, ""])
            print(f"R={R:g}: theta_m={ls.theta_m:.10g} phi_m={ls.phi_m:.10g} "
                  f"theta_M={ls.theta_M:.10g} phi_M={ls.phi_M:.10g} theta_bar={ls.theta_bar:.10g}")
        except LandscapeError as exc:
            nan = math.nan
            summary.append([R, args.epsilon if args.epsilon is not None else nan,
                            nan, nan, nan, nan, nan, str(exc)])
            print(f"R={R:g}: no landscape ({exc})")
    export.write_table(args.out / "landscape", ("R", "theta", "phi"), curve_rows, args.format)
    export.write_table(args.out / "landscape_summary",
                       ("R", "epsilon", "theta_m", "phi_m", "theta_M", "phi_M", "theta_bar", "error"),
                       summary, args.format)
    if args.plot:
        svgplot.save(args.out / "landscape.svg", series, f"phi(R, theta), lambda={args.lam:g}, p={args.p:g}",
                     "theta", "phi")
    return EXIT_OK


def cmd_pitchfork(args) -> int:
    quad, flow = _configs(args)
    _params(args.lambda_hi, args.p, args.h)
    if not args.lambda_lo < args.lambda_hi:
        raise UsageError("need --lambda-lo < --lambda-hi")
    est = continuation.estimate_pitchfork(args.p, args.h, args.lambda_lo, args.lambda_hi,
                                          args.resolution, quad=quad, flow=flow)
    export.write_table(args.out / "pitchfork", ("p", "h", "estimate", "lower", "upper", "kind"),
                       [[args.p, args.h, est.value, est.lower, est.upper, est.kind]], args.format)
    print(f"pitchfork estimate (empirical): {est.value:.6g} in [{est.lower:.6g}, {est.upper:.6g}]")
    return EXIT_OK


COMMANDS = {"solve": cmd_solve, "sweep": cmd_sweep, "blowup": cmd_blowup,
            "sequence": cmd_sequence, "landscape": cmd_landscape, "pitchfork": cmd_pitchfork}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](args)
    except (UsageError, DomainError, NoSolutionError) as exc:
        print(f"mnlab {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalError, LandscapeError, MNLabError) as exc:
        print(f"mnlab {args.command}: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
