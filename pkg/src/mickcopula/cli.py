"""Command-line interface: ``mickcopula <command> [options]``.

Commands
--------
solve      solve MICK or MICS for a ratio, or for a target tau/rho
calibrate  find the ratio that gives a target tau or rho
check      audit a copula matrix file (ratios, TP2, stationarity, Hessian)
sample     draw points from a copula matrix file
fit        observed summary of a price file plus simulated MICK/MICS summaries
table      ratio/rho/tau/information table over a grid of ratios
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .core import CopulaValidationError, read_copula_csv, write_copula_csv
from .diagnostics import (
    hessian_definiteness,
    mics_theta,
    ratio_constancy,
    stationarity_fit,
    tp2_check,
    uniqueness_advisory,
    write_window_csv,
)
from .ingest import IngestError, load_pair, load_prices, log_returns, reference_dataset_path, to_pseudo_observations
from .solver import CalibrationError, InfeasibleTargetError, SolverConfig, calibrate, solve_mick, solve_mics
from .stats import sample, simulate_summary, summarize, write_points

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_CONVERGENCE = 3
EXIT_IO = 4

EXIT_HELP = """\
exit status:
  0  success
  2  invalid arguments or input data (bad matrix, infeasible target)
  3  solver or calibration did not converge
  4  file could not be read or written
"""

MICK_GRID = (0.3, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0)
MICS_GRID = (0.001, 0.002, 0.003, 0.004, 0.005, 0.006, 0.007, 0.008, 0.009,
             0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08, 0.09)


class ConvergenceFailure(Exception):
    pass


def _emit(args, payload: dict, text: str | None = None) -> None:
    if args.format == "json":
        print(json.dumps(payload, indent=2, default=_json_default))
    else:
        print(text if text is not None else _as_text(payload))


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not serializable: {type(obj).__name__}")


def _as_text(payload: dict, indent: str = "") -> str:
    lines = []
    for k, v in payload.items():
        if isinstance(v, dict):
            lines.append(f"{indent}{k}:")
            lines.append(_as_text(v, indent + "  "))
        elif isinstance(v, float):
            lines.append(f"{indent}{k} = {v:.6g}")
        else:
            lines.append(f"{indent}{k} = {v}")
    return "\n".join(lines)


def _config(args, ratio: float) -> SolverConfig:
    return SolverConfig(ratio=ratio, max_sweeps=args.max_sweeps, tol=args.tol,
                        sweep_order=args.sweep_order, seed=args.seed)


def _target(args):
    if args.tau is not None:
        return args.tau, "kendall"
    return args.rho, "spearman"


def cmd_solve(args) -> int:
    calib = None
    if args.ratio is not None:
        solver = solve_mick if args.family == "mick" else solve_mics
        rep = solver(args.n, _config(args, args.ratio))
    else:
        target, measure = _target(args)
        calib = calibrate(args.n, target, measure, args.family, tol=args.calibration_tol,
                          config=_config(args, 0.0))
        rep = calib.report
    if args.output:
        write_copula_csv(args.output, rep.copula)
    payload = rep.to_dict()
    if calib is not None:
        payload["calibration"] = calib.to_dict()
    _emit(args, payload)
    if not rep.converged:
        raise ConvergenceFailure(f"not converged after {rep.sweeps_used} sweeps (residual {rep.final_residual:.3e})")
    return EXIT_OK


def cmd_calibrate(args) -> int:
    target, measure = _target(args)
    res = calibrate(args.n, target, measure, args.family, tol=args.calibration_tol,
                    config=_config(args, 0.0))
    if args.output:
        write_copula_csv(args.output, res.report.copula)
    _emit(args, res.to_dict())
    return EXIT_OK


def cmd_check(args) -> int:
    P = read_copula_csv(args.input)
    p = P.p
    out: dict = {"n": P.n}
    tp2 = tp2_check(P, args.mode)
    out["tp2"] = tp2.to_dict()
    positive = bool((p > 0).all())
    if not positive:
        out["note"] = "matrix has zero cells; ratio, stationarity and Hessian checks skipped"
    else:
        pseudo = ratio_constancy(P, "pseudo")
        plain = ratio_constancy(P, "plain")
        out["pseudo_ratio"] = pseudo.to_dict()
        out["plain_ratio"] = plain.to_dict()
        out["mics_theta"] = mics_theta(P)
        fit = stationarity_fit(P)
        out["stationarity"] = {"lambda": fit.lam if fit.identified else None,
                               "residual_norm": fit.residual_norm,
                               "identified": fit.identified}
        if not fit.identified:
            out["stationarity"]["note"] = "Wp is additive here; lambda is absorbed into alpha and beta"
        lam = args.lam if args.lam is not None else (fit.lam if fit.identified else 0.0)
        if P.n <= 30:
            out["hessian"] = hessian_definiteness(P, lam).to_dict()
        else:
            out["hessian"] = {"note": f"skipped for n={P.n} > 30"}
        out["uniqueness"] = uniqueness_advisory(fit.lam)
        if args.windows:
            write_window_csv(args.windows, P)
    _emit(args, out)
    return EXIT_OK


def cmd_sample(args) -> int:
    P = read_copula_csv(args.input)
    pts = sample(P, args.count, args.seed)
    if args.output:
        write_points(args.output, pts)
        _emit(args, {"count": len(pts), "seed": args.seed, "output": str(args.output)})
    else:
        w = csv.writer(sys.stdout)
        w.writerow(["u", "v"])
        for a, b in zip(pts.u, pts.v):
            w.writerow([repr(float(a)), repr(float(b))])
    return EXIT_OK


def cmd_fit(args) -> int:
    if args.input_y:
        series = load_pair(args.input, args.x, args.input_y, args.y, args.date_column)
    else:
        path = args.input or reference_dataset_path()
        series = load_prices(path, args.x, args.y, args.date_column)
    obs = to_pseudo_observations(log_returns(series), convention=args.rank_convention)
    observed = summarize(obs)
    count = args.count or len(obs)
    mick = calibrate(args.n, observed.tau, "kendall", "mick", tol=args.calibration_tol)
    mics = calibrate(args.n, observed.rho, "spearman", "mics", tol=args.calibration_tol)
    sim_k = simulate_summary(mick.report.copula, count, args.replications, args.seed)
    sim_s = simulate_summary(mics.report.copula, count, args.replications, args.seed)
    if args.output_dir:
        d = Path(args.output_dir)
        d.mkdir(parents=True, exist_ok=True)
        write_copula_csv(d / "mick.csv", mick.report.copula)
        write_copula_csv(d / "mics.csv", mics.report.copula)
        write_points(d / "observed_points.csv", obs)
        write_points(d / "mick_points.csv", sample(mick.report.copula, count, args.seed))
        write_points(d / "mics_points.csv", sample(mics.report.copula, count, args.seed))
    payload = {
        "returns": len(obs),
        "sample_count": count,
        "replications": args.replications,
        "mick_ratio": mick.ratio,
        "mics_ratio": mics.ratio,
        "observed": observed.to_dict(),
        "simulated_mick": sim_k.to_dict(),
        "simulated_mics": sim_s.to_dict(),
    }
    rows = [f"{'':<14}{'observed':>10}{'MICK':>10}{'MICS':>10}"]
    for key in observed.to_dict():
        rows.append(f"{key:<14}{getattr(observed, key):>10.3f}{getattr(sim_k, key):>10.3f}{getattr(sim_s, key):>10.3f}")
    text = "\n".join([f"returns = {len(obs)}, samples = {count} x {args.replications}",
                      f"MICK ratio = {mick.ratio:.6g}, MICS ratio = {mics.ratio:.6g}", *rows])
    _emit(args, payload, text)
    return EXIT_OK


def table_rows(family: str, n: int, ratios, config: SolverConfig | None = None):
    """Solve each ratio and return rows ``(ratio, rho, tau, information, converged)``."""
    solver = solve_mick if family == "mick" else solve_mics
    base = config or SolverConfig()
    rows = []
    for r in ratios:
        cfg = SolverConfig(r, base.max_sweeps, base.tol, base.sweep_order, base.seed,
                           base.multiscale, base.polish_patience)
        rep = solver(n, cfg)
        rows.append((float(r), rep.rho, rep.tau, rep.information, rep.converged))
    return rows


def cmd_table(args) -> int:
    ratios = args.ratios or (MICK_GRID if args.family == "mick" else MICS_GRID)
    rows = table_rows(args.family, args.n, ratios, _config(args, 0.0))
    header = ["ratio", "rho", "tau", "information"]
    if args.output:
        with Path(args.output).open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            w.writerows([[repr(v) for v in row[:4]] for row in rows])
    if args.format == "json":
        print(json.dumps([dict(zip(header + ["converged"], row)) for row in rows], indent=2))
    else:
        print(",".join(header))
        for r, rho, tau, info, _ in rows:
            print(f"{r:g},{rho:.3f},{tau:.3f},{info:.3f}")
    bad = [row[0] for row in rows if not row[4]]
    if bad:
        raise ConvergenceFailure(f"rows did not converge: {bad}")
    return EXIT_OK


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return v


def _grid_size(text: str) -> int:
    v = int(text)
    if v < 2:
        raise argparse.ArgumentTypeError(f"grid size must be at least 2, got {text}")
    return v


def _finite(text: str) -> float:
    v = float(text)
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"must be finite, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mickcopula",
        description="Minimum-information checkerboard copulas under fixed Kendall's tau or Spearman's rho.",
        epilog=EXIT_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text", help="output format (default text)")

    solver_opts = argparse.ArgumentParser(add_help=False)
    solver_opts.add_argument("--n", type=_grid_size, default=30, help="grid size (default 30)")
    solver_opts.add_argument("--tol", type=_finite, default=1e-10, help="window residual tolerance (default 1e-10)")
    solver_opts.add_argument("--max-sweeps", type=_positive_int, default=10_000, help="sweep budget (default 10000)")
    solver_opts.add_argument("--sweep-order", choices=("row-major", "random-permutation"), default="row-major")
    solver_opts.add_argument("--seed", type=int, default=None, help="seed for random sweep order")
    solver_opts.add_argument("--family", choices=("mick", "mics"), default="mick")

    def targets(p, allow_ratio):
        g = p.add_mutually_exclusive_group(required=True)
        if allow_ratio:
            g.add_argument("--ratio", type=_finite, help="pseudo log odds ratio (mick) or log odds ratio (mics)")
        g.add_argument("--tau", type=_finite, help="target Kendall's tau")
        g.add_argument("--rho", type=_finite, help="target Spearman's rho")
        p.add_argument("--calibration-tol", type=_finite, default=1e-4, help="tolerance on the achieved correlation")

    p = sub.add_parser("solve", parents=[common, solver_opts], help="solve MICK/MICS",
                       epilog=EXIT_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    targets(p, True)
    p.add_argument("--output", "-o", help="write the solved matrix as CSV")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("calibrate", parents=[common, solver_opts], help="find the ratio for a target tau/rho",
                       epilog=EXIT_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    targets(p, False)
    p.add_argument("--output", "-o", help="write the calibrated matrix as CSV")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("check", parents=[common], help="audit a copula matrix file",
                       epilog=EXIT_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("input", help="headerless n x n CSV of cell masses")
    p.add_argument("--mode", choices=("adjacent", "all-pairs"), default="adjacent", help="TP2 minors to check")
    p.add_argument("--lambda", dest="lam", type=_finite, default=None,
                   help="multiplier for the Hessian check (default: fitted)")
    p.add_argument("--windows", help="write the per-window table as CSV")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("sample", parents=[common], help="draw points from a copula matrix file",
                       epilog=EXIT_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("input", help="headerless n x n CSV of cell masses")
    p.add_argument("--count", type=_positive_int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--output", "-o", help="points CSV (default: stdout)")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("fit", parents=[common], help="observed vs simulated MICK/MICS summaries",
                       epilog=EXIT_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("input", nargs="?", help="price CSV (default: bundled synthetic fixture)")
    p.add_argument("--input-y", help="second price file, inner-joined on date")
    p.add_argument("--x", default="DJI", help="first price column (default DJI)")
    p.add_argument("--y", default="SP500", help="second price column (default SP500)")
    p.add_argument("--date-column", default="date")
    p.add_argument("--rank-convention", choices=("weibull", "mid-rank"), default="weibull")
    p.add_argument("--n", type=_grid_size, default=30)
    p.add_argument("--count", type=_positive_int, default=None, help="points per replicate (default: data length)")
    p.add_argument("--replications", type=_positive_int, default=150)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--calibration-tol", type=_finite, default=1e-4)
    p.add_argument("--output-dir", help="write matrices and point sets here")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("table", parents=[common, solver_opts], help="rho/tau/information over a ratio grid",
                       epilog=EXIT_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--ratios", type=_finite, nargs="+", help="ratio grid (default: the standard 30x30 grid)")
    p.add_argument("--output", "-o", help="write the table as CSV")
    p.set_defaults(func=cmd_table)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "fit" and args.input_y and not args.input:
        parser.error("--input-y needs an input file")
    try:
        return args.func(args)
    except InfeasibleTargetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (CalibrationError, ConvergenceFailure, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (CopulaValidationError, IngestError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
