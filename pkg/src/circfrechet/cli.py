"""Command-line interface.

Exit status is 0 on success, 1 when the library raises one of its errors
(the error label goes to standard error) and 2 for usage errors.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import __version__
from .bandwidth import BandwidthGrid, cv_bandwidth_density, cv_bandwidth_frechet, plugin_bandwidth
from .errors import CircError, DomainError, ParseError
from .frechet_lc import lc_estimate
from .frechet_ll import effective_weights, ll_estimate
from .harness import ExperimentConfig, run_rate_experiment
from .io import DatasetSchema, format_number, load_angles, load_paired_dataset, write_rows
from .kde import DensityEstimate, amise, angle_grid, density_at, h_amise, mise_empirical, score_Sf
from .kernel import get_kernel, moment_a, normalizing_c
from .metric import CircleArc, Wasserstein1D, get_space
from .models import density_from_spec

PROG = "circfrechet"


def _positive_float(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not v > 0 or not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return v


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return v


def _open_out(path):
    return sys.stdout if path in (None, "-") else open(path, "w", newline="")


def _emit_json(obj, path):
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _space(args):
    kw = {}
    if args.space == "circle" and args.grid_resolution:
        kw["grid_resolution"] = args.grid_resolution
    if args.space == "wasserstein" and args.quantiles:
        kw["size"] = args.quantiles
    if args.space == "euclidean" and args.dim:
        kw["dim"] = args.dim
    return get_space(args.space, **kw)


def _schema(args):
    cols = tuple(args.response_columns.split(",")) if args.response_columns else None
    return DatasetSchema(args.predictor_column, "degrees" if args.degrees else "radians", cols, args.delimiter)


def cmd_constants(args):
    kernel = get_kernel(args.kernel)
    rows = []
    for j in range(args.max_j + 1):
        for k in (1, 2):
            a = moment_a(kernel, j, k).value
            c = normalizing_c(kernel, args.h, j, k).value
            rows.append((j, k, a, c))
    if args.json:
        _emit_json({"kernel": kernel.label, "h": args.h,
                    "constants": [{"j": j, "k": k, "a": a, "c": c} for j, k, a, c in rows]}, args.output)
        return
    out = _open_out(args.output)
    try:
        out.write(f"# kernel={kernel.label} h={format_number(args.h)}\n")
        write_rows(out, ["j", "k", "a_jk", "c_hjk"], rows)
    finally:
        if out is not sys.stdout:
            out.close()


def cmd_density(args):
    kernel = get_kernel(args.kernel)
    sample = load_angles(args.input, args.column, args.degrees, args.delimiter)
    h = plugin_bandwidth(sample, kernel) if args.bandwidth == "plugin" else _positive_float(args.bandwidth)
    theta = angle_grid(args.grid)
    f = density_at(DensityEstimate(sample, kernel, h), theta)
    out = _open_out(args.output)
    try:
        out.write(f"# h={format_number(h)} n={len(sample)}\n")
        write_rows(out, ["angle", "density"], zip(theta.tolist(), f.tolist()))
    finally:
        if out is not sys.stdout:
            out.close()


def cmd_mise(args):
    kernel = get_kernel(args.kernel)
    model = density_from_spec(args.model)
    score = score_Sf(model)
    h = h_amise(score, kernel, args.n) if args.bandwidth == "amise" else _positive_float(args.bandwidth)
    emp = mise_empirical(model, kernel, h, args.n, args.reps, seed=args.seed, threads=args.threads)
    _emit_json({"model": model.name, "kernel": kernel.label, "n": args.n, "h": h, "reps": args.reps,
                "seed": args.seed, "mise": emp, "amise": amise(score, kernel, h, args.n),
                "score": score}, args.output)


def cmd_regress(args):
    kernel = get_kernel(args.kernel)
    space = _space(args)
    sample = load_paired_dataset(args.input, space, _schema(args))
    fit = lc_estimate if args.estimator == "lc" else ll_estimate
    queries = angle_grid(args.query_grid)
    header = ["angle"]
    if isinstance(space, Wasserstein1D):
        header += [f"q{k + 1}" for k in range(space.size)]
    elif getattr(space, "dim", 1) > 1:
        header += [f"y{k + 1}" for k in range(space.dim)]
    else:
        header += ["response"]
    header += ["objective"]
    if args.estimator == "ll":
        header += ["sigma2", "weight_min", "weight_max"]
    rows = []
    for x in queries:
        est = fit(space, sample, kernel, args.bandwidth, float(x))
        row = [float(x)] + np.atleast_1d(np.asarray(est.minimizer, dtype=float)).tolist() + [est.objective]
        if args.estimator == "ll":
            ew = effective_weights(sample, kernel, args.bandwidth, float(x))
            row += [ew.moments.sigma2, float(ew.weights.min()), float(ew.weights.max())]
        rows.append(row)
    out = _open_out(args.output)
    try:
        write_rows(out, header, rows)
    finally:
        if out is not sys.stdout:
            out.close()


def cmd_bandwidth(args):
    kernel = get_kernel(args.kernel)
    if args.method == "plugin":
        sample = load_angles(args.input, args.column, args.degrees, args.delimiter)
        h = plugin_bandwidth(sample, kernel, args.pilot_h)
        _emit_json({"method": "plugin", "selected_h": h, "n": len(sample)}, args.output)
        return
    grid = BandwidthGrid.parse(args.grid)
    if args.estimator == "kde":
        sample = load_angles(args.input, args.column, args.degrees, args.delimiter)
        res = cv_bandwidth_density(sample, kernel, grid)
    else:
        space = _space(args)
        sample = load_paired_dataset(args.input, space, _schema(args))
        res = cv_bandwidth_frechet(space, sample, kernel, grid, args.estimator, threads=args.threads)
    out = res.to_dict()
    out.update({"method": "cv", "estimator": args.estimator})
    _emit_json(out, args.output)


def cmd_simulate(args):
    try:
        with open(args.config) as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{args.config}: invalid JSON at line {exc.lineno}, column {exc.colno}") from None
    if not isinstance(raw, dict):
        raise ParseError(f"{args.config}: config must be a JSON object")
    config = ExperimentConfig.from_dict(raw)
    report = run_rate_experiment(config, threads=args.threads, record_timing=args.record_timing)
    text = report.to_json()
    if args.output in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.output, "w") as fh:
            fh.write(text)


def _add_io(p, paired=False):
    p.add_argument("--input", required=True, help="CSV file")
    p.add_argument("--output", help="output path (default: standard output)")
    p.add_argument("--degrees", action="store_true", help="angles are in degrees")
    p.add_argument("--delimiter", default=",")
    if paired:
        p.add_argument("--predictor-column", default="angle")
        p.add_argument("--response-columns", help="comma-separated response column names")
    else:
        p.add_argument("--column", help="angle column (default: first)")


def _add_space(p):
    p.add_argument("--space", choices=["euclidean", "circle", "wasserstein"], default="euclidean")
    p.add_argument("--dim", type=_positive_int, default=None, help="euclidean dimension")
    p.add_argument("--grid-resolution", type=_positive_int, default=None,
                   help="extra candidate grid for the circle space")
    p.add_argument("--quantiles", type=_positive_int, default=None,
                   help="number of quantile levels for the wasserstein space")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=PROG, description="Circular-predictor smoothing and Fréchet regression.")
    parser.add_argument("--version", action="version", version=f"{PROG} {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    kernels = ["von_mises", "exponential", "uniform"]

    p = sub.add_parser("constants", help="kernel moments a_jk and normalizers c_hjk")
    p.add_argument("--kernel", choices=kernels, default="von_mises")
    p.add_argument("--h", type=_positive_float, required=True)
    p.add_argument("--max-j", type=int, default=4, choices=range(0, 9), metavar="J")
    p.add_argument("--json", action="store_true")
    p.add_argument("--output")
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("density", help="kernel density estimate on an angle grid")
    _add_io(p)
    p.add_argument("--kernel", choices=kernels, default="von_mises")
    p.add_argument("--bandwidth", default="plugin", help="positive number or 'plugin'")
    p.add_argument("--grid", type=_positive_int, default=256)
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("mise", help="Monte Carlo MISE against the asymptotic formula")
    p.add_argument("--model", default="von_mises:0:1", help="e.g. von_mises:MU:KAPPA or uniform")
    p.add_argument("--kernel", choices=kernels, default="von_mises")
    p.add_argument("--bandwidth", default="amise", help="positive number or 'amise'")
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--reps", type=_positive_int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--output")
    p.set_defaults(func=cmd_mise)

    p = sub.add_parser("regress", help="local constant or local linear Fréchet regression")
    _add_io(p, paired=True)
    _add_space(p)
    p.add_argument("--estimator", choices=["lc", "ll"], default="lc")
    p.add_argument("--kernel", choices=kernels, default="von_mises")
    p.add_argument("--bandwidth", type=_positive_float, required=True)
    p.add_argument("--query-grid", type=_positive_int, default=64)
    p.set_defaults(func=cmd_regress)

    p = sub.add_parser("bandwidth", help="plug-in or cross-validated bandwidth")
    _add_io(p, paired=True)
    _add_space(p)
    p.add_argument("--column", help="angle column for density data (default: first)")
    p.add_argument("--method", choices=["plugin", "cv"], default="plugin")
    p.add_argument("--estimator", choices=["kde", "lc", "ll"], default="lc")
    p.add_argument("--kernel", choices=kernels, default="von_mises")
    p.add_argument("--grid", default="0.05:1.5:20log", help="lo:hi:NUM[log|lin] or a comma list")
    p.add_argument("--pilot-h", type=_positive_float, default=None)
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(func=cmd_bandwidth)

    p = sub.add_parser("simulate", help="run a convergence-rate experiment from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--output")
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--record-timing", action="store_true",
                   help="fill wall_time_seconds (reports are then no longer byte-identical)")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except argparse.ArgumentTypeError as exc:
        parser.error(str(exc))
    except CircError as exc:
        print(f"{PROG}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"{PROG}: io error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
