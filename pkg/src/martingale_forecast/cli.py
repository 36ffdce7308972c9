"""Command-line entry point.

Exit codes: 0 success, 2 bad input, 3 I/O failure.  JSON goes to stdout
unless ``--out`` names a file; tables are CSV with LF line endings.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from datetime import date

import numpy as np
from scipy import special

from . import audit, density, multicandidate, pricing, process
from .errors import DomainError, PreconditionError
from .numerics import SeedSpec

EXIT_INPUT = 2
EXIT_IO = 3


class CliIOError(Exception):
    pass


def _emit(text, path):
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise CliIOError(f"cannot write {path}: {exc.strerror or exc}") from None


def _json(obj):
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")


def _iso_date(text):
    try:
        return date.fromisoformat(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an ISO-8601 date: {text!r}")


def _check_range(name, value, lo=None, hi=None, lo_open=True, hi_open=True):
    if value is None:
        return
    if not math.isfinite(value):
        raise DomainError(f"--{name} must be finite")
    if lo is not None and (value <= lo if lo_open else value < lo):
        raise DomainError(f"--{name} must be {'>' if lo_open else '>='} {lo}, got {value}")
    if hi is not None and (value >= hi if hi_open else value > hi):
        raise DomainError(f"--{name} must be {'<' if hi_open else '<='} {hi}, got {value}")


def _seed(value):
    return SeedSpec(int(value))


# -- subcommands -----------------------------------------------------------

def cmd_price(args):
    _check_range("y0", args.y0, 0.0, 1.0)
    _check_range("threshold", args.threshold, 0.0, 1.0)
    _check_range("horizon", args.horizon, 0.0)
    _check_range("s", args.s, 0.0, lo_open=False)
    _check_range("sigma", args.sigma, 0.0, lo_open=False)
    if args.s is not None:
        s = args.s
        sigma = pricing.sigma_from_s(s, args.y0, args.horizon)
        price = pricing.price_binary_from_s(args.y0, s, args.horizon, args.threshold)
    else:
        sigma = args.sigma
        s = pricing.s_from_sigma(sigma, args.y0, args.horizon)
        price = pricing.price_binary(args.y0, sigma, args.horizon, args.threshold)
    _emit(_json({
        "price": price,
        "sigma_used": sigma,
        "s_used": s,
        "y0": args.y0,
        "horizon": args.horizon,
        "threshold": args.threshold,
    }), args.out)


def cmd_vol(args):
    _check_range("y0", args.y0, 0.0, 1.0)
    _check_range("horizon", args.horizon, 0.0)
    _check_range("s", args.s, 0.0, lo_open=False)
    _check_range("sigma", args.sigma, 0.0, lo_open=False)
    if args.s is not None:
        out = {"s": args.s, "sigma": pricing.sigma_from_s(args.s, args.y0, args.horizon)}
    else:
        out = {"sigma": args.sigma, "s": pricing.s_from_sigma(args.sigma, args.y0, args.horizon)}
    out.update(y0=args.y0, horizon=args.horizon)
    _emit(_json(out), args.out)


def curve_grid(points):
    """``points`` equally spaced shares strictly inside (0, 1); odd counts hit 1/2."""
    return np.linspace(0.0, 1.0, points + 2)[1:-1]


def cmd_curve(args):
    _check_range("horizon", args.horizon, 0.0)
    _check_range("threshold", args.threshold, 0.0, 1.0)
    if args.grid_points < 2:
        raise DomainError("--grid-points must be >= 2")
    if not args.s_list:
        raise DomainError("--s-list is empty")
    for s in args.s_list:
        _check_range("s-list", s, 0.0, lo_open=False)
    grid = curve_grid(args.grid_points)
    rows = []
    for s in args.s_list:
        for y0, price in pricing.price_curve(s, args.horizon, args.threshold, grid):
            rows.append((y0, s, price))
    _emit(_csv(("y0", "s", "price"), rows), args.out)


def cmd_audit(args):
    try:
        with open(args.series, encoding="utf-8", newline="") as fh:
            series = audit.read_series_csv(fh, args.election_date, args.outcome)
    except OSError as exc:
        raise CliIOError(f"cannot read {args.series}: {exc.strerror or exc}") from None
    _check_range("threshold", args.threshold, 0.0, 1.0)
    _check_range("tol", args.tol, 0.0, lo_open=False)
    report = audit.martingale_audit(
        series, s=args.s, sigma=args.sigma, estimate_s=args.estimate_s,
        threshold=args.threshold, tol=args.tol,
    )
    _emit(_json(report.to_dict()), args.out)


def simulation_summary(ens, threshold):
    tv = ens.terminal_values
    return {
        "scheme": ens.scheme,
        "n_paths": ens.n_paths,
        "dt": ens.dt,
        "master_seed": ens.seed.master_seed,
        "y0": ens.y0,
        "sigma": ens.sigma,
        "horizon": ens.horizon,
        "mean": float(tv.mean()),
        "variance": float(tv.var(ddof=1)) if ens.n_paths > 1 else 0.0,
        "std_error": ens.std_error() if ens.n_paths > 1 else 0.0,
        "threshold": threshold,
        "p_at_least_threshold": ens.prob_at_least(threshold),
        "closed_form_price": pricing.price_binary(ens.y0, ens.sigma, ens.horizon, threshold),
    }


def cmd_simulate(args):
    _check_range("y0", args.y0, 0.0, 1.0)
    _check_range("sigma", args.sigma, 0.0, lo_open=False)
    _check_range("horizon", args.horizon, 0.0)
    _check_range("dt", args.dt, 0.0)
    _check_range("threshold", args.threshold, 0.0, 1.0)
    if args.paths < 1:
        raise DomainError("--paths must be >= 1")
    seed = _seed(args.seed)
    if args.scheme == "exact":
        ens = process.sample_y_exact(args.y0, args.sigma, args.horizon, args.paths, seed)
    else:
        ens = process.simulate_y_paths(args.y0, args.sigma, args.horizon, args.dt,
                                       args.paths, seed, workers=args.workers)
    if args.out:
        _emit(_csv(("terminal_value",), ((v,) for v in ens.terminal_values)), args.out)
    _emit(_json(simulation_summary(ens, args.threshold)), args.summary)


_X_EDGE = 26.0  # S(-26) is about 1e-296, the last comfortably representable share
_LOG_STEP = 0.02


def density_grid(params, points, spacing="shadow"):
    """Share grid for tabulating phi.

    ``shadow`` starts from ``points`` values spaced evenly in X over six
    standard deviations around the slice mean, then splits every interval
    until neither ``log phi`` nor the log distance to the nearer edge moves
    by more than 0.02 between neighbours.  That keeps a trapezoid sum over
    the emitted rows accurate even where phi spikes at the edges.  Shares
    that round to 0 or 1 are dropped.  ``uniform`` spaces ``points`` values
    evenly in (0, 1).
    """
    if spacing == "uniform":
        return np.linspace(0.0, 1.0, points + 2)[1:-1]
    lo = max(params.mean_x - 6 * params.sd_x, -_X_EDGE)
    hi = min(params.mean_x + 6 * params.sd_x, _X_EDGE)
    x = np.linspace(lo, hi, points)
    erf_v = process.SigmoidVariant.ERF
    log_edge = np.log(0.5 * special.erfc(np.abs(x)))
    with np.errstate(divide="ignore"):
        log_phi = np.log(density.timeslice_density(process.sigmoid_map(erf_v, x), params))
    log_phi = np.maximum(log_phi, -700.0)
    jump = np.maximum(np.abs(np.diff(log_phi)), np.abs(np.diff(log_edge)))
    splits = np.maximum(1, np.ceil(jump / _LOG_STEP)).astype(int)
    pieces = [np.linspace(a, b, m, endpoint=False) for a, b, m in zip(x[:-1], x[1:], splits)]
    y = process.sigmoid_map(erf_v, np.concatenate(pieces + [x[-1:]]))
    return np.unique(y[(y > 0.0) & (y < 1.0)])


def cmd_density(args):
    _check_range("y0", args.y0, 0.0, 1.0)
    _check_range("sigma", args.sigma, 0.0)
    _check_range("horizon", args.horizon, 0.0)
    if args.grid_points < 2:
        raise DomainError("--grid-points must be >= 2")
    params = density.TimeSliceParams(args.y0, args.sigma, args.horizon)
    y = density_grid(params, args.grid_points, args.spacing)
    phi = density.timeslice_density(y, params)
    _emit(_csv(("y", "phi"), zip(y, phi)), args.out)


def cmd_multi(args):
    ids = args.ids.split(",") if args.ids else None
    initial = multicandidate.ShareVector(args.shares, ids)
    _check_range("sigma", args.sigma, 0.0, lo_open=False)
    _check_range("horizon", args.horizon, 0.0)
    _check_range("dt", args.dt, 0.0)
    if args.paths < 1:
        raise DomainError("--paths must be >= 1")
    report = multicandidate.win_probabilities(
        initial, args.sigma, args.horizon, args.dt, args.paths, _seed(args.seed),
        rule=args.rule, threshold=args.threshold, workers=args.workers,
    )
    _emit(_json(report.to_dict()), args.out)


# -- parser ----------------------------------------------------------------

def _vol_group(p, estimate=False):
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--s", type=float, help="vote-share volatility")
    g.add_argument("--sigma", type=float, help="shadow-process volatility")
    if estimate:
        g.add_argument("--estimate-s", action="store_true",
                       help="estimate s from the vote_share_est column")


def build_parser():
    ap = argparse.ArgumentParser(
        prog="martingale-forecast",
        description="Arbitrage pricing and martingale audits of binary election forecasts.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("price", help="closed-form binary value")
    p.add_argument("--y0", type=float, required=True)
    _vol_group(p)
    p.add_argument("--horizon", type=float, required=True, help="years to the election")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--out")
    p.set_defaults(func=cmd_price)

    p = sub.add_parser("vol", help="convert between s and sigma")
    p.add_argument("--y0", type=float, required=True)
    _vol_group(p)
    p.add_argument("--horizon", type=float, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_vol)

    p = sub.add_parser("curve", help="price against share for several s (CSV)")
    p.add_argument("--s-list", type=_float_list, default=[0.01, 0.05, 0.1, 0.2])
    p.add_argument("--horizon", type=float, required=True)
    p.add_argument("--grid-points", type=int, default=99)
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--out")
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("audit", help="audit a published forecast series (JSON)")
    p.add_argument("--series", required=True, help="CSV: date,published_prob,vote_share_est")
    p.add_argument("--election-date", type=_iso_date, required=True)
    _vol_group(p, estimate=True)
    p.add_argument("--outcome", type=int, choices=(0, 1))
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--tol", type=float, default=None,
                   help=f"absolute divergence tolerance (default {audit.DEFAULT_TOL})")
    p.add_argument("--out")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("simulate", help="simulate terminal vote shares")
    p.add_argument("--y0", type=float, required=True)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--horizon", type=float, required=True)
    p.add_argument("--dt", type=float, default=process.DEFAULT_DT)
    p.add_argument("--paths", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--scheme", choices=("euler", "exact"), default="euler")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="CSV of terminal values")
    p.add_argument("--summary", help="summary JSON (default stdout)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("density", help="tabulate the time-slice density (CSV)")
    p.add_argument("--y0", type=float, required=True)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--horizon", type=float, required=True)
    p.add_argument("--grid-points", type=int, default=401)
    p.add_argument("--spacing", choices=("shadow", "uniform"), default="shadow")
    p.add_argument("--out")
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("multi", help="multi-candidate win probabilities (JSON)")
    p.add_argument("--shares", type=_float_list, required=True)
    p.add_argument("--ids")
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--horizon", type=float, required=True)
    p.add_argument("--dt", type=float, default=process.DEFAULT_DT)
    p.add_argument("--paths", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rule", choices=("plurality", "majority"), default="plurality")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_multi)
    return ap


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except CliIOError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (DomainError, PreconditionError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return 0


if __name__ == "__main__":
    sys.exit(main())
