"""fadekit command line: CSV / JSON front end to the library.

stdout carries data only; diagnostics go to stderr.  Exit status is 0 on
success, 1 on a computation error and 2 on bad flags or parameters.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import fitting, metrics, model, sampling
from .errors import FadekitError, InvalidParams

EXIT_OK, EXIT_COMPUTE, EXIT_USAGE = 0, 1, 2


def fmt(v: float) -> str:
    return f"{float(v):.17g}"


def parse_grid(text: str) -> tuple[float, float, int]:
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"grid must look like a:b:n, got {text!r}")
    try:
        a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}") from None
    if n < 1 or not (math.isfinite(a) and math.isfinite(b)) or b < a:
        raise argparse.ArgumentTypeError(f"grid needs finite a <= b and n >= 1, got {text!r}")
    return a, b, n


def parse_int_list(text: str) -> list[int]:
    try:
        vals = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("list is empty")
    return vals


def grid_points(grid, log: bool = False) -> np.ndarray:
    a, b, n = grid
    if log:
        if a <= 0:
            raise InvalidParams("--log grids need a > 0")
        return np.geomspace(a, b, n)
    return np.linspace(a, b, n)


def write_csv(out, header: str, rows) -> None:
    out.write(header + "\n")
    for row in rows:
        out.write(",".join(fmt(v) for v in row) + "\n")


def _add_params(p, gbar=True, m=True, gbar_default=None):
    if gbar:
        p.add_argument("--gbar", type=float, required=gbar_default is None, default=gbar_default,
                       help="average SNR (linear)")
    p.add_argument("--kappa", type=float, required=True, help="LOS-to-scatter power ratio")
    p.add_argument("--mu", type=int, required=True, help="number of clusters (integer)")
    if m:
        p.add_argument("--m", type=int, required=True, help="LOS shadowing parameter (integer)")


def _params(args, gbar=None):
    return model.ShadowedParams(args.gbar if gbar is None else gbar, args.kappa, args.mu, args.m)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_mixture(args, out):
    mix = model.build_mixture(_params(args))
    doc = {
        "regime": mix.regime.value,
        "components": [
            {"weight": c.weight, "shape": int(c.shape), "scale": c.scale} for c in mix.components
        ],
        "checks": {
            "weight_sum": math.fsum(c.weight for c in mix.components),
            "mean": math.fsum(c.weight * c.mean for c in mix.components),
        },
    }
    out.write(json.dumps(doc, indent=2) + "\n")


def cmd_eval(args, out):
    params = _params(args)
    xs = grid_points(args.grid, args.log)
    if args.what == "mgf":
        mix = model.build_mixture(params)
        vals = [model.mgf_mixture(mix, float(s)) for s in xs]
    else:
        if np.any(xs < 0):
            raise InvalidParams("pdf/cdf grids must be >= 0")
        mix = model.build_mixture(params)
        fn = model.pdf if args.what == "pdf" else model.cdf
        vals = fn(mix, xs)
    write_csv(out, "x,value", zip(xs, vals))


def cmd_capacity(args, out):
    db = grid_points(args.gbar_db_grid)
    rows = []
    for d in db:
        gbar = 10.0 ** (d / 10.0)
        rows.append((d, metrics.shadowed_capacity(model.build_mixture(_params(args, gbar)))))
    write_csv(out, "snr_db,capacity_bpshz", rows)


def cmd_sample(args, out):
    rng = sampling.RngState(args.seed)
    vals = sampling.sample(_params(args), args.n, rng, method=args.method)
    if args.out == "-":
        fitting.dump_samples(vals, out)
    else:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fitting.dump_samples(vals, fh)


def cmd_fit(args, out):
    if args.input == "-":
        data = sys.stdin.buffer.read()
    else:
        with open(args.input, "rb") as fh:
            data = fh.read()
    sample = fitting.load_samples(data, format=args.format, min_samples=args.min_samples)
    models = [t.strip() for t in args.models.split(",") if t.strip()]
    res = fitting.fit(sample, args.mu_max, args.m_max, models=models)
    out.write(res.to_json() + "\n")


def cmd_converge(args, out):
    rep = metrics.convergence_gap(args.kappa, args.mu, args.gbar, args.m_list)
    write_csv(out, "m,sup_gap", zip(rep.m_values, rep.sup_gaps))


def cmd_approx_rician(args, out):
    rows = [(m, metrics.rician_pdf_gap(args.K, m, args.gbar)) for m in args.m_list]
    write_csv(out, "m,sup_pdf_gap", rows)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fadekit",
        description="kappa-mu shadowed fading: mixtures, metrics, sampling and fitting",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("mixture", help="print the Gamma-mixture components as JSON")
    _add_params(p)
    p.set_defaults(func=cmd_mixture)

    p = sub.add_parser("eval", help="evaluate pdf, cdf or mgf on a grid (CSV x,value)")
    _add_params(p)
    p.add_argument("--what", choices=["pdf", "cdf", "mgf"], required=True,
                   help="function to evaluate (mgf grid is over s)")
    p.add_argument("--grid", type=parse_grid, required=True, help="a:b:n evaluation grid")
    p.add_argument("--log", action="store_true", help="log-spaced grid (needs a > 0)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("capacity", help="ergodic capacity versus average SNR in dB (CSV)")
    _add_params(p, gbar=False)
    p.add_argument("--gbar-db-grid", type=parse_grid, required=True,
                   help="a:b:n grid of average SNR in dB")
    p.set_defaults(func=cmd_capacity)

    p = sub.add_parser("sample", help="draw samples (plain format, one value per line)")
    _add_params(p)
    p.add_argument("--n", type=int, required=True, help="number of draws")
    p.add_argument("--seed", type=int, required=True, help="64-bit unsigned seed")
    p.add_argument("--out", default="-", help="output file, '-' for stdout (default)")
    p.add_argument("--method", choices=["auto", "mixture", "two_gamma"], default="auto",
                   help="sampler construction (default auto)")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("fit", help="fit models to a sample file (JSON result)")
    p.add_argument("--in", dest="input", required=True, help="sample file, '-' for stdin")
    p.add_argument("--format", choices=["plain", "csv"], default="plain", help="input format")
    p.add_argument("--mu-max", type=int, required=True, help="largest mu in the grid")
    p.add_argument("--m-max", type=int, required=True, help="largest m in the grid")
    p.add_argument("--models", default="shadowed",
                   help="comma-separated subset of shadowed,rician,nakagami")
    p.add_argument("--min-samples", type=int, default=fitting.MIN_SAMPLES,
                   help=f"reject inputs shorter than this (default {fitting.MIN_SAMPLES})")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("converge", help="sup CDF gap to the kappa-mu limit per m (CSV)")
    _add_params(p, m=False, gbar_default=1.0)
    p.add_argument("--m-list", type=parse_int_list, required=True, help="comma-separated m values")
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("approx-rician", help="sup pdf gap of the Rician approximation (CSV)")
    p.add_argument("--K", type=float, required=True, help="Rician K factor")
    p.add_argument("--m-list", type=parse_int_list, required=True, help="comma-separated m values")
    p.add_argument("--gbar", type=float, default=1.0, help="average SNR (default 1)")
    p.set_defaults(func=cmd_approx_rician)
    return parser


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.func(args, out)
    except InvalidParams as exc:
        print(f"fadekit {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FadekitError, ArithmeticError, ValueError, OSError) as exc:
        print(f"fadekit {args.command}: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
