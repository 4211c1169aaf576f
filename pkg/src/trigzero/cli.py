"""Command-line driver: ``trigzero {limit,kacrice,montecarlo,range-demo,dump-draw}``.

Rows go to standard output (or ``--out``) as CSV, or as JSON lines with
``--json``. Exit status: 0 on success, 2 on invalid input, 3 when a
computation did not converge or a search came up empty.
"""

import argparse
import math
import sys

import numpy as np

from .angles import parse_angle
from .errors import MeasureFileError, NotConverged, NotFound, TrigZeroError, ValidationError
from .experiments import (cmd_kacrice, cmd_limit, cmd_montecarlo, cmd_range_demo,
                          counts_to_csv, records_to_csv, records_to_jsonl)
from .kacrice import QuadratureSpec
from .sampler import RngSpec, dump_draw, sample
from .spectral import SpectralMeasure, load_measure
from .zerocount import resolve_threads

EXIT_OK, EXIT_INVALID, EXIT_FAILED = 0, 2, 3


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _range(text, cast):
    parts = text.split(":")
    if len(parts) not in (2, 3):
        raise argparse.ArgumentTypeError(f"expected lo:hi or lo:hi:step, got {text!r}")
    try:
        return tuple(cast(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad range {text!r}") from None


def _residue(text):
    try:
        r, q = (int(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected r:q, got {text!r}") from None
    if q < 1:
        raise argparse.ArgumentTypeError("modulus must be positive")
    return r % q, q


def _degrees(args):
    ns = list(args.n or [])
    if args.n_range:
        lo, hi, *step = args.n_range
        ns.extend(range(lo, hi + 1, step[0] if step else 1))
    if args.residue:
        r, q = args.residue
        ns = [n for n in ns if n % q == r]
    if not ns:
        raise ValidationError("no degrees selected (use --n, --n-range, --residue)")
    if min(ns) < 1:
        raise ValidationError("degrees must be >= 1")
    return ns


def _x_values(args):
    xs = []
    if args.x is not None:
        xs.append(float(parse_angle(args.x)))
    if args.x_range:
        lo, hi, count = args.x_range
        count = int(count) if count else 100
        if count < 1:
            raise ValidationError("x-range count must be >= 1")
        xs.extend(np.linspace(float(parse_angle(lo)), float(parse_angle(hi)), count).tolist())
    if not xs:
        raise ValidationError("give --x or --x-range")
    return xs


def _measure(args):
    if args.measure and args.alpha is not None:
        raise ValidationError("give either --measure or --alpha, not both")
    if args.measure:
        return load_measure(args.measure)
    if args.alpha is not None:
        return SpectralMeasure.atomic(args.alpha)
    raise ValidationError("a measure is required (--measure FILE or --alpha)")


def _quad(args):
    return QuadratureSpec(atom_window_beta=args.beta) if args.beta is not None else QuadratureSpec()


def _emit(args, records):
    text = records_to_jsonl(records) if args.json else records_to_csv(records)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--alpha", help="atom location, radians or pi*p/q")
    common.add_argument("--measure", metavar="FILE", help="JSON spectral measure file")
    common.add_argument("--n", type=_int_list, help="degree(s), comma-separated")
    common.add_argument("--n-range", type=lambda s: _range(s, int), metavar="LO:HI[:STEP]")
    common.add_argument("--residue", type=_residue, metavar="R:Q", help="keep n = R mod Q")
    common.add_argument("--tol", type=float, default=None, help="tolerance for limit values")
    common.add_argument("--beta", type=float, default=None, help="atom-window exponent")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--json", action="store_true", help="JSON lines instead of CSV")
    common.add_argument("--out", metavar="FILE", help="write output here instead of stdout")
    common.add_argument("--threads", type=int, default=None,
                        help="worker threads (default $TRIGZERO_THREADS or 1)")
    common.add_argument("--timing", action="store_true",
                        help="record wall-clock runtime_ms (otherwise 0, keeping output byte-stable)")

    p = argparse.ArgumentParser(prog="trigzero", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="verb", required=True)

    s = sub.add_parser("limit", parents=[common], help="ell^alpha(x) or ell^0(x)")
    s.add_argument("--x", help="single x in (0, pi)")
    s.add_argument("--x-range", type=lambda t: _range(t, str), metavar="LO:HI[:COUNT]")

    sub.add_parser("kacrice", parents=[common], help="Kac-Rice E[N]/n")

    s = sub.add_parser("montecarlo", parents=[common], help="sampled mean zero count / n")
    s.add_argument("--trials", type=int, default=1000)
    s.add_argument("--counts", metavar="FILE", help="write per-trial counts as CSV")

    s = sub.add_parser("range-demo", parents=[common], help="hit a target limit value")
    s.add_argument("--target", type=float, required=True)
    s.add_argument("--epsilon", type=float, default=0.05)
    s.add_argument("--n-max", type=int, default=20000)
    s.add_argument("--candidates", type=int, default=3)

    s = sub.add_parser("dump-draw", parents=[common], help="write one sampled draw to a text file")
    s.add_argument("--stream", type=int, default=0)
    return p


def run(args):
    if args.threads is not None:
        resolve_threads(args.threads)
    if args.verb == "limit":
        alpha = args.alpha if args.alpha is not None else "0"
        _emit(args, cmd_limit(alpha, _x_values(args), tol=args.tol or 1e-6, timing=args.timing))
        return EXIT_OK
    if args.verb == "kacrice":
        recs = cmd_kacrice(_measure(args), _degrees(args), quad=_quad(args),
                           alpha_text=args.alpha, tol=args.tol or 1e-6, timing=args.timing)
        _emit(args, recs)
        failed = any(r.diagnostics.get("status") == "not_converged" for r in recs)
        return EXIT_FAILED if failed else EXIT_OK
    if args.verb == "montecarlo":
        recs, counts = cmd_montecarlo(_measure(args), _degrees(args), args.trials, args.seed,
                                      threads=args.threads, timing=args.timing,
                                      alpha_text=args.alpha)
        _emit(args, recs)
        if args.counts:
            with open(args.counts, "w", newline="") as fh:
                fh.write(counts_to_csv(counts))
        return EXIT_OK
    if args.verb == "range-demo":
        alpha = float(parse_angle(args.alpha)) if args.alpha is not None else 1e-2
        recs, achieved = cmd_range_demo(args.target, epsilon=args.epsilon, alpha=alpha,
                                        n_max=args.n_max, candidates=args.candidates,
                                        tol=args.tol or 1e-8, quad=_quad(args),
                                        timing=args.timing)
        _emit(args, recs)
        return EXIT_OK if achieved else EXIT_FAILED
    if args.verb == "dump-draw":
        if not args.out:
            raise ValidationError("dump-draw needs --out FILE")
        ns = _degrees(args)
        if len(ns) != 1:
            raise ValidationError("dump-draw takes a single --n")
        dump_draw(sample(_measure(args), ns[0], RngSpec(args.seed, args.stream)), args.out)
        return EXIT_OK
    raise ValidationError(f"unknown verb {args.verb}")


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return run(args)
    except (ValidationError, MeasureFileError) as exc:
        print(f"trigzero: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (NotConverged, NotFound) as exc:
        print(f"trigzero: {exc}", file=sys.stderr)
        return EXIT_FAILED
    except TrigZeroError as exc:
        print(f"trigzero: {exc}", file=sys.stderr)
        return EXIT_FAILED
    except OSError as exc:
        print(f"trigzero: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
