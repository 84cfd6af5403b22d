"""Command-line surface tying the pipeline together.

One command per invocation; deterministic byte-identical output for
identical flags.  JSON goes to stdout; CSV is available for the sweep and
diagnostic outputs.  Errors are emitted as one machine-readable JSON object
and a nonzero exit status: 2 for validation problems, 3 for exact-arithmetic
computation failures, 4 for numerical diagnostics.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import mpmath as mp

from .errors import FkqError, ValidationError
from .holonomy import (
    cancellation_sweep,
    cancellation_to_csv,
    cancellation_to_dict,
    gap_sweep,
    gaps_to_csv,
    gaps_to_dict,
    load_bundled_apoly,
    parse_apoly,
)
from .knots import fk_connected_sum, fk_to_dict, jones_knotsum, parse_knot
from .qlaurent import as_rat, fmt_rat, series_to_dict
from .wrt import DEFAULT_PRECISION_BITS, SurgeryProblem, wrt_surgery, z_cs
from .zhat import extrapolate_limit, zcs_from_zhat, zhat_for_depth

ENV_PRECISION = "FKQ_PRECISION_BITS"
ENV_THREADS = "FKQ_THREADS"


def _cnum(z) -> list:
    return [float(mp.re(z)), float(mp.im(z))]


def _emit(obj, fmt="json"):
    if fmt == "json":
        sys.stdout.write(json.dumps(obj, sort_keys=True, indent=1) + "\n")
    else:
        sys.stdout.write(obj)


def _rat_list(text: str) -> list:
    try:
        return [as_rat(part.strip()) for part in text.split(",") if part.strip()]
    except (ValueError, ZeroDivisionError) as exc:
        raise ValidationError(f"bad rational list {text!r}: {exc}") from exc


def _int_list(text: str) -> list:
    try:
        return [int(part.strip()) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise ValidationError(f"bad integer list {text!r}: {exc}") from exc


@contextlib.contextmanager
def _map_fn(threads: int):
    if threads <= 1:
        yield map
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            yield pool.map


def _resolve_apoly(args, knot):
    if getattr(args, "apoly", None):
        with open(args.apoly, "rb") as fh:
            return parse_apoly(fh.read())
    return load_bundled_apoly(knot)


def cmd_fk(args) -> int:
    knot = parse_knot(args.knot)
    trunc = fk_connected_sum(knot, args.mmax)
    _emit(fk_to_dict(trunc))
    return 0


def cmd_jones(args) -> int:
    knot = parse_knot(args.knot)
    series = jones_knotsum(knot, args.color)
    doc = series_to_dict(series)
    doc["knot"] = str(knot)
    doc["n"] = args.color
    _emit(doc)
    return 0


def cmd_recursion(args) -> int:
    knot = parse_knot(args.knot)
    apoly = _resolve_apoly(args, knot)
    with _map_fn(args.threads) as mapper:
        report = cancellation_sweep(
            apoly,
            knot,
            _int_list(args.mmax_list),
            _rat_list(args.x_powers),
            map_fn=mapper,
        )
    if args.format == "csv":
        _emit(cancellation_to_csv(report), fmt="csv")
    else:
        _emit(cancellation_to_dict(report))
    return 0


def cmd_gaps(args) -> int:
    knot = parse_knot(args.knot)
    apoly = _resolve_apoly(args, knot)
    with _map_fn(args.threads) as mapper:
        reports = gap_sweep(
            apoly,
            knot,
            _int_list(args.mmax_list),
            _rat_list(args.q_powers),
            map_fn=mapper,
        )
    if args.format == "csv":
        _emit(gaps_to_csv(reports), fmt="csv")
    else:
        _emit(gaps_to_dict(reports))
    return 0


def cmd_wrt(args) -> int:
    knot = parse_knot(args.knot)
    prob = SurgeryProblem(knot, args.slope, args.level, args.precision_bits)
    tau = wrt_surgery(prob)
    zc = z_cs(prob)
    _emit(
        {
            "knot": str(knot),
            "p": args.slope,
            "k": args.level,
            "tau": _cnum(tau),
            "Zcs": _cnum(zc),
            "precisionBits": args.precision_bits,
        }
    )
    return 0


def cmd_zhat_limit(args) -> int:
    knot = parse_knot(args.knot)
    z = zhat_for_depth(knot, args.n_trunc)
    norm_qpow = as_rat(args.norm_qpow) if args.norm_qpow is not None else None
    est = extrapolate_limit(
        z,
        args.level,
        args.n_trunc,
        method=args.method,
        degree=args.fit_degree,
        norm_mul=args.norm_mul,
        norm_qpow=norm_qpow,
        precision_bits=args.precision_bits,
        divergence_rtol=args.divergence_rtol,
    )
    zc = zcs_from_zhat(est)
    analytic = z_cs(SurgeryProblem(knot, -1, args.level, args.precision_bits))
    doc = {
        "knot": str(knot),
        "k": args.level,
        "N": args.n_trunc,
        "method": est.method,
        "normMul": est.norm_mul,
        "normQPow": fmt_rat(est.norm_qpow),
        "sign": est.sign,
        "dExp": fmt_rat(est.d_exp),
        "limit": _cnum(est.value),
        "Zcs": _cnum(zc),
        "analyticZcs": _cnum(analytic),
        "absError": float(abs(zc - analytic)),
        "precisionBits": args.precision_bits,
    }
    if args.format == "csv":
        lines = ["index,re,im"]
        for i, d in enumerate(est.diagnostics):
            lines.append(f"{i},{float(mp.re(d))!r},{float(mp.im(d))!r}")
        _emit("\n".join(lines) + "\n", fmt="csv")
    else:
        _emit(doc)
    return 0


def cmd_compare(args) -> int:
    knot = parse_knot(args.knot)
    analytic = z_cs(SurgeryProblem(knot, -1, args.level, args.precision_bits))
    z = zhat_for_depth(knot, args.n_trunc)
    est = extrapolate_limit(
        z,
        args.level,
        args.n_trunc,
        method=args.method,
        degree=args.fit_degree,
        precision_bits=args.precision_bits,
        divergence_rtol=args.divergence_rtol,
    )
    zc = zcs_from_zhat(est)
    _emit(
        {
            "knot": str(knot),
            "k": args.level,
            "N": args.n_trunc,
            "method": est.method,
            "analytic": _cnum(analytic),
            "series": _cnum(zc),
            "absError": float(abs(zc - analytic)),
            "precisionBits": args.precision_bits,
        }
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fkq",
        description="Exact q-series toolkit for torus-knot complement invariants",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, fmt=True):
        p.add_argument("--knot", required=True, help="e.g. 'T(2,3)#T(2,5)'")
        if fmt:
            p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument(
            "--threads",
            type=int,
            default=int(os.environ.get(ENV_THREADS, "1")),
            help="worker cap for sweep points",
        )

    def precision(p):
        p.add_argument(
            "--precision-bits",
            type=int,
            default=int(os.environ.get(ENV_PRECISION, str(DEFAULT_PRECISION_BITS))),
        )

    p = sub.add_parser("fk", help="truncated series of a knot or connected sum")
    common(p, fmt=False)
    p.add_argument("--mmax", type=int, required=True)
    p.set_defaults(fn=cmd_fk)

    p = sub.add_parser("jones", help="colored Jones polynomial (exact)")
    common(p, fmt=False)
    p.add_argument("--color", "-n", dest="color", type=int, required=True)
    p.set_defaults(fn=cmd_jones)

    p = sub.add_parser("recursion", help="cancellation sweep of a recursion operator")
    common(p)
    p.add_argument("--apoly", help="operator JSON file (bundled one used if omitted)")
    p.add_argument("--mmax-list", default="24,48,72,96,120")
    p.add_argument("--x-powers", default="0,1,2")
    p.set_defaults(fn=cmd_recursion)

    p = sub.add_parser("gaps", help="x-gap sweep of raw recursion slices")
    common(p)
    p.add_argument("--apoly")
    p.add_argument("--mmax-list", default="24,48,72,96,120")
    p.add_argument("--q-powers", default="1")
    p.set_defaults(fn=cmd_gaps)

    p = sub.add_parser("wrt", help="analytic surgery invariant at a root of unity")
    common(p, fmt=False)
    p.add_argument("--k", dest="level", type=int, required=True)
    p.add_argument("--p", dest="slope", type=int, default=-1)
    precision(p)
    p.set_defaults(fn=cmd_wrt)

    def zhat_args(p):
        p.add_argument("--k", dest="level", type=int, required=True)
        p.add_argument("--n", "-N", dest="n_trunc", type=int, required=True)
        p.add_argument(
            "--method",
            choices=("radial-fit", "partial-sum-average"),
            default="radial-fit",
        )
        p.add_argument("--fit-degree", type=int, default=3)
        p.add_argument("--divergence-rtol", type=float, default=0.5)
        precision(p)

    p = sub.add_parser("zhat-limit", help="surgery series limit at a root of unity")
    common(p)
    zhat_args(p)
    p.add_argument("--norm-mul", type=int, default=2)
    p.add_argument("--norm-qpow", default=None, help="display monomial power (default -d)")
    p.set_defaults(fn=cmd_zhat_limit)

    p = sub.add_parser("compare", help="analytic vs series surgery value")
    common(p, fmt=False)
    zhat_args(p)
    p.set_defaults(fn=cmd_compare)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        if getattr(args, "threads", 1) < 1:
            raise ValidationError("--threads must be >= 1")
        if getattr(args, "precision_bits", 64) < 64:
            raise ValidationError("--precision-bits must be >= 64")
        return args.fn(args)
    except FkqError as exc:
        _emit({"error": {"type": type(exc).__name__, "message": str(exc)}})
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
