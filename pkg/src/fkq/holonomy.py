"""Recursion-operator application and cancellation forensics.

A recursion operator A = sum_j a_j(x,q) * y^j acts on a series f through the
shift y: f(x,q) -> f(xq,q), so applying A forms

    total = sum_j a_j(x,q) * f(x q^j, q).

For the series product of a connected sum's factors the minimal operator
annihilates the exact object, and applying it to truncations leaves only
truncation debris whose minimum surviving q-power climbs as the truncation
bound grows.  Two diagnostics quantify this:

  * cancellation_sweep: per tracked x-power, the minimum q-exponent that
    survives in the raw total, next to the q-degree up to which the total is
    provably exact (everything at or below it cancels identically).  The raw
    minimum is what the survival plots show; the trusted bound certifies that
    nothing real survives below it.
  * gap_sweep: per tracked q-power, the runs of vanishing x-coefficients
    between the nonzero extremes of the slice.  Slices are taken from the raw
    total because for mixed-chirality sums no q-band of the product is fully
    converged at any finite bound; the gaps are the structure that stabilizes.

Operator coefficient files use integer coefficients and integer exponents
only.  The operator for T(2,3)#T(2,3) ships with the package; others are
supplied by the user.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from math import gcd

from .errors import EmptyCoefficient, MissingAPoly, NonIntegerExponent, SchemaError
from .knots import KnotSum, fk_factor_product, parse_knot
from .qlaurent import (
    NEG_INF,
    POS_INF,
    Series,
    add,
    fmt_rat,
    mul,
    shift_x,
    slice_q,
    slice_x,
)


@dataclass(frozen=True)
class APoly:
    """Recursion operator with coefficient polynomials a_0 .. a_d."""

    name: str
    coeffs: tuple  # tuple of Series, index j
    source_knot: KnotSum | None = None

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1


@dataclass
class CancellationEntry:
    mmax: int
    min_surviving_q: Fraction | None  # None = all cancelled (empty raw slice)
    trusted_up_to: Fraction | None  # None = unbounded trust
    all_cancelled_within_trust: bool


@dataclass
class CancellationReport:
    operator: str
    knot: str
    mmax_sweep: list
    x_powers: list
    per_x_power: dict  # xExp -> list[CancellationEntry]


@dataclass
class GapEntry:
    mmax: int
    pos_gap_width: int | None  # None = empty slice (full-window marker)
    neg_gap_width: int | None
    gap_intervals: list  # list of (lo, hi) absent-exponent runs; None ends open


@dataclass
class GapReport:
    operator: str
    knot: str
    q_power: Fraction
    per_bound: list = field(default_factory=list)


@dataclass(frozen=True)
class RecursionTermSlice:
    j: int
    slice: dict  # exponent -> coefficient, as slice_q / slice_x


def parse_apoly(data) -> APoly:
    """Validate and load an operator from its JSON object or bytes.

    Schema: {"name": str, "knot": str|null, "degree": d,
             "coeffs": [{"j": 0, "terms": [[coefInt, xExpInt, qExpInt], ...]}, ...]}
    """
    if isinstance(data, (bytes, str)):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"operator file is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise SchemaError("operator file must contain a JSON object")
    try:
        degree = data["degree"]
        coeff_list = data["coeffs"]
        name = data.get("name", "unnamed")
    except KeyError as exc:
        raise SchemaError(f"missing field {exc}") from exc
    if not isinstance(degree, int) or degree < 1:
        raise EmptyCoefficient("operator degree must be an integer >= 1")
    if not isinstance(coeff_list, list) or len(coeff_list) != degree + 1:
        raise SchemaError("coeffs must list exactly degree+1 entries")
    by_j = {}
    for entry in coeff_list:
        try:
            j = entry["j"]
            terms = entry["terms"]
        except (TypeError, KeyError) as exc:
            raise SchemaError(f"malformed coefficient entry: {exc}") from exc
        if not isinstance(j, int) or not (0 <= j <= degree) or j in by_j:
            raise SchemaError(f"bad or duplicate shift index j={j}")
        tmap = {}
        for item in terms:
            if not (isinstance(item, list) and len(item) == 3):
                raise SchemaError(f"term {item!r} must be [coef, xExp, qExp]")
            c, xe, qe = item
            if not all(isinstance(v, int) for v in (c, xe, qe)):
                raise NonIntegerExponent(
                    f"term {item!r}: coefficients and exponents must be integers"
                )
            key = (Fraction(xe), Fraction(qe))
            tmap[key] = tmap.get(key, 0) + c
        by_j[j] = Series(tmap)
    coeffs = tuple(by_j[j] for j in range(degree + 1))
    if coeffs[0].is_zero() or coeffs[degree].is_zero():
        raise EmptyCoefficient("a_0 and a_degree must be nonzero")
    knot = None
    if data.get("knot"):
        knot = parse_knot(data["knot"])
    return APoly(name=name, coeffs=coeffs, source_knot=knot)


BUNDLED_OPERATORS = {"T(2,3)#T(2,3)": "apoly_t23_t23.json"}


def load_bundled_apoly(knot: KnotSum | str) -> APoly:
    """Operator shipped with the package for the given knot, if any."""
    key = str(knot)
    fname = BUNDLED_OPERATORS.get(key)
    if fname is None:
        raise MissingAPoly(
            f"no bundled recursion operator for {key}; supply one with --apoly"
        )
    payload = resources.files("fkq.data").joinpath(fname).read_text()
    return parse_apoly(payload)


def apply_recursion(apoly: APoly, f: Series) -> tuple[Series, list]:
    """terms[j] = a_j(x,q) * f(x q^j, q); total = sum of the terms.

    The generic window bookkeeping makes the shifted factors' windows
    conservative (rectangles); the sweep drivers below use the sharper
    per-x-power bounds from `slice_trust_bounds` instead.
    """
    terms = []
    for j, a_j in enumerate(apoly.coeffs):
        terms.append(mul(a_j, shift_x(f, j)))
    total = terms[0]
    for t in terms[1:]:
        total = add(total, t)
    return total, terms


def slice_trust_bounds(apoly: APoly, f: Series, x_power) -> tuple:
    """Exactness bounds in q for the total's slice at one x-power.

    A coefficient of a_j at x^alpha q^beta pairs the slice at x_power with
    f-data at x-degree (x_power - alpha), whose q-trust band shears by
    j * (x_power - alpha).  The slice is exact between the max of the lower
    images and the min of the upper images over all operator monomials.
    """
    x0 = Fraction(x_power)
    f_lo, f_hi = f.qwindow
    hi = POS_INF
    lo = NEG_INF
    for j, a_j in enumerate(apoly.coeffs):
        for (alpha, beta) in a_j.terms:
            shear = j * (x0 - alpha) + beta
            if f_hi != POS_INF:
                hi = min(hi, f_hi + shear)
            if f_lo != NEG_INF:
                lo = max(lo, f_lo + shear)
    return lo, hi


def cancellation_sweep(
    apoly: APoly, knots: KnotSum, mmax_list, x_powers, map_fn=map
) -> CancellationReport:
    """Minimum surviving q-power per tracked x-power along a truncation sweep.

    For each bound the raw minimum is recorded together with the trusted
    bound below which survivors are impossible; a slice whose raw support is
    empty gets the all-cancelled marker.  map_fn allows a thread-pool map;
    results are assembled in input order either way.
    """
    mmax_list = list(mmax_list)
    if any(b <= a for a, b in zip(mmax_list, mmax_list[1:])):
        raise SchemaError("mmax list must be strictly increasing")
    x_powers = [Fraction(x) for x in x_powers]

    def one_bound(mmax):
        f = fk_factor_product(knots, mmax)
        total, _ = apply_recursion(apoly, f)
        entries = []
        for x0 in x_powers:
            layer = slice_x(total, x0)
            lo, hi = slice_trust_bounds(apoly, f, x0)
            raw_min = min(layer) if layer else None
            within = [v for v in layer if lo <= v <= hi]
            entries.append(
                CancellationEntry(
                    mmax=mmax,
                    min_surviving_q=raw_min,
                    trusted_up_to=None if hi == POS_INF else hi,
                    all_cancelled_within_trust=not within,
                )
            )
        return entries

    rows = list(map_fn(one_bound, mmax_list))
    per_x = {x0: [] for x0 in x_powers}
    for row in rows:
        for x0, entry in zip(x_powers, row):
            per_x[x0].append(entry)
    return CancellationReport(
        operator=apoly.name,
        knot=str(knots),
        mmax_sweep=mmax_list,
        x_powers=x_powers,
        per_x_power=per_x,
    )


def _lattice_step(support) -> Fraction:
    # the exponent lattice through x^0: integers for products of evenly many
    # antisymmetric factors, half-integers otherwise, so counted gap widths
    # line up with the integer powers of the survival plots
    den = 1
    for e in support:
        den = den * e.denominator // gcd(den, e.denominator)
    return Fraction(1, den)


def analyze_gaps(layer: dict) -> GapEntry:
    """Zero runs in the x-support of one q-slice.

    Runs are maximal absent stretches of the slice's exponent lattice between
    its nonzero extremes; when the support stays away from x^0 on one side,
    the run adjacent to the origin is reported with an open end.  The pos/neg
    widths count absent lattice points on the positive resp. negative side of
    the widest such run; a side with no support at all (or an empty slice)
    gets the unbounded marker None.
    """
    support = {e for e, c in layer.items() if c}
    if not support:
        return GapEntry(
            mmax=0, pos_gap_width=None, neg_gap_width=None, gap_intervals=[(None, None)]
        )
    step = _lattice_step(support)
    idx = {int(e / step) for e in support}
    lo, hi = min(idx), max(idx)
    runs = []
    run_start = None
    for i in range(lo, hi + 1):
        if i not in idx:
            if run_start is None:
                run_start = i
        elif run_start is not None:
            runs.append((run_start, i - 1))
            run_start = None
    if lo > 0:
        runs.insert(0, (None, lo - 1))
    if hi < 0:
        runs.append((hi + 1, None))

    def side_width(run, sign):
        a, b = run
        if sign > 0:
            if b is None:
                return None  # no support above: unbounded positive run
            start = 1 if a is None else max(a, 1)
            return max(0, b - start + 1)
        if a is None:
            return None  # no support below: unbounded negative run
        end = -1 if b is None else min(b, -1)
        return max(0, end - a + 1)

    def best(sign):
        widths = [side_width(r, sign) for r in runs]
        if any(w is None for w in widths):
            return None
        return max(widths, default=0)

    intervals = [
        (None if a is None else a * step, None if b is None else b * step)
        for a, b in runs
    ]
    return GapEntry(
        mmax=0,
        pos_gap_width=best(+1),
        neg_gap_width=best(-1),
        gap_intervals=intervals,
    )


def gap_sweep(apoly: APoly, knots: KnotSum, mmax_list, q_powers, map_fn=map) -> list:
    """Gap structure of raw q-slices of the recursion total along a sweep."""
    mmax_list = list(mmax_list)
    if any(b <= a for a, b in zip(mmax_list, mmax_list[1:])):
        raise SchemaError("mmax list must be strictly increasing")
    q_powers = [Fraction(v) for v in q_powers]

    def one_bound(mmax):
        f = fk_factor_product(knots, mmax)
        total, _ = apply_recursion(apoly, f)
        row = []
        for v in q_powers:
            entry = analyze_gaps(slice_q(total, v))
            entry.mmax = mmax
            row.append(entry)
        return row

    rows = list(map_fn(one_bound, mmax_list))
    reports = []
    for idx, v in enumerate(q_powers):
        rep = GapReport(operator=apoly.name, knot=str(knots), q_power=v)
        for row in rows:
            rep.per_bound.append(row[idx])
        reports.append(rep)
    return reports


def recursion_term_slices(terms, axis: str, value) -> list:
    """Per-shift slices of the recursion terms, for side-by-side inspection."""
    value = Fraction(value)
    out = []
    for j, t in enumerate(terms):
        layer = slice_q(t, value) if axis == "q" else slice_x(t, value)
        out.append(RecursionTermSlice(j=j, slice=layer))
    return out


def perturb_apoly(apoly: APoly, j: int = 1, index: int = 0) -> APoly:
    """Flip the sign of one coefficient monomial (negative-control operator)."""
    coeffs = list(apoly.coeffs)
    target = coeffs[j]
    items = target.sorted_terms()
    key, c = items[index]
    terms = dict(target.terms)
    terms[key] = -c
    coeffs[j] = Series(terms)
    return APoly(name=apoly.name + " (perturbed)", coeffs=tuple(coeffs),
                 source_knot=apoly.source_knot)


# --- report serialization -------------------------------------------------------

def cancellation_to_dict(rep: CancellationReport) -> dict:
    return {
        "operator": rep.operator,
        "knot": rep.knot,
        "mMaxSweep": rep.mmax_sweep,
        "perXPower": {
            fmt_rat(x0): [
                {
                    "mMax": e.mmax,
                    "minSurvivingQ": None
                    if e.min_surviving_q is None
                    else fmt_rat(e.min_surviving_q),
                    "trustedUpTo": None
                    if e.trusted_up_to is None
                    else fmt_rat(e.trusted_up_to),
                    "allCancelledWithinTrust": e.all_cancelled_within_trust,
                }
                for e in entries
            ]
            for x0, entries in rep.per_x_power.items()
        },
    }


def cancellation_to_csv(rep: CancellationReport) -> str:
    lines = ["xPower,mMax,minSurvivingQ"]
    for x0 in rep.x_powers:
        for e in rep.per_x_power[x0]:
            val = "all-cancelled" if e.min_surviving_q is None else fmt_rat(e.min_surviving_q)
            lines.append(f"{fmt_rat(x0)},{e.mmax},{val}")
    return "\n".join(lines) + "\n"


def gaps_to_dict(reports: list) -> dict:
    def iv(bound):
        a, b = bound
        return [None if a is None else fmt_rat(a), None if b is None else fmt_rat(b)]

    return {
        "reports": [
            {
                "operator": r.operator,
                "knot": r.knot,
                "qPower": fmt_rat(r.q_power),
                "perBound": [
                    {
                        "mMax": e.mmax,
                        "posGapWidth": e.pos_gap_width,
                        "negGapWidth": e.neg_gap_width,
                        "gapIntervals": [iv(b) for b in e.gap_intervals],
                    }
                    for e in r.per_bound
                ],
            }
            for r in reports
        ]
    }


def gaps_to_csv(reports: list) -> str:
    lines = ["qPower,mMax,posGapWidth,negGapWidth"]
    for r in reports:
        for e in r.per_bound:
            pos = "all" if e.pos_gap_width is None else e.pos_gap_width
            neg = "all" if e.neg_gap_width is None else e.neg_gap_width
            lines.append(f"{fmt_rat(r.q_power)},{e.mmax},{pos},{neg}")
    return "\n".join(lines) + "\n"
