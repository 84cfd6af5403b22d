"""Torus knots, connected sums, their two-variable series and colored Jones.

The series invariant of a right-handed torus knot T(s,t), 2 <= s < t,
gcd(s,t) = 1, is the antisymmetric x-expansion

    F(x,q) = 1/2 * sum over odd m >= 1 of
             eps(m) * (x^(m/2) - x^(-m/2)) * q^((m^2 - (st-s-t)^2) / (4st))

where eps(m) is -1 for m congruent to st+s+t or st-s-t mod 2st, +1 for
st+s-t or st-s+t, and 0 otherwise.  All q-exponents in this sum are
non-negative integers.  The left-handed mirror T(s,-t) is obtained by
substituting q -> 1/q in the coefficient functions.

A connected sum multiplies the factors' series and divides by the
antisymmetric unit x^(1/2) - x^(-1/2) once per splice:

    F(K1 # K2) = F(K1) * F(K2) / (x^(1/2) - x^(-1/2)).

The sl(2) colored Jones polynomial of T(s,t) at color n is the terminating
sum

    J_n = -(q^(-st n^2/4) q^((s-1)(t-1)/2) / (q^(n/2) - q^(-n/2)))
          * sum_{r=0}^{stn} eps(st n - r) q^((r^2 - (st-s-t)^2)/(4st)),

an exact Laurent object in q after a zero-remainder division; it is 1 at
n = 1 and multiplicative under connected sum.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from .errors import InvalidTorusParams, KnotSyntaxError, NonzeroRemainder, SchemaError
from .qlaurent import (
    NEG_INF,
    Series,
    div_antisym,
    fmt_rat,
    invert_q,
    mul,
    series_from_dict,
    series_to_dict,
)


@dataclass(frozen=True)
class TorusKnot:
    s: int
    t: int

    def __post_init__(self):
        if not (isinstance(self.s, int) and isinstance(self.t, int)):
            raise InvalidTorusParams("torus parameters must be integers")
        if self.t == 0 or not (2 <= self.s < abs(self.t)):
            raise InvalidTorusParams(
                f"need 2 <= s < |t|, got s={self.s}, t={self.t}"
            )
        if gcd(self.s, abs(self.t)) != 1:
            raise InvalidTorusParams(
                f"s and t must be coprime, got gcd={gcd(self.s, abs(self.t))}"
            )

    @property
    def right_handed(self) -> bool:
        return self.t > 0

    def mirror(self) -> "TorusKnot":
        return TorusKnot(self.s, -self.t)

    def __str__(self):
        return f"T({self.s},{self.t})"


@dataclass(frozen=True)
class KnotSum:
    factors: tuple

    def __post_init__(self):
        if not self.factors:
            raise InvalidTorusParams("a connected sum needs at least one factor")
        object.__setattr__(self, "factors", tuple(self.factors))

    def __str__(self):
        return "#".join(str(k) for k in self.factors)

    def __iter__(self):
        return iter(self.factors)

    def __len__(self):
        return len(self.factors)


@dataclass(frozen=True)
class FkTruncation:
    mmax: int
    series: Series
    knot: KnotSum


def epsilon(knot: TorusKnot, m: int) -> int:
    """Residue-class sign selecting the contributing odd powers.

    Defined for right-handed knots only; mirrors are handled at the series
    level by the q -> 1/q substitution.
    """
    if knot.t < 0:
        raise InvalidTorusParams("epsilon is defined for t > 0; use the mirror rule")
    if m < 0:
        raise InvalidTorusParams("m must be non-negative")
    s, t = knot.s, knot.t
    period = 2 * s * t
    r = m % period
    if r == (s * t + s + t) % period or r == (s * t - s - t) % period:
        return -1
    if r == (s * t + s - t) % period or r == (s * t - s + t) % period:
        return 1
    return 0


def _next_exponent(knot: TorusKnot, mmax: int) -> int:
    """q-exponent of the first contributing term dropped by the truncation."""
    s, t = knot.s, abs(knot.t)
    right = TorusKnot(s, t)
    a2 = (s * t - s - t) ** 2
    m = mmax + 1 if (mmax + 1) % 2 == 1 else mmax + 2
    while True:
        if epsilon(right, m):
            return (m * m - a2) // (4 * s * t)
        m += 2


def fk_torus(knot: TorusKnot, mmax: int) -> FkTruncation:
    """Truncation of the torus-knot series over odd m <= mmax.

    The result is exact for every x-degree in [-mmax/2, mmax/2], and exact at
    every x-degree for q-degrees up to (first omitted exponent) - 1; the
    mirror case negates the q-window.
    """
    if mmax < 1:
        raise InvalidTorusParams("mmax must be >= 1")
    s, t = knot.s, abs(knot.t)
    right = TorusKnot(s, t)
    a2 = (s * t - s - t) ** 2
    terms = {}
    for m in range(1, mmax + 1, 2):
        e = epsilon(right, m)
        if not e:
            continue
        qexp = Fraction(m * m - a2, 4 * s * t)
        c = Fraction(e, 2)
        terms[(Fraction(m, 2), qexp)] = c
        terms[(Fraction(-m, 2), qexp)] = -c
    qhi = Fraction(_next_exponent(knot, mmax) - 1)
    series = Series(terms, (NEG_INF, qhi), (Fraction(-mmax, 2), Fraction(mmax, 2)))
    if knot.t < 0:
        series = invert_q(series)
    return FkTruncation(mmax, series, KnotSum((knot,)))


def fk_factor_product(knots: KnotSum, mmax: int) -> Series:
    """Product of the factors' truncated series (no connected-sum division).

    This is the object annihilated by the recursion operators and fed to the
    surgery transform; it equals the connected-sum series multiplied back by
    x^(1/2) - x^(-1/2).
    """
    out = None
    for k in knots:
        f = fk_torus(k, mmax).series
        out = f if out is None else mul(out, f)
    return out


def fk_connected_sum(knots: KnotSum, mmax: int) -> FkTruncation:
    """Left fold of the product rule over the factors.

    Each splice divides by the antisymmetric unit; a NonzeroRemainder inside
    the trusted window would mean the product rule failed on exact data.
    """
    if mmax < 1:
        raise InvalidTorusParams("mmax must be >= 1")
    out = None
    for k in knots:
        f = fk_torus(k, mmax).series
        out = f if out is None else div_antisym(mul(out, f))
    return FkTruncation(mmax, out, knots)


def jones_torus(knot: TorusKnot, n: int) -> Series:
    """Colored Jones polynomial at color n, as an x-free exact Series.

    Evaluates the terminating sum and performs the division by
    q^(n/2) - q^(-n/2) exactly; the division has zero remainder for every
    valid torus knot, so a NonzeroRemainder here is an implementation error.
    Mirrors substitute q -> 1/q.
    """
    if n < 1:
        raise InvalidTorusParams("color n must be >= 1")
    s, t = knot.s, abs(knot.t)
    right = TorusKnot(s, t)
    a2 = (s * t - s - t) ** 2
    prefactor_exp = Fraction(-s * t * n * n, 4) + Fraction((s - 1) * (t - 1), 2)
    num: dict = {}
    for r in range(0, s * t * n + 1):
        e = epsilon(right, s * t * n - r)
        if not e:
            continue
        qexp = prefactor_exp + Fraction(r * r - a2, 4 * s * t)
        num[qexp] = num.get(qexp, Fraction(0)) - e
    quo = _divide_q_binomial(num, Fraction(n, 2))
    series = Series({(Fraction(0), e): c for e, c in quo.items()})
    if knot.t < 0:
        series = invert_q(series)
    return series


def _divide_q_binomial(num: dict, h: Fraction) -> dict:
    """Exact division of a q-Laurent map by q^h - q^(-h), zero remainder."""
    if not num:
        return {}
    quo: dict = {}
    rem = dict(num)
    floor = min(num) + h
    while rem:
        e = max(rem)
        if e < floor:
            raise NonzeroRemainder(
                f"colored Jones division left remainder near q^{fmt_rat(e)}"
            )
        c = rem.pop(e)
        quo[e - h] = quo.get(e - h, Fraction(0)) + c
        low = e - 2 * h
        acc = rem.get(low, Fraction(0)) + c
        if acc:
            rem[low] = acc
        elif low in rem:
            del rem[low]
    return quo


def jones_knotsum(knots: KnotSum, n: int) -> Series:
    """Colored Jones of a connected sum: the product of the factors'."""
    out = Series.monomial(1)
    for k in knots:
        out = mul(out, jones_torus(k, n))
    return out


# --- knot expression parser ---------------------------------------------------

def parse_knot(text: str) -> KnotSum:
    """Parse 'T(s,t)' expressions joined by '#', whitespace insensitive."""
    pos = 0
    n = len(text)

    def skip_ws(p):
        while p < n and text[p].isspace():
            p += 1
        return p

    def expect(p, literal):
        p = skip_ws(p)
        if not text.startswith(literal, p):
            raise KnotSyntaxError(p, repr(literal), text)
        return p + len(literal)

    def parse_int(p):
        p = skip_ws(p)
        m = re.match(r"-?\d+", text[p:])
        if not m:
            raise KnotSyntaxError(p, "an integer", text)
        return int(m.group()), p + m.end()

    def parse_one(p):
        p = expect(p, "T")
        p = expect(p, "(")
        s, p = parse_int(p)
        p = expect(p, ",")
        t, p = parse_int(p)
        p = expect(p, ")")
        return TorusKnot(s, t), p

    factors = []
    knot, pos = parse_one(pos)
    factors.append(knot)
    pos = skip_ws(pos)
    while pos < n:
        pos = expect(pos, "#")
        knot, pos = parse_one(pos)
        factors.append(knot)
        pos = skip_ws(pos)
    return KnotSum(tuple(factors))


# --- serialization -------------------------------------------------------------

def fk_to_dict(trunc: FkTruncation) -> dict:
    d = series_to_dict(trunc.series)
    d["mMax"] = trunc.mmax
    d["knot"] = str(trunc.knot)
    return d


def fk_from_dict(d: dict) -> FkTruncation:
    try:
        mmax = int(d["mMax"])
        knot = parse_knot(d["knot"])
    except KeyError as exc:
        raise SchemaError(f"missing field {exc}") from exc
    return FkTruncation(mmax, series_from_dict(d), knot)


def fk_to_json(trunc: FkTruncation) -> str:
    return json.dumps(fk_to_dict(trunc), sort_keys=True)
