"""Exact sparse arithmetic for two-variable Laurent objects in x and q.

A Series is a finite dict of monomials x^u q^v -> coefficient, with u, v and
the coefficients all exact rationals (fractions.Fraction).  Most objects in
this package are truncations of infinite series, so every Series carries two
trust windows recording where the stored data is guaranteed to agree with the
untruncated object:

  * qwindow = (lo, hi): for every x-degree, coefficients with q-degree inside
    the closed interval are exact.  This is the primary trust tracker; the
    constructors in `knots` produce objects whose dropped terms all live at
    q-degrees outside the window, and the propagation rules below keep that
    guarantee through add / mul / scale / invert_q / div_antisym.
  * xwindow = (lo, hi): the range of x-degrees the construction accounted
    for (finite for a single truncated knot series, Minkowski-added through
    products).  Used by shift_x, which shears q-degrees by j * x-degree and
    therefore can only bound the sheared window over a finite x-range.

Window endpoints are Fractions or +/-inf floats; an interval with lo > hi is
the empty window (trust nothing).  Terms are never discarded when a window
shrinks: raw truncation data outside the trusted region is exactly what the
cancellation and gap diagnostics in `holonomy` examine, so the windows are
metadata about exactness, not a filter.  shift_x with a nonzero shift is the
one operation after which the for-every-x reading of qwindow no longer holds;
its output is trusted only on the qwindow x xwindow rectangle, and `holonomy`
computes sharper per-x-power bounds itself.

Window propagation rules:
  add:      intersect both windows.
  mul:      Cauchy rule in q. Writing val/top for the lowest/highest stored
            q-degree of a factor, the product is exact up to
            min(a.hi + val(b), b.hi + val(a), a.hi + b.hi) and down from the
            mirror-image bound; if one factor is truncated above and the
            other below (a.hi and b.lo both finite, or vice versa), missing
            cross terms can land at any q-degree and the window is empty.
            xwindow is the Minkowski sum.
  shift_x:  qwindow shifted by j*x, bounded over the xwindow (worst case).
  scale_*:  windows shift with the exponents.
  invert_q: qwindow negated and swapped.

The zero series has universal windows (it is exactly zero everywhere), which
makes it the identity for window intersection.
"""

from __future__ import annotations

import json
from fractions import Fraction

from .errors import NonzeroRemainder, NotSymmetric, SchemaError

NEG_INF = float("-inf")
POS_INF = float("inf")

UNIVERSAL = (NEG_INF, POS_INF)
EMPTY_WINDOW = (POS_INF, NEG_INF)

Rat = Fraction


def as_rat(x) -> Fraction:
    """Coerce ints, strings like '3/4', and Fractions to Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise TypeError("floats are not exact; pass a Fraction, int or 'p/q' string")
    return Fraction(x)


def fmt_rat(x) -> str:
    x = as_rat(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def fmt_bound(b) -> str:
    if b == NEG_INF:
        return "-inf"
    if b == POS_INF:
        return "inf"
    return fmt_rat(b)


def parse_bound(s):
    if s == "-inf":
        return NEG_INF
    if s == "inf":
        return POS_INF
    return Fraction(s)


def win_is_empty(w) -> bool:
    return w[0] > w[1]


def win_contains(w, v) -> bool:
    return w[0] <= v <= w[1]


def win_intersect(a, b):
    return (max(a[0], b[0]), min(a[1], b[1]))


def win_shift(w, c):
    lo, hi = w
    return (lo if lo in (NEG_INF, POS_INF) else lo + c,
            hi if hi in (NEG_INF, POS_INF) else hi + c)


def _add_bound(a, b):
    # inf-safe sum used by the Minkowski and Cauchy rules; never mixes
    # opposite infinities (callers guard that case).
    if a in (NEG_INF, POS_INF):
        return a
    if b in (NEG_INF, POS_INF):
        return b
    return a + b


class Series:
    """Immutable-by-convention sparse two-variable Laurent object.

    terms maps (xExp, qExp) -> coeff with no zero coefficients stored.
    Operations never mutate their inputs.
    """

    __slots__ = ("terms", "qwindow", "xwindow")

    def __init__(self, terms=None, qwindow=UNIVERSAL, xwindow=UNIVERSAL):
        clean = {}
        if terms:
            items = terms.items() if isinstance(terms, dict) else terms
            for (u, v), c in items:
                key = (as_rat(u), as_rat(v))
                c = as_rat(c)
                if c:
                    acc = clean.get(key)
                    total = c if acc is None else acc + c
                    if total:
                        clean[key] = total
                    elif acc is not None:
                        del clean[key]
        self.terms = clean
        self.qwindow = qwindow
        self.xwindow = xwindow

    @classmethod
    def zero(cls) -> "Series":
        return cls()

    @classmethod
    def monomial(cls, coeff, xexp=0, qexp=0) -> "Series":
        return cls({(as_rat(xexp), as_rat(qexp)): as_rat(coeff)})

    def is_zero(self) -> bool:
        return not self.terms

    def coeff(self, u, v) -> Fraction:
        return self.terms.get((as_rat(u), as_rat(v)), Fraction(0))

    def q_valuation(self):
        return min(v for (_, v) in self.terms) if self.terms else None

    def q_top(self):
        return max(v for (_, v) in self.terms) if self.terms else None

    def x_valuation(self):
        return min(u for (u, _) in self.terms) if self.terms else None

    def x_top(self):
        return max(u for (u, _) in self.terms) if self.terms else None

    def trusted(self, u, v) -> bool:
        """True when the coefficient at x^u q^v is guaranteed exact."""
        return win_contains(self.qwindow, as_rat(v)) and win_contains(
            self.xwindow, as_rat(u)
        )

    def sorted_terms(self):
        return sorted(self.terms.items())

    def __eq__(self, other):
        if not isinstance(other, Series):
            return NotImplemented
        return (
            self.terms == other.terms
            and self.qwindow == other.qwindow
            and self.xwindow == other.xwindow
        )

    __hash__ = None  # unhashable, like a dict

    def __add__(self, other):
        return add(self, other)

    def __mul__(self, other):
        return mul(self, other)

    def __neg__(self):
        return Series(
            {k: -c for k, c in self.terms.items()}, self.qwindow, self.xwindow
        )

    def __sub__(self, other):
        return add(self, -other)

    def __repr__(self):
        nt = len(self.terms)
        return (
            f"Series({nt} term{'s' if nt != 1 else ''}, "
            f"q in [{fmt_bound(self.qwindow[0])}, {fmt_bound(self.qwindow[1])}], "
            f"x in [{fmt_bound(self.xwindow[0])}, {fmt_bound(self.xwindow[1])}])"
        )


def add(a: Series, b: Series) -> Series:
    """Termwise sum; zero results removed; windows intersected."""
    terms = dict(a.terms)
    for k, c in b.terms.items():
        acc = terms.get(k)
        total = c if acc is None else acc + c
        if total:
            terms[k] = total
        elif acc is not None:
            del terms[k]
    return Series(
        terms,
        win_intersect(a.qwindow, b.qwindow),
        win_intersect(a.xwindow, b.xwindow),
    )


def _mul_qwindow(a: Series, b: Series):
    # Missing content of a factor lives on the q-rays outside its window.
    # A high ray times a low ray reaches every q-degree: empty window.
    a_lo, a_hi = a.qwindow
    b_lo, b_hi = b.qwindow
    if (a_hi != POS_INF and b_lo != NEG_INF) or (b_hi != POS_INF and a_lo != NEG_INF):
        return EMPTY_WINDOW
    hi_candidates = []
    lo_candidates = []
    if a_hi != POS_INF:
        if b.terms:
            hi_candidates.append(a_hi + b.q_valuation())
        if b_hi != POS_INF:
            hi_candidates.append(a_hi + b_hi)
    if b_hi != POS_INF and a.terms:
        hi_candidates.append(b_hi + a.q_valuation())
    if a_lo != NEG_INF:
        if b.terms:
            lo_candidates.append(a_lo + b.q_top())
        if b_lo != NEG_INF:
            lo_candidates.append(a_lo + b_lo)
    if b_lo != NEG_INF and a.terms:
        lo_candidates.append(b_lo + a.q_top())
    hi = min(hi_candidates) if hi_candidates else POS_INF
    lo = max(lo_candidates) if lo_candidates else NEG_INF
    return (lo, hi)


def mul(a: Series, b: Series) -> Series:
    """Exact convolution of the term maps.

    The result's q-window follows the Cauchy-product validity rule (see the
    module docstring); its x-window is the Minkowski sum of the factors'.
    Multiplying by the exact zero series (universal windows) gives the exact
    zero back through the same rules.
    """
    out: dict = {}
    for (u1, v1), c1 in a.terms.items():
        for (u2, v2), c2 in b.terms.items():
            key = (u1 + u2, v1 + v2)
            c = c1 * c2
            acc = out.get(key)
            total = c if acc is None else acc + c
            if total:
                out[key] = total
            elif acc is not None:
                del out[key]
    xw = (
        _add_bound(a.xwindow[0], b.xwindow[0]),
        _add_bound(a.xwindow[1], b.xwindow[1]),
    )
    if win_is_empty(a.xwindow) or win_is_empty(b.xwindow):
        xw = EMPTY_WINDOW
    qw = _mul_qwindow(a, b)
    s = Series.zero()
    s.terms = out
    s.qwindow = qw
    s.xwindow = xw
    return s


def shift_x(a: Series, j: int) -> Series:
    """Substitute x -> x q^j: every term (u, v) moves to (u, v + j*u).

    The q-window shears with x-degree; the stored window is the worst case
    over the x-window, so it collapses to empty when the x-window is
    unbounded (and the input was not exact everywhere).
    """
    if not isinstance(j, int):
        raise TypeError("shift_x needs an integer power of q")
    if j == 0:
        return Series(dict(a.terms), a.qwindow, a.xwindow)
    terms = {(u, v + j * u): c for (u, v), c in a.terms.items()}
    if a.qwindow == UNIVERSAL:
        qw = UNIVERSAL
    elif win_is_empty(a.qwindow) or win_is_empty(a.xwindow):
        qw = EMPTY_WINDOW
    else:
        xlo, xhi = a.xwindow
        if xlo == NEG_INF or xhi == POS_INF:
            qw = EMPTY_WINDOW
        else:
            shear_lo = min(j * xlo, j * xhi)
            shear_hi = max(j * xlo, j * xhi)
            qw = (win_shift(a.qwindow, shear_hi)[0], win_shift(a.qwindow, shear_lo)[1])
            if qw[0] > qw[1]:
                qw = EMPTY_WINDOW
    return Series(terms, qw, a.xwindow)


def scale_x(a: Series, c) -> Series:
    """Multiply by the monomial x^c."""
    c = as_rat(c)
    return Series(
        {(u + c, v): k for (u, v), k in a.terms.items()},
        a.qwindow,
        win_shift(a.xwindow, c),
    )


def scale_q(a: Series, c) -> Series:
    """Multiply by the monomial q^c."""
    c = as_rat(c)
    return Series(
        {(u, v + c): k for (u, v), k in a.terms.items()},
        win_shift(a.qwindow, c),
        a.xwindow,
    )


def invert_q(a: Series) -> Series:
    """Substitute q -> 1/q (the mirror rule for coefficient functions)."""
    lo, hi = a.qwindow
    return Series(
        {(u, -v): c for (u, v), c in a.terms.items()},
        (-hi, -lo),
        a.xwindow,
    )


def slice_q(a: Series, v) -> dict:
    """Exact coefficient layer at fixed q-power: map xExp -> coeff."""
    v = as_rat(v)
    return {u: c for (u, w), c in a.terms.items() if w == v}


def slice_x(a: Series, u) -> dict:
    """Exact coefficient layer at fixed x-power: map qExp -> coeff."""
    u = as_rat(u)
    return {w: c for (t, w), c in a.terms.items() if t == u}


HALF = Fraction(1, 2)


def _divide_layer(layer: dict) -> tuple[dict, dict]:
    """Divide one q-layer (a Laurent polynomial in x) by x^(1/2) - x^(-1/2).

    Descending long division; returns (quotient, remainder).  For a layer
    divisible by the antisymmetric unit the remainder is empty.
    """
    quo: dict = {}
    rem = dict(layer)
    if not rem:
        return quo, rem
    floor = min(rem) + HALF
    while rem:
        e = max(rem)
        if e < floor:
            break
        c = rem.pop(e)
        qe = e - HALF
        quo[qe] = quo.get(qe, Fraction(0)) + c
        low = e - 1
        acc = rem.get(low, Fraction(0)) + c
        if acc:
            rem[low] = acc
        elif low in rem:
            del rem[low]
    return quo, rem


def div_antisym(a: Series) -> Series:
    """Exact quotient by x^(1/2) - x^(-1/2), layer by layer in q.

    The dividend must have a definite parity under x -> 1/x: x-symmetric
    (the connected-sum products, giving an antisymmetric quotient) or
    x-antisymmetric (telescoping identities, giving a symmetric quotient).
    Division is independent per q-layer, so the q-window passes through
    unchanged while the x-window shrinks by 1/2 at each end.  A nonzero
    remainder on a layer inside the trusted q-window means the product
    structure the quotient relies on is broken (a violated product identity
    or a window bug) and raises NonzeroRemainder; remainders on untrusted
    layers are raw truncation junk and are discarded.
    """
    symmetric = all(
        a.terms.get((-u, v), Fraction(0)) == c for (u, v), c in a.terms.items()
    )
    antisymmetric = all(
        a.terms.get((-u, v), Fraction(0)) == -c for (u, v), c in a.terms.items()
    )
    if not (symmetric or antisymmetric):
        raise NotSymmetric(
            "dividend has no definite parity under x -> 1/x"
        )
    layers: dict = {}
    for (u, v), c in a.terms.items():
        layers.setdefault(v, {})[u] = c
    out: dict = {}
    for v, layer in layers.items():
        quo, rem = _divide_layer(layer)
        if rem and win_contains(a.qwindow, v):
            raise NonzeroRemainder(
                f"layer q^{fmt_rat(v)} inside the trusted window is not divisible"
            )
        for u, c in quo.items():
            if c:
                out[(u, v)] = c
    xlo, xhi = a.xwindow
    xw = (
        xlo if xlo in (NEG_INF, POS_INF) else xlo + HALF,
        xhi if xhi in (NEG_INF, POS_INF) else xhi - HALF,
    )
    return Series(out, a.qwindow, xw)


# --- canonical serialization -------------------------------------------------

def series_to_dict(a: Series) -> dict:
    return {
        "terms": [
            [fmt_rat(u), fmt_rat(v), fmt_rat(c)] for (u, v), c in a.sorted_terms()
        ],
        "qWindow": [fmt_bound(a.qwindow[0]), fmt_bound(a.qwindow[1])],
        "xWindow": [fmt_bound(a.xwindow[0]), fmt_bound(a.xwindow[1])],
    }


def series_from_dict(d: dict) -> Series:
    try:
        terms = {(Fraction(u), Fraction(v)): Fraction(c) for u, v, c in d["terms"]}
        qw = (parse_bound(d["qWindow"][0]), parse_bound(d["qWindow"][1]))
        xw = (parse_bound(d["xWindow"][0]), parse_bound(d["xWindow"][1]))
    except (KeyError, ValueError, TypeError) as exc:
        raise SchemaError(f"malformed series object: {exc}") from exc
    return Series(terms, qw, xw)


def series_to_json(a: Series) -> str:
    return json.dumps(series_to_dict(a), sort_keys=True)


def series_from_json(text: str) -> Series:
    return series_from_dict(json.loads(text))


def slice_to_csv(layer: dict) -> str:
    """CSV export of a slice map: exponent, coefficient, sorted by exponent."""
    lines = ["exponent,coefficient"]
    for e in sorted(layer):
        lines.append(f"{fmt_rat(e)},{fmt_rat(layer[e])}")
    return "\n".join(lines) + "\n"
