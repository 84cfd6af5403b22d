"""Analytic WRT invariants of integer surgeries at roots of unity.

Everything here evaluates exact q-Laurent data numerically at q = e^(2 pi i/k)
with arbitrary-precision complex arithmetic (mpmath).  Fractional powers use
the rational-exponent convention q^e := e^(2 pi i e / k), fixed by the
exponent rather than a complex logarithm.

The integer-slope surgery value is

    tau_k = sum_{n=1}^{k-1} [n]^2 q^(p(n^2-1)/4) J_n(K)
            / sum_{n=1}^{k-1} [n]^2 q^(sign(p)(n^2-1)/4),

with the quantum integer [n] = (q^(n/2) - q^(-n/2)) / (q^(1/2) - q^(-1/2))
and J_n the colored Jones value of the (possibly composite) knot, and

    Z_CS = -i (q^(1/2) - q^(-1/2)) / sqrt(2k) * tau_k.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import mpmath as mp

from .errors import DegenerateDenominator, InvalidTorusParams, NotXFree
from .knots import KnotSum, jones_torus
from .qlaurent import Series, as_rat

DEFAULT_PRECISION_BITS = 256


@dataclass
class RootContext:
    """Primitive k-th root of unity with a cached rational-exponent evaluator."""

    k: int
    precision_bits: int = DEFAULT_PRECISION_BITS
    _phase_cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.k < 3:
            raise InvalidTorusParams("level k must be >= 3")
        q = self.q_power(Fraction(1))
        with mp.workprec(self.precision_bits):
            tol = mp.mpf(2) ** (-self.precision_bits // 2)
            if abs(q**self.k - 1) > tol:
                raise DegenerateDenominator("root of unity self-check failed")
            for j in range(1, self.k):
                if abs(q**j - 1) <= tol:
                    raise DegenerateDenominator("root of unity is not primitive")

    @property
    def q(self):
        return self.q_power(Fraction(1))

    def q_power(self, e):
        """q^e = e^(2 pi i e / k) at the context precision."""
        e = as_rat(e)
        r = e - self.k * (e / self.k).__floor__()  # e mod k, exact
        hit = self._phase_cache.get(r)
        if hit is not None:
            return hit
        with mp.workprec(self.precision_bits):
            val = mp.expjpi(2 * mp.mpf(r.numerator) / (r.denominator * self.k))
        self._phase_cache[r] = val
        return val


@dataclass(frozen=True)
class SurgeryProblem:
    knot: KnotSum
    p: int
    k: int
    precision_bits: int = DEFAULT_PRECISION_BITS

    def __post_init__(self):
        if self.p == 0:
            raise InvalidTorusParams("surgery slope p must be nonzero")


def eval_series_at_root(f: Series, ctx: RootContext):
    """Sum of coeff * q^(qExp) over an x-free series, ascending exponents."""
    total = mp.mpc(0)
    with mp.workprec(ctx.precision_bits):
        for (u, v), c in f.sorted_terms():
            if u != 0:
                raise NotXFree(f"series has x-degree {u}")
            total += (mp.mpf(c.numerator) / c.denominator) * ctx.q_power(v)
    return total


def bracket(n: int, ctx: RootContext):
    """Quantum integer [n] = (q^(n/2) - q^(-n/2)) / (q^(1/2) - q^(-1/2))."""
    if not 1 <= n <= ctx.k - 1:
        raise InvalidTorusParams(f"need 1 <= n <= k-1, got n={n}")
    with mp.workprec(ctx.precision_bits):
        half = Fraction(1, 2)
        num = ctx.q_power(Fraction(n, 2)) - ctx.q_power(Fraction(-n, 2))
        den = ctx.q_power(half) - ctx.q_power(-half)
        return num / den


def tau_from_jones(jones_at, p: int, ctx: RootContext):
    """Surgery formula given a callable n -> J_n value at the root.

    Deterministic ascending-n summation; the denominator is guarded against
    catastrophic loss at the working precision.
    """
    sign = 1 if p > 0 else -1
    with mp.workprec(ctx.precision_bits):
        num = mp.mpc(0)
        den = mp.mpc(0)
        for n in range(1, ctx.k):
            br2 = bracket(n, ctx) ** 2
            num += br2 * ctx.q_power(Fraction(p * (n * n - 1), 4)) * jones_at(n)
            den += br2 * ctx.q_power(Fraction(sign * (n * n - 1), 4))
        guard = mp.mpf(10) ** (-(ctx.precision_bits // 4))
        if abs(den) <= guard:
            raise DegenerateDenominator(
                f"surgery denominator below guard at k={ctx.k}"
            )
        return num / den


def _jones_value(knot_sum: KnotSum, n: int, ctx: RootContext):
    value = mp.mpc(1)
    for k in knot_sum:
        value *= eval_series_at_root(jones_torus(k, n), ctx)
    return value


def wrt_surgery(prob: SurgeryProblem):
    """tau_k of the p-surgery on the knot, at a primitive k-th root."""
    ctx = RootContext(prob.k, prob.precision_bits)
    return tau_from_jones(lambda n: _jones_value(prob.knot, n, ctx), prob.p, ctx)


def z_cs(prob: SurgeryProblem):
    """Chern-Simons-normalized value -i (q^(1/2) - q^(-1/2)) / sqrt(2k) * tau_k."""
    ctx = RootContext(prob.k, prob.precision_bits)
    tau = tau_from_jones(lambda n: _jones_value(prob.knot, n, ctx), prob.p, ctx)
    with mp.workprec(prob.precision_bits):
        half = Fraction(1, 2)
        pref = -1j * (ctx.q_power(half) - ctx.q_power(-half)) / mp.sqrt(2 * prob.k)
        return pref * tau
