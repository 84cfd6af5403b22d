from fractions import Fraction

import mpmath as mp
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import antisym_series, half_lattice_series
from fkq.errors import InsufficientWindow, InvalidTorusParams, NonIntegerExponent
from fkq.knots import parse_knot
from fkq.qlaurent import NEG_INF, Series, add
from fkq.wrt import RootContext, SurgeryProblem, z_cs
mp.mp.prec = 300  # ambient precision for reference values in comparisons

from fkq.zhat import (
    LaplaceSpec,
    ZhatSeries,
    default_d_exp,
    extrapolate_limit,
    fit_normalization,
    laplace,
    mmax_for_qdepth,
    zcs_from_zhat,
    zhat_for_depth,
    zhat_minus_one_surgery,
)

H = Fraction(1, 2)


class TestLaplace:
    def test_minus_one_surgery_image(self):
        out = laplace(Series.monomial(1, xexp=2, qexp=3), LaplaceSpec(p=-1))
        assert out.series.terms == {(Fraction(0), Fraction(7)): Fraction(1)}

    def test_minus_one_keeps_every_integer_power(self):
        f = Series({(u, 0): 1 for u in range(-3, 4)})
        out = laplace(f, LaplaceSpec(p=-1))
        # images are u^2: -3..3 collapse onto {0,1,4,9} with multiplicity
        assert out.series.terms == {
            (Fraction(0), Fraction(0)): Fraction(1),
            (Fraction(0), Fraction(1)): Fraction(2),
            (Fraction(0), Fraction(4)): Fraction(2),
            (Fraction(0), Fraction(9)): Fraction(2),
        }

    def test_parity_filter(self):
        out = laplace(Series.monomial(1, xexp=2, qexp=0), LaplaceSpec(p=2, r=1, b=1))
        assert out.series.is_zero()

    def test_off_lattice_rejected(self):
        with pytest.raises(NonIntegerExponent):
            laplace(Series.monomial(1, xexp=Fraction(1, 3)), LaplaceSpec(p=-1))

    def test_spec_validation(self):
        with pytest.raises(InvalidTorusParams):
            LaplaceSpec(p=0)
        with pytest.raises(InvalidTorusParams):
            LaplaceSpec(p=2, r=4)

    @given(half_lattice_series(), half_lattice_series())
    def test_linearity(self, f, g):
        spec = LaplaceSpec(p=-1)
        lhs = laplace(add(f, g), spec)
        rhs = add(laplace(f, spec).series, laplace(g, spec).series)
        assert lhs.series.terms == rhs.terms

    @given(half_lattice_series())
    def test_minus_one_never_filters(self, f):
        # for p=-1 no integer-lattice source is dropped, so the transform
        # preserves the total coefficient mass through merging
        integral = Series(
            {(u, v): c for (u, v), c in f.terms.items() if u.denominator == 1}
        )
        out = laplace(integral, LaplaceSpec(p=-1))
        assert sum(out.series.terms.values(), Fraction(0)) == sum(
            integral.terms.values(), Fraction(0)
        )

    @given(half_lattice_series())
    def test_images_never_drop_for_minus_one(self, f):
        # with v >= 0 inputs the image exponent v + u^2 never decreases
        shifted = Series(
            {(u, abs(v)): c for (u, v), c in f.terms.items() if u.denominator == 1}
        )
        out = laplace(shifted, LaplaceSpec(p=-1))
        if shifted.terms and out.series.terms:
            assert min(v for (_, v) in out.series.terms) >= min(
                v for (_, v) in shifted.terms
            )

    def test_window_maps_through(self):
        f = Series({(1, 0): 1}, qwindow=(NEG_INF, Fraction(50)))
        out = laplace(f, LaplaceSpec(p=-1))
        assert out.series.qwindow == (NEG_INF, Fraction(50))

    def test_two_sided_window_collapses(self):
        f = Series({(1, 0): 1}, qwindow=(Fraction(-50), Fraction(50)))
        out = laplace(f, LaplaceSpec(p=-1))
        assert out.series.qwindow[0] > out.series.qwindow[1]


class TestSurgerySeries:
    def test_leading_terms_trefoil_pair(self):
        z = zhat_minus_one_surgery(parse_knot("T(2,3)#T(2,3)"), 31)
        lead = {v: c for (_, v), c in z.series.terms.items() if v <= 5}
        assert lead == {
            Fraction(0): Fraction(-1, 2),
            Fraction(1): Fraction(1, 2),
            Fraction(2): Fraction(-1, 2),
            Fraction(4): Fraction(-3, 2),
            Fraction(5): Fraction(1),
        }
        assert z.sign == 1 and z.d_exp == 2

    def test_default_normalization_exponents(self):
        assert default_d_exp(parse_knot("T(2,3)#T(2,3)")) == 2
        assert default_d_exp(parse_knot("T(2,3)#T(2,5)")) == 3

    def test_depth_helper_window(self):
        ks = parse_knot("T(2,3)#T(2,5)")
        mmax = mmax_for_qdepth(ks, 500)
        z = zhat_minus_one_surgery(ks, mmax)
        assert z.series.qwindow[1] >= 500

    def test_empty_truncation_gives_empty_series(self):
        z = zhat_minus_one_surgery(parse_knot("T(3,5)"), 1)
        assert z.series.is_zero()

    @given(antisym_series(max_terms=3), antisym_series(max_terms=3))
    def test_transform_additive_on_integrands(self, f, g):
        spec = LaplaceSpec(p=-1)
        joint = laplace(add(f, g), spec).series.terms
        split = add(laplace(f, spec).series, laplace(g, spec).series).terms
        assert joint == split


class TestExtrapolation:
    def test_finite_polynomial_exact_both_methods(self):
        z = ZhatSeries(series=Series({(0, 0): 1, (0, 1): 1}), b=0)
        ctx = RootContext(3)
        expected = 1 + ctx.q_power(1)
        for method in ("radial-fit", "partial-sum-average"):
            est = extrapolate_limit(z, 3, 100, method=method, norm_mul=1, norm_qpow=0)
            assert abs(est.value - expected) < mp.mpf(2) ** -200
            assert est.diagnostics

    def test_insufficient_window(self):
        z = zhat_minus_one_surgery(parse_knot("T(2,3)#T(2,3)"), 13)
        with pytest.raises(InsufficientWindow):
            extrapolate_limit(z, 3, 10_000)

    def test_unknown_method(self):
        z = zhat_minus_one_surgery(parse_knot("T(2,3)#T(2,3)"), 13)
        with pytest.raises(InvalidTorusParams):
            extrapolate_limit(z, 3, 5, method="nope")

    def test_zero_estimate_maps_to_zero(self):
        z = ZhatSeries(series=Series.zero(), b=0)
        est = extrapolate_limit(z, 3, 10, norm_mul=2, norm_qpow=-2)
        assert zcs_from_zhat(est) == 0


class TestCalibration:
    def test_fit_recovers_conventions(self):
        assert fit_normalization(parse_knot("T(2,3)#T(2,3)")) == (1, 2)
        assert fit_normalization(parse_knot("T(2,3)#T(2,5)")) == (1, 3)


REDUCED_TOL = 1e-1


@pytest.mark.parametrize("k", [3, 4])
def test_reduced_profile_agrees_with_analytic(k):
    ks = parse_knot("T(2,3)#T(2,3)")
    z = zhat_for_depth(ks, 2000)
    est = extrapolate_limit(z, k, 2000, method="partial-sum-average")
    series_val = zcs_from_zhat(est)
    analytic = z_cs(SurgeryProblem(ks, -1, k))
    assert abs(series_val - analytic) <= REDUCED_TOL


@pytest.mark.slow
@pytest.mark.parametrize(
    "k,n_trunc",
    [(3, 25000), (4, 25000), (5, 25000)],
)
def test_second_knot_full_profile(k, n_trunc):
    ks = parse_knot("T(2,3)#T(2,5)")
    z = zhat_for_depth(ks, n_trunc)
    est = extrapolate_limit(z, k, n_trunc, degree=2)
    series_val = zcs_from_zhat(est)
    analytic = z_cs(SurgeryProblem(ks, -1, k))
    assert abs(series_val - analytic) <= 2e-2


# --- property tests shared with the acceptance harness ---------------------------

@given(antisym_series(), st.integers(-4, 4).filter(bool), st.integers(-8, 8))
def test_laplace_label_periodic_mod_p(f, p, b):
    a = laplace(f, LaplaceSpec(p=p, r=1, b=b))
    c = laplace(f, LaplaceSpec(p=p, r=1, b=b + p))
    assert a.series.terms == c.series.terms


@given(
    st.lists(
        st.tuples(st.integers(0, 12), st.integers(-9, 9).filter(bool)),
        min_size=0,
        max_size=6,
    ),
    st.sampled_from([3, 4, 5, 7]),
)
@settings(max_examples=100)
def test_extrapolation_exact_on_finite_polynomials(entries, k):
    terms = {}
    for e, c in entries:
        terms[(Fraction(0), Fraction(e))] = terms.get((Fraction(0), Fraction(e)), 0) + c
    z = ZhatSeries(series=Series(terms), b=0)
    ctx = RootContext(k)
    direct = mp.mpc(0)
    for (_, v), c in z.series.terms.items():
        direct += int(c) * ctx.q_power(v)
    vals = [
        extrapolate_limit(z, k, 64, method=m, norm_mul=1, norm_qpow=0).value
        for m in ("radial-fit", "partial-sum-average")
    ]
    assert abs(vals[0] - direct) < mp.mpf(2) ** -200
    assert abs(vals[0] - vals[1]) < mp.mpf(2) ** -200
