from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from fkq.qlaurent import Series

settings.register_profile(
    "exact",
    max_examples=100,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("exact")

small_rats = st.fractions(
    min_value=Fraction(-6), max_value=Fraction(6), max_denominator=4
)
coeffs = st.fractions(
    min_value=Fraction(-9), max_value=Fraction(9), max_denominator=8
).filter(bool)


@st.composite
def series_terms(draw, max_terms=6):
    n = draw(st.integers(min_value=0, max_value=max_terms))
    terms = {}
    for _ in range(n):
        key = (draw(small_rats), draw(small_rats))
        terms[key] = draw(coeffs)
    return terms


@st.composite
def small_series(draw, max_terms=6):
    return Series(draw(series_terms(max_terms=max_terms)))


@st.composite
def half_lattice_series(draw, max_terms=6):
    """Series whose x-exponents lie on the half-integer lattice."""
    n = draw(st.integers(min_value=0, max_value=max_terms))
    terms = {}
    for _ in range(n):
        u = Fraction(draw(st.integers(min_value=-8, max_value=8)), 2)
        terms[(u, draw(small_rats))] = draw(coeffs)
    return Series(terms)


@st.composite
def antisym_series(draw, max_terms=4):
    """x-antisymmetric series with odd-half-integer x-exponents."""
    n = draw(st.integers(min_value=0, max_value=max_terms))
    terms = {}
    for _ in range(n):
        num = draw(st.integers(min_value=0, max_value=5)) * 2 + 1
        u = Fraction(num, 2)
        v = draw(small_rats)
        c = draw(coeffs)
        terms[(u, v)] = terms.get((u, v), Fraction(0)) + c
        terms[(-u, v)] = terms.get((-u, v), Fraction(0)) - c
    return Series(terms)


@pytest.fixture(scope="session")
def trefoil_pair_operator():
    from fkq.holonomy import load_bundled_apoly

    return load_bundled_apoly("T(2,3)#T(2,3)")
