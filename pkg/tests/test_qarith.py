from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from qtop.qarith import (
    ConductorError,
    CyclotomicField,
    CyclotomicNumber,
    ExcludedRootError,
    LaurentPolynomial,
    QContext,
    as_fraction,
    minimal_vanishing_index,
    q_complex,
    q_pow,
    rbar_for,
    root_params,
    super_binomial,
    super_bracket,
    super_factorial,
    super_pascal_holds,
    vanishing_sum,
)

ONE = LaurentPolynomial.constant(1)
V = LaurentPolynomial.monomial(1)


def test_super_bracket_small_values():
    assert super_bracket(0).is_zero()
    assert super_bracket(1) == ONE
    assert super_bracket(2) == LaurentPolynomial.monomial(-1) - V


def test_super_binomial_edges():
    assert all(super_binomial(n, 0) == ONE for n in range(41))
    assert super_binomial(3, 1) == super_bracket(3)
    assert super_binomial(4, 5).is_zero()


def test_super_binomial_matches_factorial_quotient():
    num = super_factorial(5)
    den = super_factorial(2) * super_factorial(3)
    assert super_binomial(5, 2) == num.exact_div(den)
    assert super_binomial(5, 2) * den == num


def test_exact_div_rejects_non_divisor():
    with pytest.raises(ValueError):
        (V + ONE).exact_div(V * V + ONE + ONE)


def test_pascal_and_vanishing_sum_up_to_40():
    for n in range(1, 41):
        for k in range(1, n + 1):
            assert super_pascal_holds(n, k) == (True, True)
    assert vanishing_sum(0) == ONE
    assert all(vanishing_sum(n).is_zero() for n in range(1, 41))


@pytest.mark.parametrize("r, rbar", [(5, 10), (6, 6), (8, 4), (12, 3), (16, 8), (3, 6), (7, 14)])
def test_rbar_spot_values(r, rbar):
    assert rbar_for(r) == rbar == minimal_vanishing_index(r)


def test_root_params_fields():
    p = root_params(5)
    assert (p.rbar, p.t, p.eps, p.rdot) == (10, 1, 2, 5)
    p = root_params(6)
    assert (p.rbar, p.t, p.eps, p.rdot) == (6, 2, 1, 3)
    assert root_params(16).rbar == 8
    assert not root_params(12).ribbon and root_params(16).zero_mod_eight


@pytest.mark.parametrize("r", [2, 4, 0, -5])
def test_excluded_roots(r):
    with pytest.raises(ExcludedRootError):
        root_params(r)


@pytest.mark.parametrize("r", [r for r in range(3, 40) if r != 4])
def test_bracket_vanishes_first_at_rbar(r):
    p = root_params(r)
    ctx = QContext(p, 2 * r)
    assert ctx.bracket(p.rbar).is_zero()
    assert all(not ctx.bracket(n).is_zero() for n in range(1, p.rbar))
    # q^{2 rbar} = (-1)^rbar
    assert ctx.q(2 * p.rbar) == ctx.rational((-1) ** p.rbar)


def test_q_pow_examples():
    p5 = root_params(5)
    assert q_pow(p5, 0) == q_pow(p5, 0).field.one()
    assert q_pow(p5, Fraction(5, 2)) == q_pow(p5, Fraction(5, 2)).field.rational(-1)
    z8 = q_pow(root_params(8), 1)
    assert z8**4 == z8.field.rational(-1)
    assert abs(z8.to_complex() - q_complex(8, 1)) < 1e-14


def test_context_refuses_insufficient_conductor():
    ctx = QContext(root_params(5), 10)
    with pytest.raises(ConductorError):
        ctx.q(Fraction(1, 3))


def test_conductor_cap_env(monkeypatch):
    monkeypatch.setenv("QTOP_CONDUCTOR_CAP", "8")
    with pytest.raises(ConductorError):
        CyclotomicField(9973)


def test_as_fraction_parses_strings():
    assert as_fraction("-2/5") == Fraction(-2, 5)
    assert as_fraction(3) == Fraction(3)


small_ints = st.integers(-6, 6)
laurent = st.dictionaries(st.integers(-5, 5), small_ints, max_size=5).map(LaurentPolynomial)


@settings(max_examples=60, deadline=None)
@given(laurent, laurent, laurent)
def test_laurent_ring_axioms(a, b, c):
    assert a * (b + c) == a * b + a * c
    assert (a * b) * c == a * (b * c)
    assert a * b == b * a
    if not b.is_zero():
        assert (a * b).exact_div(b) == a


@settings(max_examples=40, deadline=None)
@given(st.lists(st.fractions(min_value=-3, max_value=3, max_denominator=6), min_size=2, max_size=2))
def test_cyclotomic_exact_vs_float(zs):
    ctx = QContext.for_weights(root_params(7), zs)
    x = ctx.q(zs[0]) + ctx.q(zs[1]) * 3
    assert abs(x.to_complex() - (q_complex(7, zs[0]) + 3 * q_complex(7, zs[1]))) < 1e-10
    if not x.is_zero():
        assert x * x.inverse() == ctx.one()
    assert isinstance(x, CyclotomicNumber)
