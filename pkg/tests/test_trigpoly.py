import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from zerofree.exceptions import DomainError, MembershipError
from zerofree.trigpoly import (
    CosinePolynomial,
    SpectralFactor,
    apply_step,
    autocorrelation,
    cosine_from_factor,
    evaluate,
    evaluate_factor,
    from_product_form,
    is_member,
    landau_objective,
    membership_check,
    min_value,
    require_member,
)

finite = st.floats(min_value=-10.0, max_value=10.0, allow_nan=False, allow_infinity=False)
tails = arrays(np.float64, st.integers(min_value=1, max_value=12), elements=finite)


def factor_from(tail: np.ndarray) -> SpectralFactor:
    return SpectralFactor(np.concatenate(([1.0], tail)))


def test_autocorrelation_of_square():
    np.testing.assert_array_equal(autocorrelation(np.array([1.0, 2.0, 1.0])), [6.0, 8.0, 2.0])


def test_product_form_single_factor():
    np.testing.assert_allclose(from_product_form(1.0).c, [1.0, 2.0, 1.0])


@pytest.mark.parametrize("b1,b2,expected", [
    (1.0, 0.25, [1.0, 2.5, 3.0, 2.5, 1.0]),
    (0.91, 0.265, [1.0, 2.35, 2.9646, 2.35, 1.0]),
    (0.9, 0.225, [1.0, 2.25, 2.81, 2.25, 1.0]),
])
def test_product_form_two_factors(b1, b2, expected):
    np.testing.assert_allclose(from_product_form(b1, b2).c, expected, rtol=1e-12)


def test_product_form_matches_closed_form():
    b1, b2 = 0.91, 0.265
    poly = cosine_from_factor(from_product_form(b1, b2))
    phi = np.linspace(0.0, math.pi, 50)
    direct = (b1 + np.cos(phi)) ** 2 * (b2 + np.cos(phi)) ** 2
    np.testing.assert_allclose(evaluate(poly, phi) / evaluate(poly, 0.0), direct / direct[0], rtol=1e-10)


@given(tails, st.floats(min_value=0.0, max_value=2 * math.pi))
def test_cosine_form_matches_factor_form(tail, phi):
    factor = factor_from(tail)
    poly = cosine_from_factor(factor)
    scale = 1.0 + float(np.sum(np.abs(factor.c))) ** 2
    assert evaluate(poly, phi) == pytest.approx(evaluate_factor(factor, phi), abs=1e-9 * scale)


@given(tails, st.data())
def test_apply_step_matches_recomputation(tail, data):
    factor = factor_from(tail)
    a = autocorrelation(factor.c)
    k = data.draw(st.integers(min_value=1, max_value=factor.n))
    s = data.draw(finite)

    apply_step(factor, a, k, s)

    scale = 1.0 + float(np.sum(np.abs(factor.c))) ** 2
    np.testing.assert_allclose(a, autocorrelation(factor.c), atol=1e-10 * scale)


def test_apply_step_drift_after_many_updates():
    rng = np.random.default_rng(5)
    factor = SpectralFactor(np.concatenate(([1.0], rng.uniform(0.0, 2.0, 16))))
    a = autocorrelation(factor.c)
    for k, s in zip(rng.integers(1, 17, size=10_000), rng.uniform(-0.1, 0.1, size=10_000)):
        apply_step(factor, a, int(k), float(s))

    exact = autocorrelation(factor.c)
    np.testing.assert_allclose(a, exact, rtol=1e-9, atol=1e-9 * exact[0])


def test_apply_step_rejects_constant_term():
    factor = SpectralFactor([1.0, 2.0, 1.0])
    with pytest.raises(DomainError):
        apply_step(factor, autocorrelation(factor.c), 0, 0.1)


def test_landau_objective_of_square():
    poly = cosine_from_factor(SpectralFactor([1.0, 2.0, 1.0]))
    assert landau_objective(poly) == pytest.approx(35.0 + 20.0 * math.sqrt(3.0), rel=1e-12)


def test_landau_objective_ignores_scale():
    poly = CosinePolynomial([6.0, 8.0, 2.0])
    assert landau_objective(poly) == pytest.approx(landau_objective(poly.normalized()), rel=1e-14)


def test_landau_objective_needs_a1_above_a0():
    with pytest.raises(DomainError):
        landau_objective(CosinePolynomial([1.0, 1.0, 0.2]))


def test_membership_reports_reasons():
    report = membership_check(CosinePolynomial([1.0, 0.5, -0.1]))
    assert not report.is_member
    assert report.first_negative_index == 2
    assert not report.a1_exceeds_a0
    assert report.reason() == "a_2 < 0, a_1 <= a_0"


def test_require_member_raises():
    with pytest.raises(MembershipError):
        require_member(CosinePolynomial([1.0, 0.9, 0.1]))


def test_is_member_on_raw_array():
    assert is_member(np.array([6.0, 8.0, 2.0]))
    assert not is_member(np.array([6.0, 8.0, -2.0]))


def test_factor_must_be_normalized():
    with pytest.raises(DomainError):
        SpectralFactor([2.0, 1.0])
    np.testing.assert_allclose(SpectralFactor.normalized([2.0, 1.0]).c, [1.0, 0.5])


def test_bundled_f16(f16):
    assert f16.poly.n == 16
    assert f16.poly.A == pytest.approx(3.523323140225021, abs=1e-12)
    assert landau_objective(f16.poly) == pytest.approx(34.49997, abs=5e-5)
    assert min_value(f16.poly) >= -1e-8
