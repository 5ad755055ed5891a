import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sphdefect.specfun import (
    HILB_CONSTANT,
    arcsin_coeff,
    arcsin_coeffs,
    assoc_legendre_normalized,
    assoc_legendre_table,
    bessel_j0,
    hilb_approx,
    hilb_main_term,
    legendre_batch,
    legendre_cos,
    legendre_eval,
)

# J0 values from a 30-digit arbitrary-precision evaluation, frozen
J0_ORACLE = {
    0.5: 0.93846980724081290423,
    3.0: -0.26005195490193343762,
    7.9: 0.19436184484127823969,
    8.1: 0.1475174540443776703,
    12.5: 0.14688405470042110231,
    30.0: -0.086367983581040211336,
    100.0: 0.019985850304223122424,
}
J0_FIRST_ZERO = 2.4048255576957727686


def test_legendre_small_cases():
    assert legendre_eval(0, 0.3) == 1.0
    for l in (1, 7, 50, 301):
        assert legendre_eval(l, 1.0) == pytest.approx(1.0, abs=1e-14)
    assert legendre_eval(2, 0.5) == pytest.approx(-0.125, abs=1e-15)


def test_legendre_batch():
    np.testing.assert_allclose(legendre_batch(2, 0.0), [1.0, 0.0, -0.5], atol=1e-15)
    np.testing.assert_allclose(legendre_batch(1, 1.0), [1.0, 1.0])
    t = 0.37
    ratio = legendre_batch(4, -t) / legendre_batch(4, t)
    np.testing.assert_allclose(ratio, [1, -1, 1, -1, 1], rtol=1e-14)


def test_legendre_rejects_out_of_range():
    with pytest.raises(ValueError):
        legendre_eval(3, 1.5)
    with pytest.raises(ValueError):
        legendre_eval(-1, 0.2)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 400), st.floats(-1.0, 1.0))
def test_legendre_bounded_by_one(l, t):
    assert abs(legendre_eval(l, t)) <= 1.0 + 1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 300), st.floats(1e-3, 3.1))
def test_theta_form_matches_t_form(l, theta):
    assert legendre_cos(l, theta) == pytest.approx(legendre_eval(l, math.cos(theta)), abs=1e-11)


def test_assoc_legendre_m0_reduction():
    for l in (0, 3, 20):
        for t in (-0.8, 0.1, 0.95):
            expected = math.sqrt((2 * l + 1) / (4 * math.pi)) * legendre_eval(l, t)
            assert assoc_legendre_normalized(l, 0, t) == pytest.approx(expected, abs=1e-14)
    assert assoc_legendre_normalized(3, 2, 1.0) == 0.0


def test_assoc_legendre_normalization_integral():
    # int_{S^2} Y_lm^2 = 1 for the real basis, checked by a 4000-node midpoint rule
    n = 4000
    theta = (np.arange(n) + 0.5) * math.pi / n
    t = np.cos(theta)
    for l, m in ((1, 1), (5, 3), (12, 12)):
        v = np.array([assoc_legendre_normalized(l, m, x) for x in t])
        factor = 2 * math.pi if m == 0 else math.pi  # int cos^2(m phi)
        if m:
            factor *= 2.0  # sqrt(2) of the real basis, squared
        total = factor * np.sum(v**2 * np.sin(theta)) * math.pi / n
        assert total == pytest.approx(1.0, abs=1e-6)


def test_assoc_table_stable_at_high_degree():
    table = assoc_legendre_table(1000, np.array([0.3, 0.999]))
    assert np.all(np.isfinite(table))
    # sum over m of squares equals (2l+1)/(4 pi) by the addition theorem
    total = table[0] ** 2 + 2.0 * np.sum(table[1:] ** 2, axis=0)
    np.testing.assert_allclose(total, 2001 / (4 * math.pi), rtol=1e-10)


def test_bessel_j0_values():
    assert bessel_j0(0.0) == 1.0
    for x, ref in J0_ORACLE.items():
        assert bessel_j0(x) == pytest.approx(ref, abs=1e-10)
    assert abs(bessel_j0(J0_FIRST_ZERO)) <= 1e-9
    lead = math.sqrt(2 / math.pi) * math.cos(100 - math.pi / 4) / 10
    assert abs(bessel_j0(100.0) - lead) <= 1e-3


def test_bessel_j0_continuous_at_crossover():
    # J0'(12) = -J1(12); the jump left after removing the slope must be roundoff
    slope = 0.22344710449062761
    x = np.array([12.0 - 1e-9, 12.0 + 1e-9])
    v = bessel_j0(x)
    assert abs(v[1] - v[0] - 2e-9 * slope) < 1e-11


def test_bessel_j0_rejects_negative():
    with pytest.raises(ValueError):
        bessel_j0(-1.0)


def test_arcsin_coefficients():
    assert arcsin_coeff(1) == pytest.approx(1 / 6, rel=1e-15)
    assert arcsin_coeff(2) == pytest.approx(3 / 40, rel=1e-15)
    k = np.array([1_000, 10_000, 100_000, 1_000_000])
    band = arcsin_coeffs(1_000_000)[k - 1] * k**1.5
    assert band.max() / band.min() < 1.01


def test_arcsin_partial_sums_converge():
    x = np.linspace(-0.99, 0.99, 201)
    for big_k in (10, 100, 1000):
        a = arcsin_coeffs(big_k)
        powers = x[:, None] ** (2 * np.arange(1, big_k + 1) + 1)
        err = np.abs(np.arcsin(x) - x - powers @ a)
        first_omitted = arcsin_coeff(big_k + 1) * 0.99 ** (2 * big_k + 3)
        assert err.max() <= first_omitted * (1 + 0.99**2) / (1 - 0.99**2)


def test_hilb_main_term_at_zero():
    for l in (1, 50, 1000):
        assert hilb_approx(l, 0.0).main_term == 1.0


def test_hilb_bound_example():
    h = hilb_approx(50, 0.2)
    assert abs(legendre_eval(50, math.cos(0.2)) - h.main_term) <= h.error_bound
    assert h.error_bound == pytest.approx(HILB_CONSTANT * 0.2**0.5 * 50**-1.5)


def test_hilb_scaling_limit():
    devs = [abs(legendre_cos(l, 5.0 / (l + 0.5)) - bessel_j0(5.0)) for l in (50, 100, 200)]
    assert devs[0] > devs[1] > devs[2]


def test_hilb_main_term_small_theta_series():
    theta = np.array([1e-6, 1e-4 * 0.999, 1e-4 * 1.001, 1e-3])
    l = 10
    direct = np.sqrt(theta / np.sin(theta)) * bessel_j0((l + 0.5) * theta)
    np.testing.assert_allclose(hilb_main_term(l, theta), direct, rtol=1e-15)


def test_hilb_rejects_out_of_range():
    with pytest.raises(ValueError):
        hilb_approx(10, 2.0)
