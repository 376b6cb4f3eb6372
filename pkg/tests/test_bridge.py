import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.stats import kstest

from ordbridge import bridge as B

PHIS = (0.1, 0.3, 0.5, 0.7, 0.9)


def quad_moment(log_pdf, power, limit=2000):
    val, err = quad(lambda x: x ** power * math.exp(log_pdf(x)),
                    -np.inf, np.inf, limit=limit, epsabs=1e-12, epsrel=1e-12)
    return val


# ---------------------------------------------------------------------------
# density values

def test_log_pdf_at_zero_phi_half():
    assert B.bridge_log_pdf(0.0, 0.5) == pytest.approx(math.log(1 / (2 * math.pi)),
                                                       abs=1e-12)


def test_log_pdf_matches_direct_evaluation():
    # (1/2pi)/cosh(0.5) = 0.14114160901107525, high-precision evaluation
    assert B.bridge_log_pdf(1.0, 0.5) == pytest.approx(-1.9579915733676230,
                                                       abs=1e-12)
    assert math.exp(B.bridge_log_pdf(1.0, 0.5)) == pytest.approx(0.1411416,
                                                                 abs=5e-8)


def test_log_pdf_symmetry_point():
    assert B.bridge_log_pdf(-3.2, 0.7) == B.bridge_log_pdf(3.2, 0.7)


@settings(max_examples=200, deadline=None)
@given(x=st.floats(-500.0, 500.0), phi=st.floats(0.05, 0.95))
def test_log_pdf_symmetry_property(x, phi):
    assert B.bridge_log_pdf(-x, phi) == pytest.approx(
        B.bridge_log_pdf(x, phi), rel=1e-14, abs=1e-12)


def test_log_pdf_tail_no_overflow():
    # |phi x| far beyond 700 stays finite with the correct tail slope -phi|x|
    val1 = B.bridge_log_pdf(1e4, 0.9)
    val2 = B.bridge_log_pdf(2e4, 0.9)
    assert math.isfinite(val1) and math.isfinite(val2)
    assert val2 - val1 == pytest.approx(-0.9 * 1e4, rel=1e-10)


def test_log_pdf_domain_errors():
    for phi in (0.0, 1.0, -0.2, 1.3, 1e-13, 1.0 - 1e-13):
        with pytest.raises(ValueError):
            B.bridge_log_pdf(0.5, phi)
    with pytest.raises(ValueError):
        B.bridge_log_pdf(np.nan, 0.5)
    with pytest.raises(ValueError):
        B.bridge_log_pdf(np.inf, 0.5)


# ---------------------------------------------------------------------------
# gradients

def test_grad_zero_at_origin():
    for phi in PHIS:
        d_x, _ = B.bridge_log_pdf_grad(0.0, phi)
        assert d_x == 0.0


def test_grad_value_matches_finite_difference_oracle():
    d_x, _ = B.bridge_log_pdf_grad(1.0, 0.5)
    assert d_x == pytest.approx(-0.23105857863000487, abs=1e-10)


def test_grad_matches_central_differences_on_grid():
    h = 1e-6
    for x in (-3.0, -1.0, 0.25, 2.0, 5.0):
        for phi in (0.15, 0.3, 0.5, 0.7, 0.9):
            d_x, d_phi = B.bridge_log_pdf_grad(x, phi)
            fd_x = (B.bridge_log_pdf(x + h, phi)
                    - B.bridge_log_pdf(x - h, phi)) / (2 * h)
            fd_phi = (B.bridge_log_pdf(x, phi + h)
                      - B.bridge_log_pdf(x, phi - h)) / (2 * h)
            assert d_x == pytest.approx(fd_x, rel=1e-5, abs=1e-9)
            assert d_phi == pytest.approx(fd_phi, rel=1e-5, abs=1e-9)


# ---------------------------------------------------------------------------
# variance and normalisation

def test_variance_phi_half_is_pi_squared():
    assert B.bridge_variance(0.5) == pytest.approx(math.pi ** 2, rel=1e-15)


def test_variance_monotone_decreasing_to_zero():
    values = [B.bridge_variance(p) for p in np.linspace(0.05, 0.999999, 40)]
    assert all(a > b for a, b in zip(values, values[1:]))
    assert values[-1] == pytest.approx(0.0, abs=1e-4)


def test_variance_at_reported_family_concentration():
    # Table-2-style value phi = 0.821 plugged into the formula
    assert B.bridge_variance(0.821) == pytest.approx(1.5909449528909400,
                                                     rel=1e-12)


@pytest.mark.parametrize("phi", PHIS)
def test_normalisation_and_variance_by_quadrature(phi):
    norm = quad_moment(lambda x: B.bridge_log_pdf(x, phi), 0)
    assert abs(norm - 1.0) < 1e-8
    second = quad_moment(lambda x: B.bridge_log_pdf(x, phi), 2)
    assert second == pytest.approx(B.bridge_variance(phi), rel=1e-6)


# ---------------------------------------------------------------------------
# modified bridge

def test_modified_log_pdf_at_zero():
    assert B.modified_bridge_log_pdf(0.0, 0.5, 0.5) == pytest.approx(
        math.log(0.5 / (2 * math.pi)), abs=1e-12)


def test_modified_reduces_to_bridge_as_phi_z_to_one():
    eps = 1e-9
    for x in (-2.0, 0.3, 4.0):
        assert B.modified_bridge_log_pdf(x, 0.6, 1.0 - eps) == pytest.approx(
            B.bridge_log_pdf(x, 0.6), abs=1e-7)


def test_modified_variance_values():
    assert B.modified_bridge_variance(0.5, 0.5) == pytest.approx(
        4 * math.pi ** 2, rel=1e-14)
    assert B.modified_bridge_variance(0.5, 1.0 - 1e-9) == pytest.approx(
        math.pi ** 2, rel=1e-6)
    # Table-2-style three-level concentrations
    assert B.modified_bridge_variance(0.959, 0.821) == pytest.approx(
        0.42625869872446295, rel=1e-12)


@pytest.mark.parametrize("phi_y,phi_z", [(0.3, 0.6), (0.5, 0.5), (0.8, 0.9)])
def test_modified_normalisation_and_variance_quadrature(phi_y, phi_z):
    log_pdf = lambda x: B.modified_bridge_log_pdf(x, phi_y, phi_z)
    assert abs(quad_moment(log_pdf, 0) - 1.0) < 1e-8
    assert quad_moment(log_pdf, 2) == pytest.approx(
        B.modified_bridge_variance(phi_y, phi_z), rel=1e-6)


def test_modified_variance_matches_monte_carlo():
    rng = np.random.default_rng(314)
    draws = B.modified_bridge_sample(0.7, 0.6, rng, size=1_000_000)
    assert draws.var() == pytest.approx(B.modified_bridge_variance(0.7, 0.6),
                                        rel=0.02)


# ---------------------------------------------------------------------------
# cdf / quantile / sampling

def test_quantile_median_is_exactly_zero():
    for phi in PHIS:
        assert B.bridge_quantile(0.5, phi) == 0.0


def test_cdf_quantile_round_trip():
    us = np.linspace(0.01, 0.99, 25)
    for phi in PHIS:
        back = B.bridge_cdf(B.bridge_quantile(us, phi), phi)
        np.testing.assert_allclose(back, us, atol=1e-12)


@pytest.mark.parametrize("phi", PHIS)
def test_cdf_matches_quadrature(phi):
    for x in (-6.0, -1.5, 0.0, 0.8, 3.0, 10.0):
        num, _ = quad(lambda t: math.exp(B.bridge_log_pdf(t, phi)),
                      -np.inf, x, limit=500, epsabs=1e-12)
        assert B.bridge_cdf(x, phi) == pytest.approx(num, abs=1e-8)


def test_sample_variance_matches_formula():
    rng = np.random.default_rng(77)
    draws = B.bridge_sample(0.6, rng, size=1_000_000)
    # formula value pi^2/3 (0.6^-2 - 1) = 5.848654459904805
    assert draws.var() == pytest.approx(5.848654459904805, rel=0.02)


@pytest.mark.parametrize("phi", (0.3, 0.6, 0.9))
def test_sampler_law_ks_against_cdf(phi):
    # bridge_cdf itself is validated against quadrature above
    rng = np.random.default_rng(int(phi * 100))
    draws = B.bridge_sample(phi, rng, size=100_000)
    stat = kstest(draws, lambda x: B.bridge_cdf(x, phi)).statistic
    assert stat < 0.01


def test_modified_sample_scaling_near_one_matches_bridge():
    rng = np.random.default_rng(8)
    mb = B.modified_bridge_sample(0.7, 1.0 - 1e-9, rng, size=100_000)
    stat = kstest(mb, lambda x: B.bridge_cdf(x, 0.7)).statistic
    assert stat < 0.01


def test_sample_mean_near_zero():
    rng = np.random.default_rng(15)
    draws = B.bridge_sample(0.45, rng, size=1_000_000)
    bound = 4.0 * draws.std() / 1e3  # 4 sd of the mean for 10^6 draws
    assert abs(draws.mean()) < bound


def test_sampling_deterministic_given_stream():
    a = B.bridge_sample(0.7, np.random.default_rng(123), size=50)
    b = B.bridge_sample(0.7, np.random.default_rng(123), size=50)
    np.testing.assert_array_equal(a, b)


# ---------------------------------------------------------------------------
# logistic

def test_logistic_values():
    assert B.logistic(0.0) == 0.5
    assert B.logistic(-0.229) == pytest.approx(0.44299888218917864, abs=1e-12)


def test_logistic_symmetry_identity():
    for x in (1.0, 10.0, 50.0):
        assert B.logistic(x) + B.logistic(-x) == 1.0


def test_logistic_rejects_non_finite():
    with pytest.raises(ValueError):
        B.logistic(np.inf)
