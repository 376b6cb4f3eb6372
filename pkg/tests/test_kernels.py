"""Parity between the compiled and NumPy kernel backends."""

import math

import numpy as np
import pytest

from ordbridge import _kernels_py as ref
from ordbridge import bridge as B
from ordbridge import kernels

compiled = pytest.importorskip(
    "ordbridge._kernels_c", reason="compiled kernels not built")


def _random_case(seed, n=400, n_thresh=2, eta_scale=3.0):
    rng = np.random.default_rng(seed)
    y = rng.integers(1, n_thresh + 2, n).astype(np.int32)
    eta = rng.normal(0.0, eta_scale, n)
    alpha = np.cumsum(np.abs(rng.normal(1.0, 0.5, n_thresh))) - 1.0
    return y, eta, alpha


@pytest.mark.parametrize("seed,scale", [(0, 1.0), (1, 5.0), (2, 40.0)])
def test_cumlogit_terms_parity(seed, scale):
    y, eta, alpha = _random_case(seed, eta_scale=scale)
    ll_r, de_r, da_r = ref.cumlogit_terms(y, eta, alpha)
    ll_c, de_c, da_c = compiled.cumlogit_terms(y, eta, alpha)
    assert ll_c == pytest.approx(ll_r, rel=1e-12, abs=1e-10)
    np.testing.assert_allclose(de_c, de_r, rtol=1e-12, atol=1e-14)
    np.testing.assert_allclose(da_c, da_r, rtol=1e-12, atol=1e-12)


def test_cumlogit_pointwise_parity_and_sum():
    y, eta, alpha = _random_case(3)
    p_r = ref.cumlogit_pointwise(y, eta, alpha)
    p_c = compiled.cumlogit_pointwise(y, eta, alpha)
    np.testing.assert_allclose(p_c, p_r, rtol=1e-13, atol=1e-13)
    ll_c, _, _ = compiled.cumlogit_terms(y, eta, alpha)
    assert ll_c == pytest.approx(float(p_c.sum()), rel=1e-12)


def test_bridge_terms_parity():
    rng = np.random.default_rng(4)
    x = rng.normal(0.0, 4.0, 500)
    for phi in (0.2, 0.5, 0.9):
        r = ref.bridge_terms(x, phi)
        c = compiled.bridge_terms(np.ascontiguousarray(x), phi)
        assert c[0] == pytest.approx(r[0], rel=1e-12)
        np.testing.assert_allclose(c[1], r[1], rtol=1e-13, atol=1e-15)
        assert c[2] == pytest.approx(r[2], rel=1e-12, abs=1e-10)


def test_bridge_terms_match_distribution_module():
    x = np.linspace(-6, 6, 41)
    total, dx, dphi = kernels.bridge_terms(x, 0.7)
    assert total == pytest.approx(float(np.sum(B.bridge_log_pdf(x, 0.7))),
                                  rel=1e-12)
    d_x, d_phi = B.bridge_log_pdf_grad(x, 0.7)
    np.testing.assert_allclose(dx, d_x, rtol=1e-12, atol=1e-15)
    assert dphi == pytest.approx(float(np.sum(d_phi)), rel=1e-12)


def test_log_prob_floor_applied():
    # category probability underflows double precision entirely
    y = np.array([2], dtype=np.int32)
    eta = np.array([800.0])
    alpha = np.array([-1.0, 0.0])
    for impl in (ref, compiled):
        val = impl.cumlogit_pointwise(y, eta, alpha)[0]
        assert val == pytest.approx(math.log(1e-300))
        ll, de, da = impl.cumlogit_terms(y, eta, alpha)
        assert math.isfinite(ll) and np.all(np.isfinite(de))


def test_edge_categories_are_exact_logsigmoid():
    y = np.array([1, 3], dtype=np.int32)
    eta = np.array([0.4, -0.7])
    alpha = np.array([-0.2, 1.3])
    expect = np.array([
        float(np.log(B.logistic(-0.2 - 0.4))),
        float(np.log(B.logistic(-(1.3 + 0.7)))),
    ])
    for impl in (ref, compiled):
        np.testing.assert_allclose(impl.cumlogit_pointwise(y, eta, alpha),
                                   expect, rtol=1e-14)


def test_empty_inputs():
    y = np.empty(0, dtype=np.int32)
    eta = np.empty(0)
    alpha = np.array([0.0, 1.0])
    for impl in (ref, compiled):
        ll, de, da = impl.cumlogit_terms(y, eta, alpha)
        assert ll == 0.0 and de.shape == (0,) and np.all(da == 0.0)
        total, dx, dphi = impl.bridge_terms(np.empty(0), 0.5)
        assert total == 0.0 and dphi == 0.0
