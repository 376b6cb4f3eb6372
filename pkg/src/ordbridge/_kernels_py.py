"""NumPy reference implementation of the hot likelihood/prior kernels.

The compiled twin lives in ``_kernels_c.pyx``; both expose the same three
functions and must agree to floating-point noise (see tests/test_kernels.py).

Conventions shared by both backends:

* ``y`` holds 1-based outcome categories, ``alpha`` the ordered thresholds.
* Pointwise log-probabilities are floored at log(1e-300) so that extreme
  linear predictors during early warmup yield large-but-finite values.
* Cumulative probabilities are differenced on the side of the real line
  where both logistic values are small, avoiding cancellation.
"""

from __future__ import annotations

import math

import numpy as np

LOG_PROB_FLOOR = math.log(1e-300)
PROB_FLOOR = 1e-300


def _sigmoid(z):
    e = np.exp(-np.abs(z))
    return np.where(z >= 0.0, 1.0 / (1.0 + e), e / (1.0 + e))


def _log_sigmoid(z):
    # log(1/(1+e^-z)) = -log1p(e^-|z|) + min(z, 0)
    return np.minimum(z, 0.0) - np.log1p(np.exp(-np.abs(z)))


def cumlogit_terms(y, eta, alpha):
    """Cumulative-logit log-likelihood with derivative terms.

    Parameters
    ----------
    y : int array (N,)
        Outcome categories in 1..A.
    eta : float array (N,)
        Linear predictors.
    alpha : float array (A-1,)
        Strictly increasing thresholds.

    Returns
    -------
    (loglik, dll_deta, dll_dalpha)
        Scalar sum of pointwise log-probabilities, its gradient with respect
        to each eta, and with respect to each threshold.
    """
    logp, dhi, dlo = _pointwise(y, eta, alpha, want_grad=True)
    n_thresh = alpha.shape[0]
    A = n_thresh + 1
    lower = y > 1
    upper = y < A
    dll_dalpha = (np.bincount(y[upper] - 1, weights=dhi[upper],
                              minlength=n_thresh)
                  + np.bincount(y[lower] - 2, weights=dlo[lower],
                                minlength=n_thresh))
    return float(np.sum(logp)), -(dhi + dlo), dll_dalpha


def cumlogit_pointwise(y, eta, alpha):
    """Pointwise log-probabilities log P(Y = y | eta, alpha), shape (N,)."""
    logp, _, _ = _pointwise(y, eta, alpha, want_grad=False)
    return logp


def _pointwise(y, eta, alpha, want_grad):
    n = eta.shape[0]
    A = alpha.shape[0] + 1
    logp = np.empty(n)
    dhi = np.zeros(n)
    dlo = np.zeros(n)

    first = y == 1
    last = y == A
    mid = ~(first | last)

    hi = np.where(y < A, alpha[np.minimum(y, A - 1) - 1] - eta, 0.0)
    lo = np.where(y > 1, alpha[np.maximum(y, 2) - 2] - eta, 0.0)

    logp[first] = _log_sigmoid(hi[first])
    logp[last] = _log_sigmoid(-lo[last])
    if np.any(mid):
        h, l = hi[mid], lo[mid]
        sh, sl = _sigmoid(h), _sigmoid(l)
        smh, sml = _sigmoid(-h), _sigmoid(-l)
        p = np.where(h + l > 0.0, sml - smh, sh - sl)
        p = np.maximum(p, PROB_FLOOR)
        logp[mid] = np.log(p)
        if want_grad:
            dhi[mid] = sh * smh / p
            dlo[mid] = -sl * sml / p
    if want_grad:
        dhi[first] = _sigmoid(-hi[first])
        dlo[last] = -_sigmoid(lo[last])
    np.maximum(logp, LOG_PROB_FLOOR, out=logp)
    return logp, dhi, dlo


def bridge_terms(x, phi):
    """Summed Bridge(phi) log-density over ``x`` plus its derivatives.

    Returns ``(logpdf_sum, d/dx array, d/dphi sum)``.  Shares the stabilised
    cosh evaluation with :mod:`ordbridge.bridge`.
    """
    x = np.asarray(x, dtype=float)
    a = np.abs(phi * x)
    em = np.exp(-a)
    em2 = em * em
    c = math.cos(phi * math.pi)
    s = math.sin(phi * math.pi)
    d = 0.5 * (1.0 + em2) + c * em
    const = math.log(s) - math.log(2.0 * math.pi)
    total = x.shape[0] * const - float(np.sum(a)) - float(np.sum(np.log(d)))
    half_ratio = 0.5 * (1.0 - em2) / d
    dx = -phi * np.sign(x) * half_ratio
    dphi = float(np.sum(math.pi * c / s
                        - np.abs(x) * half_ratio
                        + math.pi * s * em / d))
    return total, dx, dphi
