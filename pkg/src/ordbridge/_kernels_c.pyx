# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementation of the hot likelihood/prior kernels.

Mirrors ``_kernels_py`` exactly; see that module for the contract.  Scalar
reductions use Kahan compensated summation so the totals are insensitive to
observation order at the 1e-10 level.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, exp, fabs, log, log1p, sin, M_PI

cnp.import_array()

LOG_PROB_FLOOR = log(1e-300)

cdef double _LOG_FLOOR = log(1e-300)
cdef double _PROB_FLOOR = 1e-300


cdef inline double _sigmoid(double z) nogil:
    cdef double e
    if z >= 0.0:
        return 1.0 / (1.0 + exp(-z))
    e = exp(z)
    return e / (1.0 + e)


cdef inline double _log_sigmoid(double z) nogil:
    if z >= 0.0:
        return -log1p(exp(-z))
    return z - log1p(exp(z))


cdef struct KahanAcc:
    double total
    double comp


cdef inline void _kadd(KahanAcc* acc, double value) nogil:
    cdef double y = value - acc.comp
    cdef double t = acc.total + y
    acc.comp = (t - acc.total) - y
    acc.total = t


def cumlogit_terms(cnp.int32_t[::1] y, double[::1] eta, double[::1] alpha):
    """Cumulative-logit log-likelihood with derivative terms.

    Same contract as ``_kernels_py.cumlogit_terms``.
    """
    cdef Py_ssize_t n = eta.shape[0]
    cdef Py_ssize_t n_thresh = alpha.shape[0]
    cdef int A = <int > n_thresh + 1
    out_deta = np.zeros(n)
    out_dalpha = np.zeros(n_thresh)
    cdef double[::1] deta = out_deta
    cdef double[::1] dalpha = out_dalpha
    cdef KahanAcc ll
    ll.total = 0.0
    ll.comp = 0.0
    cdef Py_ssize_t i
    cdef int yi
    cdef double hi, lo, sh, sl, smh, sml, p, logp, dhi, dlo
    for i in range(n):
        yi = y[i]
        dhi = 0.0
        dlo = 0.0
        if yi == 1:
            hi = alpha[0] - eta[i]
            logp = _log_sigmoid(hi)
            dhi = _sigmoid(-hi)
        elif yi == A:
            lo = alpha[n_thresh - 1] - eta[i]
            logp = _log_sigmoid(-lo)
            dlo = -_sigmoid(lo)
        else:
            hi = alpha[yi - 1] - eta[i]
            lo = alpha[yi - 2] - eta[i]
            sh = _sigmoid(hi)
            sl = _sigmoid(lo)
            smh = _sigmoid(-hi)
            sml = _sigmoid(-lo)
            if hi + lo > 0.0:
                p = sml - smh
            else:
                p = sh - sl
            if p < _PROB_FLOOR:
                p = _PROB_FLOOR
            logp = log(p)
            dhi = sh * smh / p
            dlo = -sl * sml / p
        if logp < _LOG_FLOOR:
            logp = _LOG_FLOOR
        _kadd(&ll, logp)
        deta[i] = -(dhi + dlo)
        if yi < A:
            dalpha[yi - 1] += dhi
        if yi > 1:
            dalpha[yi - 2] += dlo
    return ll.total, out_deta, out_dalpha


def cumlogit_pointwise(cnp.int32_t[::1] y, double[::1] eta, double[::1] alpha):
    """Pointwise log-probabilities log P(Y = y | eta, alpha), shape (N,)."""
    cdef Py_ssize_t n = eta.shape[0]
    cdef Py_ssize_t n_thresh = alpha.shape[0]
    cdef int A = <int > n_thresh + 1
    out = np.empty(n)
    cdef double[::1] logp_out = out
    cdef Py_ssize_t i
    cdef int yi
    cdef double hi, lo, p, logp
    for i in range(n):
        yi = y[i]
        if yi == 1:
            logp = _log_sigmoid(alpha[0] - eta[i])
        elif yi == A:
            logp = _log_sigmoid(eta[i] - alpha[n_thresh - 1])
        else:
            hi = alpha[yi - 1] - eta[i]
            lo = alpha[yi - 2] - eta[i]
            if hi + lo > 0.0:
                p = _sigmoid(-lo) - _sigmoid(-hi)
            else:
                p = _sigmoid(hi) - _sigmoid(lo)
            if p < _PROB_FLOOR:
                p = _PROB_FLOOR
            logp = log(p)
        if logp < _LOG_FLOOR:
            logp = _LOG_FLOOR
        logp_out[i] = logp
    return out


def bridge_terms(double[::1] x, double phi):
    """Summed Bridge(phi) log-density over ``x`` plus its derivatives."""
    cdef Py_ssize_t n = x.shape[0]
    out_dx = np.empty(n)
    cdef double[::1] dx = out_dx
    cdef double c = cos(phi * M_PI)
    cdef double s = sin(phi * M_PI)
    cdef double const = log(s) - log(2.0 * M_PI)
    cdef double cot_pi = M_PI * c / s
    cdef KahanAcc ll, dphi
    ll.total = 0.0
    ll.comp = 0.0
    dphi.total = 0.0
    dphi.comp = 0.0
    cdef Py_ssize_t i
    cdef double a, em, em2, d, half_ratio, sign
    for i in range(n):
        a = fabs(phi * x[i])
        em = exp(-a)
        em2 = em * em
        d = 0.5 * (1.0 + em2) + c * em
        _kadd(&ll, const - a - log(d))
        half_ratio = 0.5 * (1.0 - em2) / d
        sign = 1.0 if x[i] > 0.0 else (-1.0 if x[i] < 0.0 else 0.0)
        dx[i] = -phi * sign * half_ratio
        _kadd(&dphi, cot_pi - fabs(x[i]) * half_ratio + M_PI * s * em / d)
    return ll.total, out_dx, dphi.total
