"""Bridge and modified Bridge distributions for the logit link.

The Bridge density is

    f(x | phi) = (1 / 2pi) * sin(phi*pi) / (cosh(phi*x) + cos(phi*pi))

on the real line with concentration ``phi`` in (0, 1).  A random intercept
with this law keeps the marginal model logistic, with every regression
coefficient attenuated by the factor ``phi``.  The modified Bridge law is the
distribution of a Bridge variable divided by a second concentration
parameter; it arises for the top-level intercept in a three-level model.

All densities are evaluated in log space so that ``|phi * x|`` far beyond 700
neither overflows nor loses the tail slope.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "bridge_log_pdf",
    "bridge_log_pdf_grad",
    "bridge_variance",
    "bridge_sd",
    "bridge_cdf",
    "bridge_quantile",
    "bridge_sample",
    "modified_bridge_log_pdf",
    "modified_bridge_variance",
    "modified_bridge_sd",
    "modified_bridge_cdf",
    "modified_bridge_quantile",
    "modified_bridge_sample",
    "logistic",
]

# Concentrations this close to 0 or 1 are rejected: the variance diverges at
# 0 and the law degenerates at 1, and samplers keep phi interior anyway.
PHI_MARGIN = 1e-12

_LOG_2PI = math.log(2.0 * math.pi)


def _check_phi(phi: float, name: str = "phi") -> float:
    phi = float(phi)
    if not (PHI_MARGIN < phi < 1.0 - PHI_MARGIN):
        raise ValueError(f"{name} must lie strictly inside (0, 1), got {phi!r}")
    return phi


def _check_x(x):
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("x must be finite")
    return x


def _maybe_scalar(value, x):
    return float(value) if np.ndim(x) == 0 else value


def bridge_log_pdf(x, phi: float):
    """Log-density of the Bridge(phi) distribution at ``x``.

    Accepts a scalar or array ``x``; the result matches the input shape.
    """
    phi = _check_phi(phi)
    xa = _check_x(x)
    a = np.abs(phi * xa)
    em = np.exp(-a)
    # cosh(phi x) + cos(phi pi) = e^a * ((1 + e^-2a)/2 + cos(phi pi) e^-a),
    # and the bracket stays strictly positive for phi in (0, 1).
    d = 0.5 * (1.0 + em * em) + math.cos(phi * math.pi) * em
    out = math.log(math.sin(phi * math.pi)) - _LOG_2PI - a - np.log(d)
    return _maybe_scalar(out, x)


def bridge_log_pdf_grad(x, phi: float):
    """Partial derivatives (d/dx, d/dphi) of ``bridge_log_pdf``."""
    phi = _check_phi(phi)
    xa = _check_x(x)
    a = np.abs(phi * xa)
    em = np.exp(-a)
    em2 = em * em
    c = math.cos(phi * math.pi)
    s = math.sin(phi * math.pi)
    d = 0.5 * (1.0 + em2) + c * em
    # sinh(phi x) / (cosh(phi x) + cos(phi pi)), scaled by e^-a on both sides
    ratio = np.sign(xa) * 0.5 * (1.0 - em2) / d
    d_x = -phi * ratio
    d_phi = (math.pi * c / s
             - np.abs(xa) * 0.5 * (1.0 - em2) / d
             + math.pi * s * em / d)
    return _maybe_scalar(d_x, x), _maybe_scalar(d_phi, x)


def bridge_variance(phi: float) -> float:
    """Variance pi^2/3 * (phi^-2 - 1); strictly decreasing in phi."""
    phi = _check_phi(phi)
    return (math.pi ** 2 / 3.0) * (phi ** -2 - 1.0)


def bridge_sd(phi: float) -> float:
    """Standard deviation of the Bridge(phi) distribution."""
    return math.sqrt(bridge_variance(phi))


def bridge_cdf(x, phi: float):
    """Distribution function, from the closed-form antiderivative."""
    phi = _check_phi(phi)
    xa = _check_x(x)
    t = math.tan(0.5 * phi * math.pi)
    out = 0.5 + np.arctan(np.tanh(0.5 * phi * xa) * t) / (math.pi * phi)
    return _maybe_scalar(out, x)


def bridge_quantile(u, phi: float):
    """Inverse distribution function for ``u`` in the open interval (0, 1).

    Closed form x = (log sin(phi*pi*u) - log sin(phi*pi*(1-u))) / phi; exact,
    branch-free, and therefore reproducible under seeded streams.
    """
    phi = _check_phi(phi)
    ua = np.asarray(u, dtype=float)
    if np.any(ua <= 0.0) or np.any(ua >= 1.0):
        raise ValueError("u must lie strictly inside (0, 1)")
    out = (np.log(np.sin(phi * math.pi * ua))
           - np.log(np.sin(phi * math.pi * (1.0 - ua)))) / phi
    return _maybe_scalar(out, u)


def bridge_sample(phi: float, rng: np.random.Generator, size=None):
    """Draw from Bridge(phi) by inverse-cdf transform of uniform deviates."""
    phi = _check_phi(phi)
    u = rng.random(size)
    # rng.random() lives in [0, 1); keep the transform off the lower endpoint
    u = np.maximum(u, 1e-300)
    return bridge_quantile(u, phi)


def modified_bridge_log_pdf(x, phi_y: float, phi_z: float):
    """Log-density of the modified Bridge law, X = Y/phi_z, Y ~ Bridge(phi_y)."""
    phi_z = _check_phi(phi_z, "phi_z")
    xa = _check_x(x)
    out = bridge_log_pdf(phi_z * xa, phi_y) + math.log(phi_z)
    return _maybe_scalar(out, x)


def modified_bridge_variance(phi_y: float, phi_z: float) -> float:
    """Variance pi^2 / (3 phi_z^2) * (phi_y^-2 - 1)."""
    phi_z = _check_phi(phi_z, "phi_z")
    return bridge_variance(phi_y) / phi_z ** 2


def modified_bridge_sd(phi_y: float, phi_z: float) -> float:
    return math.sqrt(modified_bridge_variance(phi_y, phi_z))


def modified_bridge_cdf(x, phi_y: float, phi_z: float):
    phi_z = _check_phi(phi_z, "phi_z")
    xa = _check_x(x)
    return _maybe_scalar(bridge_cdf(phi_z * xa, phi_y), x)


def modified_bridge_quantile(u, phi_y: float, phi_z: float):
    phi_z = _check_phi(phi_z, "phi_z")
    return bridge_quantile(u, phi_y) / phi_z


def modified_bridge_sample(phi_y: float, phi_z: float,
                           rng: np.random.Generator, size=None):
    """Draw X = Y/phi_z with Y ~ Bridge(phi_y)."""
    phi_z = _check_phi(phi_z, "phi_z")
    return bridge_sample(phi_y, rng, size) / phi_z


def logistic(x):
    """Standard logistic function 1/(1 + e^-x), branch-split at zero."""
    xa = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(xa)):
        raise ValueError("x must be finite")
    e = np.exp(-np.abs(xa))
    out = np.where(xa >= 0.0, 1.0 / (1.0 + e), e / (1.0 + e))
    return _maybe_scalar(out, x)
