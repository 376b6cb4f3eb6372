"""Model-comparison criteria: WAIC, LPML (harmonic-mean CPO), and DIC.

All three operate on a draws-by-observations matrix of pointwise
log-likelihood values.  Everything runs through log-sum-exp; raw
exponentials of log-likelihood sums never appear.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

__all__ = ["PointwiseLogLik", "waic", "lpml", "dic"]


@dataclass
class PointwiseLogLik:
    """Pointwise log-likelihood draws plus an optional plug-in row.

    ``draws[l, n]`` is the log-probability of observation n under posterior
    draw l; ``plugin[n]`` is the same quantity at the posterior means of the
    parameters and random effects (needed by the DIC).
    """

    draws: np.ndarray
    plugin: np.ndarray | None = None

    def __post_init__(self):
        self.draws = np.asarray(self.draws, dtype=float)
        if self.draws.ndim != 2:
            raise ValueError("draws must be a 2-d (draws x observations) array")
        if not np.all(np.isfinite(self.draws)) or np.any(self.draws > 0.0):
            raise ValueError("entries must be finite log-probabilities (<= 0)")
        if self.plugin is not None:
            self.plugin = np.asarray(self.plugin, dtype=float)
            if self.plugin.shape != (self.draws.shape[1],):
                raise ValueError("plugin row length must match observations")
            if not np.all(np.isfinite(self.plugin)) \
                    or np.any(self.plugin > 0.0):
                raise ValueError("plugin entries must be finite and <= 0")

    @property
    def n_draws(self) -> int:
        return self.draws.shape[0]

    @property
    def n_obs(self) -> int:
        return self.draws.shape[1]


def _logmeanexp_cols(mat: np.ndarray) -> np.ndarray:
    top = np.max(mat, axis=0)
    return top + np.log(np.mean(np.exp(mat - top), axis=0))


def waic(pll: PointwiseLogLik):
    """Watanabe information criterion.

    Returns ``(waic, lppd, rho)`` with lppd the log pointwise posterior
    density and rho the effective parameter count (sum of the per-observation
    posterior variances of the log density, denominator M).
    """
    if pll.n_draws < 2:
        raise ValueError("WAIC needs at least two draws")
    lppd = float(np.sum(_logmeanexp_cols(pll.draws)))
    rho = float(np.sum(np.var(pll.draws, axis=0, ddof=0)))
    return -2.0 * (lppd - rho), lppd, rho


def lpml(pll: PointwiseLogLik):
    """Log pseudo marginal likelihood via harmonic-mean CPO estimates.

    Returns ``(lpml, cpo)``.  CPO values that underflow double precision are
    reported by observation index; the log-space sum itself is unaffected.
    """
    if pll.n_draws < 1:
        raise ValueError("LPML needs at least one draw")
    log_cpo = -_logmeanexp_cols(-pll.draws)
    cpo = np.exp(log_cpo)
    dead = np.flatnonzero(cpo == 0.0)
    if dead.size:
        warnings.warn("harmonic-mean CPO underflowed for observations "
                      f"{dead.tolist()}")
    return float(np.sum(log_cpo)), cpo


def dic(pll: PointwiseLogLik):
    """Deviance information criterion 2*Dbar - D(posterior means).

    Returns ``(dic, dbar, dhat)``; requires the plug-in row.
    """
    if pll.plugin is None:
        raise ValueError("DIC needs the plug-in log-likelihood row")
    dbar = float(np.mean(-2.0 * np.sum(pll.draws, axis=1)))
    dhat = -2.0 * float(np.sum(pll.plugin))
    return 2.0 * dbar - dhat, dbar, dhat
