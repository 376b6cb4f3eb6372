"""Convergence diagnostics: split R-hat and effective sample size.

Inputs are (n_chains, n_draws) arrays for one scalar quantity.  Degenerate
(zero-variance or too-short) inputs return ``nan`` as a flagged sentinel
rather than raising.
"""

from __future__ import annotations

import numpy as np

__all__ = ["rhat", "ess"]


def _split_chains(draws: np.ndarray) -> np.ndarray:
    half = draws.shape[1] // 2
    return np.vstack((draws[:, :half], draws[:, -half:]))


def rhat(draws) -> float:
    """Split potential-scale-reduction factor.

    Needs at least 2 chains of at least 4 draws; returns ``nan`` for
    degenerate input (zero within-chain variance).
    """
    draws = np.atleast_2d(np.asarray(draws, dtype=float))
    if draws.shape[0] < 2 or draws.shape[1] < 4:
        return float("nan")
    split = _split_chains(draws)
    n = split.shape[1]
    means = split.mean(axis=1)
    within = float(np.mean(np.var(split, axis=1, ddof=1)))
    between = float(np.var(means, ddof=1))  # = B / n
    if not np.isfinite(within) or within <= 0.0:
        return float("nan")
    return float(np.sqrt((n - 1) / n + between / within))


def _autocov(x: np.ndarray) -> np.ndarray:
    """Autocovariance by FFT, biased normalisation (divides by n)."""
    n = x.shape[0]
    x = x - x.mean()
    size = 2 ** int(np.ceil(np.log2(2 * n)))
    f = np.fft.rfft(x, size)
    acov = np.fft.irfft(f * np.conj(f), size)[:n].real
    return acov / n


def ess(draws) -> float:
    """Effective sample size with Geyer's initial positive/monotone sequence.

    Chains are split in half, autocorrelations combined across sequences, and
    the result capped at the total draw count.  Returns ``nan`` for constant
    or too-short input.
    """
    draws = np.atleast_2d(np.asarray(draws, dtype=float))
    total = draws.size
    if draws.shape[1] < 4:
        return float("nan")
    split = _split_chains(draws)
    n_chain, n_draw = split.shape
    acov = np.array([_autocov(split[c]) for c in range(n_chain)])
    chain_means = split.mean(axis=1)
    mean_var = float(np.mean(acov[:, 0])) * n_draw / (n_draw - 1.0)
    var_plus = mean_var * (n_draw - 1.0) / n_draw
    if n_chain > 1:
        var_plus += float(np.var(chain_means, ddof=1))
    if not np.isfinite(var_plus) or var_plus <= 0.0:
        return float("nan")

    rho = np.zeros(n_draw)
    rho[0] = 1.0
    rho[1] = 1.0 - (mean_var - float(np.mean(acov[:, 1]))) / var_plus
    # initial positive sequence: stop once a paired sum goes negative
    even, odd = 1.0, rho[1]
    t = 1
    while t < n_draw - 2 and even + odd >= 0.0:
        even = 1.0 - (mean_var - float(np.mean(acov[:, t + 1]))) / var_plus
        odd = 1.0 - (mean_var - float(np.mean(acov[:, t + 2]))) / var_plus
        rho[t + 1] = even
        if even + odd >= 0.0:
            rho[t + 2] = odd
        t += 2
    max_t = t
    # initial monotone sequence: enforce non-increasing paired sums
    t = 1
    while t <= max_t - 2:
        if rho[t + 1] + rho[t + 2] > rho[t - 1] + rho[t]:
            rho[t + 1] = (rho[t - 1] + rho[t]) / 2.0
            rho[t + 2] = rho[t + 1]
        t += 2
    tau = -1.0 + 2.0 * float(np.sum(rho[:max_t])) \
        + float(np.sum(rho[max_t + 1:max_t + 2]))
    if not np.isfinite(tau) or tau <= 0.0:
        return float("nan")
    return float(min(n_chain * n_draw / tau, total))
