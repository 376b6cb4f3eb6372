"""Cumulative-logit likelihood, priors, transforms, and posterior gradient.

The observation model for ordinal outcome Y with categories 1..A is

    logit P(Y <= a) = alpha_a - x'beta - U - V,    a = 1..A-1,

with a region intercept U (three-level models only) and a family intercept V
(two- and three-level models).  V is Bridge(phi_v) distributed and U follows
the modified Bridge law with parameters (phi_ustar, phi_v), so the marginal
(population-averaged) parameters are the conditional ones scaled by
phi_ustar * phi_v.

Priors: Cauchy(0, 5) on each threshold and coefficient; half-Cauchy(0, 5) on
the Bridge standard deviation implied by each concentration parameter, with
the full change of variables to the unconstrained scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import bridge, kernels
from .criteria import PointwiseLogLik

LEVELS = ("fixed", "two_level", "three_level")

CAUCHY_SCALE = 5.0
_LOG_CAUCHY_NORM = -math.log(CAUCHY_SCALE * math.pi)
_LOG_HALF_CAUCHY_NORM = math.log(2.0) - math.log(CAUCHY_SCALE * math.pi)
_SD_CONST = math.pi / math.sqrt(3.0)  # bridge sd = _SD_CONST * sqrt(phi^-2 - 1)


@dataclass(frozen=True)
class ModelSpec:
    """Outcome category count, covariate count, and random-effect structure."""

    n_categories: int
    n_covariates: int
    level: str

    def __post_init__(self):
        if self.n_categories < 2:
            raise ValueError("n_categories must be at least 2")
        if self.n_covariates < 0:
            raise ValueError("n_covariates must be non-negative")
        if self.level not in LEVELS:
            raise ValueError(f"level must be one of {LEVELS}, got {self.level!r}")

    @property
    def has_u(self) -> bool:
        return self.level == "three_level"

    @property
    def has_v(self) -> bool:
        return self.level in ("two_level", "three_level")

    @property
    def n_thresholds(self) -> int:
        return self.n_categories - 1


@dataclass
class Dataset:
    """Region/family indexed observations with an encoded design matrix.

    ``region_idx`` and ``family_idx`` are dense 0-based codes; family j
    belongs to exactly one region, recorded in ``family_region``.
    """

    y: np.ndarray                 # (N,) int32, categories 1..A
    x: np.ndarray                 # (N, p) float64
    region_idx: np.ndarray        # (N,) int32
    family_idx: np.ndarray        # (N,) int32
    family_region: np.ndarray     # (F,) int32
    n_categories: int
    region_labels: list = field(default_factory=list)
    family_labels: list = field(default_factory=list)
    covariate_names: list = field(default_factory=list)
    outcome_labels: list | None = None

    def __post_init__(self):
        self.y = np.ascontiguousarray(self.y, dtype=np.int32)
        self.x = np.ascontiguousarray(self.x, dtype=np.float64)
        self.region_idx = np.ascontiguousarray(self.region_idx, dtype=np.int32)
        self.family_idx = np.ascontiguousarray(self.family_idx, dtype=np.int32)
        self.family_region = np.ascontiguousarray(self.family_region,
                                                  dtype=np.int32)
        self.validate()

    @property
    def n_obs(self) -> int:
        return self.y.shape[0]

    @property
    def n_covariates(self) -> int:
        return self.x.shape[1]

    @property
    def n_regions(self) -> int:
        return len(self.region_labels)

    @property
    def n_families(self) -> int:
        return len(self.family_labels)

    def validate(self):
        n = self.y.shape[0]
        if self.x.shape[0] != n or self.region_idx.shape[0] != n \
                or self.family_idx.shape[0] != n:
            raise ValueError("observation arrays have inconsistent lengths")
        if self.n_categories < 2:
            raise ValueError("n_categories must be at least 2")
        if n and (self.y.min() < 1 or self.y.max() > self.n_categories):
            raise ValueError("outcomes must lie in 1..n_categories")
        if not np.all(np.isfinite(self.x)):
            raise ValueError("covariate rows must be finite")
        s, f = self.n_regions, self.n_families
        if self.family_region.shape[0] != f:
            raise ValueError("family_region length must equal family count")
        if f and s and (self.family_region.min() < 0
                        or self.family_region.max() >= s):
            raise ValueError("family_region holds an out-of-range region")
        if n:
            if self.region_idx.min() < 0 or self.region_idx.max() >= s:
                raise ValueError("region index out of range")
            if self.family_idx.min() < 0 or self.family_idx.max() >= f:
                raise ValueError("family index out of range")
            # dense: every region and family id must actually occur
            if np.bincount(self.region_idx, minlength=s).min() == 0:
                raise ValueError("region indices are not dense")
            if np.bincount(self.family_idx, minlength=f).min() == 0:
                raise ValueError("family indices are not dense")
            if not np.array_equal(self.family_region[self.family_idx],
                                  self.region_idx):
                raise ValueError("family nested under more than one region")


@dataclass
class ConstrainedParams:
    """Model-scale parameters; thresholds strictly increasing, phis in (0,1)."""

    alpha_c: np.ndarray
    beta_c: np.ndarray
    phi_ustar: float | None = None
    phi_v: float | None = None
    u: np.ndarray | None = None
    v: np.ndarray | None = None

    def __post_init__(self):
        self.alpha_c = np.asarray(self.alpha_c, dtype=float)
        self.beta_c = np.asarray(self.beta_c, dtype=float)
        if np.any(np.diff(self.alpha_c) <= 0.0):
            raise ValueError("thresholds must be strictly increasing")
        for name in ("phi_ustar", "phi_v"):
            val = getattr(self, name)
            if val is not None and not (0.0 < val < 1.0):
                raise ValueError(f"{name} must lie in (0, 1)")
        if self.u is not None:
            self.u = np.asarray(self.u, dtype=float)
        if self.v is not None:
            self.v = np.asarray(self.v, dtype=float)


class ParamLayout:
    """Fixed ordering of the unconstrained vector.

    Blocks, in order: thresholds (first value, then log-gaps), coefficients,
    logit of phi_ustar (three-level), logit of phi_v (two/three-level), raw
    region effects, raw family effects.
    """

    def __init__(self, spec: ModelSpec, n_regions: int = 0, n_families: int = 0):
        self.spec = spec
        self.n_regions = int(n_regions) if spec.has_u else 0
        self.n_families = int(n_families) if spec.has_v else 0
        pos = 0
        self.sl_t = slice(pos, pos + spec.n_thresholds)
        pos += spec.n_thresholds
        self.sl_beta = slice(pos, pos + spec.n_covariates)
        pos += spec.n_covariates
        self.i_w_ustar = pos if spec.has_u else None
        pos += 1 if spec.has_u else 0
        self.i_w_v = pos if spec.has_v else None
        pos += 1 if spec.has_v else 0
        self.sl_u = slice(pos, pos + self.n_regions)
        pos += self.n_regions
        self.sl_v = slice(pos, pos + self.n_families)
        pos += self.n_families
        self.dim = pos

    def block_of(self, index: int) -> str:
        """Name of the block owning unconstrained coordinate ``index``."""
        for name, sl in (("thresholds", self.sl_t), ("beta", self.sl_beta),
                         ("u", self.sl_u), ("v", self.sl_v)):
            if sl.start <= index < sl.stop:
                return name
        if index == self.i_w_ustar:
            return "phi_ustar"
        if index == self.i_w_v:
            return "phi_v"
        raise IndexError(index)


def _logit(p: float) -> float:
    return math.log(p / (1.0 - p))


def _log_abs_dsd_dphi(phi: float) -> float:
    # sd(phi) = _SD_CONST * sqrt(g), g = phi^-2 - 1
    g = phi ** -2 - 1.0
    return math.log(_SD_CONST) - 3.0 * math.log(phi) - 0.5 * math.log(g)


def _dlog_abs_dsd_dphi(phi: float) -> float:
    g = phi ** -2 - 1.0
    return -3.0 / phi + phi ** -3 / g


def transform(pv: np.ndarray, layout: ParamLayout):
    """Map an unconstrained vector to ``(ConstrainedParams, log_jacobian)``.

    The log-Jacobian covers the threshold log-gaps, the logistic map for each
    phi, and the additional change of variables onto the Bridge standard
    deviation that carries the half-Cauchy scale prior.
    """
    pv = np.asarray(pv, dtype=float)
    if pv.shape != (layout.dim,):
        raise ValueError(f"expected parameter vector of length {layout.dim}, "
                         f"got shape {pv.shape}")
    spec = layout.spec
    t = pv[layout.sl_t]
    alpha = np.empty_like(t)
    if t.size:
        alpha[0] = t[0]
        alpha[1:] = t[0] + np.cumsum(np.exp(t[1:]))
    log_jac = float(np.sum(t[1:]))
    phi_ustar = phi_v = None
    for idx, name in ((layout.i_w_ustar, "phi_ustar"), (layout.i_w_v, "phi_v")):
        if idx is None:
            continue
        w = pv[idx]
        phi = float(bridge.logistic(w))
        if not bridge.PHI_MARGIN < phi < 1.0 - bridge.PHI_MARGIN:
            raise ValueError(f"{name} maps to a degenerate concentration "
                             f"({phi!r}) for unconstrained value {w!r}")
        log_jac += math.log(phi) + math.log1p(-phi) + _log_abs_dsd_dphi(phi)
        if name == "phi_ustar":
            phi_ustar = phi
        else:
            phi_v = phi
    cp = ConstrainedParams(
        alpha_c=alpha,
        beta_c=pv[layout.sl_beta].copy(),
        phi_ustar=phi_ustar,
        phi_v=phi_v,
        u=pv[layout.sl_u].copy() if spec.has_u else None,
        v=pv[layout.sl_v].copy() if spec.has_v else None,
    )
    return cp, log_jac


def inverse_transform(cp: ConstrainedParams, layout: ParamLayout) -> np.ndarray:
    """Exact inverse of :func:`transform` (round trip to 1e-12 relative)."""
    pv = np.zeros(layout.dim)
    t = np.empty(layout.spec.n_thresholds)
    if t.size:
        t[0] = cp.alpha_c[0]
        t[1:] = np.log(np.diff(cp.alpha_c))
    pv[layout.sl_t] = t
    pv[layout.sl_beta] = cp.beta_c
    if layout.i_w_ustar is not None:
        pv[layout.i_w_ustar] = _logit(cp.phi_ustar)
    if layout.i_w_v is not None:
        pv[layout.i_w_v] = _logit(cp.phi_v)
    if layout.spec.has_u:
        pv[layout.sl_u] = cp.u
    if layout.spec.has_v:
        pv[layout.sl_v] = cp.v
    return pv


def linear_predictor(cp: ConstrainedParams, x_row, region: int, family: int,
                     spec: ModelSpec) -> float:
    """eta = x'beta + U_region + V_family, with absent blocks contributing 0."""
    eta = float(np.dot(np.asarray(x_row, dtype=float), cp.beta_c))
    if spec.has_u:
        eta += float(cp.u[region])
    if spec.has_v:
        eta += float(cp.v[family])
    return eta


def category_probs(eta: float, alpha) -> np.ndarray:
    """Outcome probabilities P(Y = a | eta) for a = 1..A.

    Each cell is computed as a difference of logistic values on the side of
    the real line where both are small, so every component stays positive for
    ordered thresholds and |eta| up to the overflow-free range.
    """
    alpha = np.asarray(alpha, dtype=float)
    if np.any(np.diff(alpha) <= 0.0):
        raise ValueError("thresholds must be strictly increasing")
    A = alpha.shape[0] + 1
    probs = np.empty(A)
    z = alpha - float(eta)
    probs[0] = bridge.logistic(z[0])
    probs[-1] = bridge.logistic(-z[-1])
    for a in range(1, A - 1):
        lo, hi = z[a - 1], z[a]
        if lo + hi > 0.0:
            p = bridge.logistic(-lo) - bridge.logistic(-hi)
        else:
            p = bridge.logistic(hi) - bridge.logistic(lo)
        probs[a] = max(p, 1e-300)
    return probs


def _eta_vector(cp: ConstrainedParams, data: Dataset, spec: ModelSpec):
    eta = data.x @ cp.beta_c
    if spec.has_u:
        eta += cp.u[data.region_idx]
    if spec.has_v:
        eta += cp.v[data.family_idx]
    return eta


def log_likelihood(cp: ConstrainedParams, data: Dataset,
                   spec: ModelSpec) -> float:
    """Sum of pointwise log category probabilities over the dataset."""
    eta = _eta_vector(cp, data, spec)
    alpha = np.ascontiguousarray(cp.alpha_c)
    return float(np.sum(kernels.cumlogit_pointwise(data.y, eta, alpha)))


def _cauchy_logpdf_sum(x) -> float:
    x = np.asarray(x, dtype=float)
    return float(x.size * _LOG_CAUCHY_NORM
                 - np.sum(np.log1p((x / CAUCHY_SCALE) ** 2)))


def _half_cauchy_logpdf(sd: float) -> float:
    return _LOG_HALF_CAUCHY_NORM - math.log1p((sd / CAUCHY_SCALE) ** 2)


def log_prior(cp: ConstrainedParams, spec: ModelSpec) -> float:
    """Joint log prior density on the constrained scale.

    Cauchy(0,5) on thresholds and coefficients, half-Cauchy(0,5) on the
    Bridge standard deviation implied by each phi, Bridge(phi_v) on the
    family effects and modified Bridge on the region effects.
    """
    total = _cauchy_logpdf_sum(cp.alpha_c) + _cauchy_logpdf_sum(cp.beta_c)
    if spec.has_v:
        total += _half_cauchy_logpdf(bridge.bridge_sd(cp.phi_v))
        total += float(np.sum(bridge.bridge_log_pdf(cp.v, cp.phi_v)))
    if spec.has_u:
        total += _half_cauchy_logpdf(bridge.bridge_sd(cp.phi_ustar))
        total += float(np.sum(bridge.modified_bridge_log_pdf(
            cp.u, cp.phi_ustar, cp.phi_v)))
    return total


def marginalize(alpha_c, beta_c, phi_ustar: float, phi_v: float):
    """Conditional-to-marginal map: scale by phi_ustar * phi_v.

    Pass ``phi_ustar=1`` for two-level models and both factors 1 for
    fixed-effects models.
    """
    for name, val in (("phi_ustar", phi_ustar), ("phi_v", phi_v)):
        if not (0.0 < val <= 1.0):
            raise ValueError(f"{name} must lie in (0, 1]")
    factor = phi_ustar * phi_v
    return factor * np.asarray(alpha_c, float), factor * np.asarray(beta_c, float)


def effect_interpretation(beta_m: float, kind: str = "odds_percent",
                          multiplier: float | None = None) -> float:
    """Percent change in the odds of a poorer outcome for a coefficient.

    ``odds_percent``: (e^beta - 1) * 100 for a one-unit covariate shift.
    ``log_covariate_percent``: (e^(beta * log m) - 1) * 100 for multiplying a
    log-transformed covariate by m (e.g. m = 1.1 for a 10% change).
    """
    if not math.isfinite(beta_m):
        raise ValueError("beta_m must be finite")
    if kind == "odds_percent":
        return (math.exp(beta_m) - 1.0) * 100.0
    if kind == "log_covariate_percent":
        if multiplier is None or multiplier <= 0.0:
            raise ValueError("log_covariate_percent needs a positive multiplier")
        return (math.exp(beta_m * math.log(multiplier)) - 1.0) * 100.0
    raise ValueError(f"unknown interpretation kind {kind!r}")


class PosteriorModel:
    """Joint log posterior with analytic gradient, for gradient-based samplers.

    Exposes the target interface consumed by ``ordbridge.sampler``:
    ``dim``, ``logp_and_grad``, ``record_names`` and ``record``.
    """

    def __init__(self, data: Dataset, spec: ModelSpec):
        if data.n_categories != spec.n_categories:
            raise ValueError("dataset and spec disagree on category count")
        if data.n_covariates != spec.n_covariates:
            raise ValueError("dataset and spec disagree on covariate count")
        if spec.has_v and data.n_families == 0:
            raise ValueError("family-level model needs at least one family")
        if spec.has_u and data.n_regions == 0:
            raise ValueError("region-level model needs at least one region")
        self.data = data
        self.spec = spec
        self.layout = ParamLayout(spec, data.n_regions, data.n_families)
        self._y = data.y
        self._x = data.x
        self._g = data.region_idx
        self._f = data.family_idx
        self.record_names = self._build_record_names()

    @property
    def dim(self) -> int:
        return self.layout.dim

    def _build_record_names(self):
        spec = self.spec
        names = [f"alpha_m[{a + 1}]" for a in range(spec.n_thresholds)]
        names += [f"beta_m[{k + 1}]" for k in range(spec.n_covariates)]
        if spec.has_u:
            names.append("phi_ustar")
        if spec.has_v:
            names.append("phi_v")
        names += [f"alpha_c[{a + 1}]" for a in range(spec.n_thresholds)]
        names += [f"beta_c[{k + 1}]" for k in range(spec.n_covariates)]
        if spec.has_u:
            names += [f"u[{i + 1}]" for i in range(self.layout.n_regions)]
        if spec.has_v:
            names += [f"v[{j + 1}]" for j in range(self.layout.n_families)]
        return names

    def record(self, pv: np.ndarray) -> np.ndarray:
        """Constrained and marginal quantities for one draw, in name order."""
        cp, _ = transform(pv, self.layout)
        factor = (cp.phi_ustar or 1.0) * (cp.phi_v or 1.0)
        parts = [factor * cp.alpha_c, factor * cp.beta_c]
        scalars = []
        if self.spec.has_u:
            scalars.append(cp.phi_ustar)
        if self.spec.has_v:
            scalars.append(cp.phi_v)
        parts.append(np.asarray(scalars))
        parts.extend([cp.alpha_c, cp.beta_c])
        if self.spec.has_u:
            parts.append(cp.u)
        if self.spec.has_v:
            parts.append(cp.v)
        return np.concatenate(parts)

    def initial_point(self, rng: np.random.Generator) -> np.ndarray:
        """Uniform(-2, 2) start per unconstrained coordinate."""
        return rng.uniform(-2.0, 2.0, self.dim)

    def _check_finite(self, pv: np.ndarray):
        if np.all(np.isfinite(pv)):
            return
        bad = int(np.flatnonzero(~np.isfinite(pv))[0])
        raise ValueError("non-finite parameter value in block "
                         f"'{self.layout.block_of(bad)}' (coordinate {bad})")

    def logp_and_grad(self, pv: np.ndarray):
        """Log posterior (likelihood + prior + Jacobian) and its gradient.

        Parameter points whose concentration maps degenerate numerically
        (phi within 1e-12 of a boundary, or overflowing threshold gaps)
        return ``-inf``, which gradient-based samplers treat as a rejected
        or divergent move.
        """
        layout = self.layout
        spec = self.spec
        pv = np.asarray(pv, dtype=float)
        if pv.shape != (layout.dim,):
            raise ValueError(f"expected vector of length {layout.dim}")
        self._check_finite(pv)

        t = pv[layout.sl_t]
        beta = pv[layout.sl_beta]
        with np.errstate(over="ignore"):
            gaps = np.exp(t[1:])
        alpha = np.empty_like(t)
        alpha[0] = t[0]
        alpha[1:] = t[0] + np.cumsum(gaps)
        if not np.all(np.isfinite(alpha)):
            return -np.inf, np.zeros(layout.dim)

        grad = np.zeros(layout.dim)
        value = 0.0

        eta = self._x @ beta
        u = v = None
        phi_u = phi_v = None
        if spec.has_u:
            u = pv[layout.sl_u]
            phi_u = float(bridge.logistic(pv[layout.i_w_ustar]))
            if not bridge.PHI_MARGIN < phi_u < 1.0 - bridge.PHI_MARGIN:
                return -np.inf, grad
            eta += u[self._g]
        if spec.has_v:
            v = pv[layout.sl_v]
            phi_v = float(bridge.logistic(pv[layout.i_w_v]))
            if not bridge.PHI_MARGIN < phi_v < 1.0 - bridge.PHI_MARGIN:
                return -np.inf, grad
            eta += v[self._f]

        ll, dll_deta, dalpha = kernels.cumlogit_terms(self._y, eta, alpha)
        value += ll
        grad[layout.sl_beta] = self._x.T @ dll_deta
        if spec.has_u:
            grad[layout.sl_u] = np.bincount(self._g, weights=dll_deta,
                                            minlength=layout.n_regions)
        if spec.has_v:
            grad[layout.sl_v] = np.bincount(self._f, weights=dll_deta,
                                            minlength=layout.n_families)

        # Cauchy priors on thresholds and coefficients
        value += _cauchy_logpdf_sum(alpha) + _cauchy_logpdf_sum(beta)
        dalpha = dalpha - 2.0 * alpha / (CAUCHY_SCALE ** 2 + alpha ** 2)
        grad[layout.sl_beta] -= 2.0 * beta / (CAUCHY_SCALE ** 2 + beta ** 2)

        dphi_v = 0.0
        if spec.has_v:
            pr_v, dv_prior, dphi = kernels.bridge_terms(
                np.ascontiguousarray(v), phi_v)
            value += pr_v
            grad[layout.sl_v] += dv_prior
            dphi_v += dphi
        if spec.has_u:
            scaled = np.ascontiguousarray(phi_v * u)
            pr_u, du_scaled, dphi_u = kernels.bridge_terms(scaled, phi_u)
            value += pr_u + u.shape[0] * math.log(phi_v)
            grad[layout.sl_u] += phi_v * du_scaled
            dphi_v += float(np.dot(u, du_scaled)) + u.shape[0] / phi_v
            value += self._scale_terms(phi_u, dphi_u, grad, layout.i_w_ustar)
        if spec.has_v:
            value += self._scale_terms(phi_v, dphi_v, grad, layout.i_w_v)

        # threshold chain rule: alpha_a = t_1 + sum of gaps, plus the
        # log-gap Jacobian term
        rc = np.cumsum(dalpha[::-1])[::-1]
        grad[layout.sl_t.start] = rc[0]
        grad[layout.sl_t.start + 1:layout.sl_t.stop] = gaps * rc[1:] + 1.0
        value += float(np.sum(t[1:]))

        return value, grad

    @staticmethod
    def _scale_terms(phi: float, dphi: float, grad: np.ndarray, w_index: int):
        """Half-Cauchy scale prior plus Jacobian terms for one phi.

        ``dphi`` carries the accumulated d/dphi of the Bridge prior terms;
        the corresponding gradient entry for the unconstrained logit is
        written in place.  Returns the value contribution.
        """
        sd = _SD_CONST * math.sqrt(phi ** -2 - 1.0)
        value = _half_cauchy_logpdf(sd)
        dphi += 2.0 * _SD_CONST ** 2 / (phi ** 3 * (CAUCHY_SCALE ** 2 + sd ** 2))
        value += math.log(phi) + math.log1p(-phi) + _log_abs_dsd_dphi(phi)
        dphi += _dlog_abs_dsd_dphi(phi)
        grad[w_index] = (1.0 - 2.0 * phi) + dphi * phi * (1.0 - phi)
        return value


def log_posterior_and_grad(pv, data: Dataset, spec: ModelSpec):
    """One-shot convenience wrapper around :class:`PosteriorModel`."""
    return PosteriorModel(data, spec).logp_and_grad(pv)


def pointwise_loglik(store, data: Dataset, spec: ModelSpec,
                     chunk_size: int = 512) -> PointwiseLogLik:
    """Draws-by-observations log-likelihood matrix from a fitted store.

    The plug-in row is evaluated at the posterior means of the constrained
    parameters and the random effects, as required by the DIC.
    """
    layout = ParamLayout(spec, data.n_regions, data.n_families)

    def stack(prefix, count):
        cols = [store.get(f"{prefix}[{k + 1}]").reshape(-1)
                for k in range(count)]
        return np.column_stack(cols) if count else np.empty((m_total, 0))

    m_total = store.get("lp").reshape(-1).shape[0] if "lp" in store.names \
        else store.get(store.names[0]).reshape(-1).shape[0]
    alpha = stack("alpha_c", spec.n_thresholds)
    beta = stack("beta_c", spec.n_covariates)
    u = stack("u", layout.n_regions) if spec.has_u else None
    v = stack("v", layout.n_families) if spec.has_v else None

    n = data.n_obs
    out = np.empty((m_total, n))
    for start in range(0, m_total, chunk_size):
        stop = min(start + chunk_size, m_total)
        eta_chunk = beta[start:stop] @ data.x.T
        if spec.has_u:
            eta_chunk += u[start:stop][:, data.region_idx]
        if spec.has_v:
            eta_chunk += v[start:stop][:, data.family_idx]
        for l in range(start, stop):
            out[l] = kernels.cumlogit_pointwise(
                data.y, np.ascontiguousarray(eta_chunk[l - start]),
                np.ascontiguousarray(alpha[l]))

    cp_bar = ConstrainedParams(
        alpha_c=alpha.mean(axis=0),
        beta_c=beta.mean(axis=0) if spec.n_covariates else np.empty(0),
        phi_ustar=None, phi_v=None,
        u=u.mean(axis=0) if spec.has_u else None,
        v=v.mean(axis=0) if spec.has_v else None,
    )
    eta_bar = _eta_vector(cp_bar, data, spec)
    plugin = kernels.cumlogit_pointwise(
        data.y, eta_bar, np.ascontiguousarray(cp_bar.alpha_c))
    return PointwiseLogLik(out, plugin)
