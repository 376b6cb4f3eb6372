"""No-U-Turn sampler with dual-averaging step size and diagonal mass matrix.

The tree construction uses multiplicative doubling with multinomial sampling
from the trajectory and the generalised no-U-turn criterion (momentum-sum
checks across subtrees).  Warmup interleaves dual averaging of the step size
with expanding memoryless windows that estimate the diagonal inverse mass
from regularised sample variances; both are frozen after warmup.

Deterministic by construction: every chain owns a private generator derived
from ``(seed, chain_index)``, so results do not depend on scheduling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = ["SamplerConfig", "DrawsStore", "SamplingError", "leapfrog",
           "nuts_transition", "run_chains"]


class SamplingError(RuntimeError):
    """Raised when sampling or adaptation fails in a detectable way."""


@dataclass(frozen=True)
class SamplerConfig:
    n_chains: int = 4
    n_iterations: int = 2000
    n_warmup: int = 1000
    target_accept: float = 0.8
    max_tree_depth: int = 10
    divergence_threshold: float = 1000.0
    seed: int = 0

    def __post_init__(self):
        if self.n_chains < 1:
            raise ValueError("n_chains must be at least 1")
        if not 0 <= self.n_warmup < self.n_iterations:
            raise ValueError("need 0 <= n_warmup < n_iterations")
        if not 0.0 < self.target_accept < 1.0:
            raise ValueError("target_accept must lie in (0, 1)")
        if self.max_tree_depth < 1:
            raise ValueError("max_tree_depth must be at least 1")

    @property
    def n_retained(self) -> int:
        return self.n_iterations - self.n_warmup


@dataclass
class DrawsStore:
    """Retained draws of named quantities plus per-iteration sampler metadata.

    ``draws`` has shape (n_chains, n_retained, n_names); metadata arrays are
    (n_chains, n_retained).
    """

    names: list
    draws: np.ndarray
    divergent: np.ndarray
    tree_depth: np.ndarray
    step_size: np.ndarray
    accept_stat: np.ndarray
    config: SamplerConfig
    _index: dict = field(init=False, repr=False)

    def __post_init__(self):
        self._index = {name: k for k, name in enumerate(self.names)}
        if self.draws.shape[2] != len(self.names):
            raise ValueError("draws width must match name count")

    @property
    def n_chains(self) -> int:
        return self.draws.shape[0]

    @property
    def n_retained(self) -> int:
        return self.draws.shape[1]

    @property
    def n_total(self) -> int:
        """Total retained draws across chains (the M of the criteria)."""
        return self.draws.shape[0] * self.draws.shape[1]

    def get(self, name: str) -> np.ndarray:
        """Draws of one quantity, shape (n_chains, n_retained)."""
        return self.draws[:, :, self._index[name]]


def _kinetic(r: np.ndarray, inv_mass: np.ndarray) -> float:
    return 0.5 * float(np.dot(r, inv_mass * r))


def leapfrog(position, momentum, step_size: float, n_steps: int, target,
             inv_mass=None):
    """Standard half-kick / drift / half-kick integration of ``n_steps``.

    Returns the final ``(position, momentum)``.  ``target`` must expose
    ``logp_and_grad``; ``inv_mass`` defaults to the identity.
    """
    q = np.array(position, dtype=float)
    r = np.array(momentum, dtype=float)
    if inv_mass is None:
        inv_mass = np.ones_like(q)
    _, grad = target.logp_and_grad(q)
    for _ in range(n_steps):
        r = r + 0.5 * step_size * grad
        q = q + step_size * inv_mass * r
        _, grad = target.logp_and_grad(q)
        r = r + 0.5 * step_size * grad
    return q, r


def _safe_logp_and_grad(target, q):
    if not np.all(np.isfinite(q)):
        return -np.inf, None
    value, grad = target.logp_and_grad(q)
    if not math.isfinite(value) or not np.all(np.isfinite(grad)):
        return -np.inf, None
    return value, grad


class _Tree:
    """State of one (sub)trajectory during doubling."""

    __slots__ = ("q_minus", "r_minus", "grad_minus", "q_plus", "r_plus",
                 "grad_plus", "r_sum", "q", "logp", "grad", "log_w", "alive",
                 "alpha", "n_alpha", "divergent")

    def __init__(self, q, r, logp, grad, log_w, alive, alpha, divergent):
        self.q_minus = q
        self.q_plus = q
        self.r_minus = r
        self.r_plus = r
        self.grad_minus = grad
        self.grad_plus = grad
        self.r_sum = r.copy()
        self.q = q
        self.logp = logp
        self.grad = grad
        self.log_w = log_w
        self.alive = alive
        self.alpha = alpha
        self.n_alpha = 1
        self.divergent = divergent

    def merge(self, other: "_Tree", direction: int, root: bool,
              inv_mass: np.ndarray, rng: np.random.Generator):
        if direction == -1:
            self.q_minus = other.q_minus
            self.r_minus = other.r_minus
            self.grad_minus = other.grad_minus
            r_inner_minus = other.r_plus
            r_inner_plus = self.r_minus
            r_sum_minus, r_sum_plus = other.r_sum, self.r_sum
        else:
            self.q_plus = other.q_plus
            self.r_plus = other.r_plus
            self.grad_plus = other.grad_plus
            r_inner_minus = self.r_plus
            r_inner_plus = other.r_minus
            r_sum_minus, r_sum_plus = self.r_sum, other.r_sum

        self.alpha += other.alpha
        self.n_alpha += other.n_alpha
        self.divergent |= other.divergent
        self.alive &= other.alive
        if not self.alive:
            return

        # within build_tree the proposal is multinomial over the combined
        # weight; at the root the new subtree is accepted progressively
        if not root:
            self.log_w = np.logaddexp(self.log_w, other.log_w)
        accept_logp = min(0.0, other.log_w - self.log_w)
        if math.log(max(rng.random(), 1e-300)) < accept_logp:
            self.q = other.q
            self.logp = other.logp
            self.grad = other.grad
        if root:
            self.log_w = np.logaddexp(self.log_w, other.log_w)

        self.r_sum = self.r_sum + other.r_sum

        def sharp(r):
            return inv_mass * r

        ok = True
        ok &= float(np.dot(self.r_sum, sharp(self.r_minus))) > 0.0
        ok &= float(np.dot(self.r_sum, sharp(self.r_plus))) > 0.0
        # across-subtree checks of the generalised criterion
        left = r_sum_minus + r_inner_plus
        ok &= float(np.dot(left, sharp(self.r_minus))) > 0.0
        ok &= float(np.dot(left, sharp(r_inner_plus))) > 0.0
        right = r_sum_plus + r_inner_minus
        ok &= float(np.dot(right, sharp(r_inner_minus))) > 0.0
        ok &= float(np.dot(right, sharp(self.r_plus))) > 0.0
        self.alive &= ok


def _leaf(target, q, r, grad, direction, step_size, inv_mass, h0,
          div_threshold):
    """One leapfrog step in ``direction``; returns a single-point tree."""
    eps = direction * step_size
    r_new = r + 0.5 * eps * grad
    q_new = q + eps * inv_mass * r_new
    logp, grad_new = _safe_logp_and_grad(target, q_new)
    if grad_new is None:
        return _Tree(q_new, r_new, -np.inf, np.zeros_like(q), -np.inf,
                     False, 0.0, True)
    r_new = r_new + 0.5 * eps * grad_new
    # log weight relative to the initial energy; -inf marks divergence
    log_w = logp - _kinetic(r_new, inv_mass) + h0
    divergent = not math.isfinite(log_w) or -log_w > div_threshold
    alpha = min(1.0, math.exp(min(log_w, 0.0)))
    return _Tree(q_new, r_new, logp, grad_new, log_w, not divergent, alpha,
                 divergent)


def _build_tree(target, tree: _Tree, depth, direction, step_size, inv_mass,
                h0, div_threshold, rng):
    if direction == -1:
        q, r, grad = tree.q_minus, tree.r_minus, tree.grad_minus
    else:
        q, r, grad = tree.q_plus, tree.r_plus, tree.grad_plus
    if depth == 0:
        return _leaf(target, q, r, grad, direction, step_size, inv_mass, h0,
                     div_threshold)
    sub = _build_tree(target, tree, depth - 1, direction, step_size,
                      inv_mass, h0, div_threshold, rng)
    if sub.alive:
        sub2 = _build_tree(target, sub, depth - 1, direction, step_size,
                           inv_mass, h0, div_threshold, rng)
        sub.merge(sub2, direction, root=False, inv_mass=inv_mass, rng=rng)
    return sub


def nuts_transition(position, step_size, inv_mass, target, rng,
                    logp=None, grad=None, max_tree_depth=10,
                    divergence_threshold=1000.0):
    """One NUTS update from ``position``; returns (q, logp, grad, stats).

    ``stats`` reports the mean acceptance statistic over the trajectory, the
    tree depth reached, the leapfrog step count, and a divergence flag.
    ``logp``/``grad`` at the current position may be passed to avoid a
    re-evaluation.
    """
    position = np.asarray(position, dtype=float)
    if logp is None or grad is None:
        logp, grad = _safe_logp_and_grad(target, position)
        if grad is None:
            raise ValueError("current position must have finite density")
    dim = position.shape[0]
    r0 = rng.standard_normal(dim) / np.sqrt(inv_mass)
    h0 = -(logp - _kinetic(r0, inv_mass))  # so leaf weights are logp-K+h0
    tree = _Tree(position, r0, logp, grad, 0.0, True, 1.0, False)
    depth = 0
    while depth < max_tree_depth and tree.alive:
        direction = 1 if rng.integers(0, 2) else -1
        sub = _build_tree(target, tree, depth, direction, step_size,
                          inv_mass, h0, divergence_threshold, rng)
        tree.merge(sub, direction, root=True, inv_mass=inv_mass, rng=rng)
        depth += 1
    stats = {
        "accept_stat": tree.alpha / tree.n_alpha,
        "depth": depth,
        "n_steps": tree.n_alpha,
        "divergent": tree.divergent,
    }
    return tree.q, tree.logp, tree.grad, stats


def _find_reasonable_step_size(target, q, logp, grad, inv_mass, rng):
    """Double/halve until the one-step acceptance crosses 1/2."""
    eps = 1.0
    r = rng.standard_normal(q.shape[0]) / np.sqrt(inv_mass)
    h0 = logp - _kinetic(r, inv_mass)

    def log_ratio(eps):
        r1 = r + 0.5 * eps * grad
        q1 = q + eps * inv_mass * r1
        logp1, grad1 = _safe_logp_and_grad(target, q1)
        if grad1 is None:
            return -np.inf
        r1 = r1 + 0.5 * eps * grad1
        return logp1 - _kinetic(r1, inv_mass) - h0

    direction = 1.0 if log_ratio(eps) > math.log(0.5) else -1.0
    for _ in range(100):
        if direction * log_ratio(eps) <= -direction * math.log(2.0):
            break
        eps *= 2.0 ** direction
        if not 1e-10 < eps < 1e10:
            raise SamplingError("could not find a reasonable step size")
    return eps


class _DualAveraging:
    """Nesterov dual averaging of log step size (Hoffman & Gelman)."""

    gamma = 0.05
    t0 = 10.0
    kappa = 0.75

    def __init__(self, eps0: float, target_accept: float):
        self.mu = math.log(10.0 * eps0)
        self.log_eps = math.log(eps0)
        self.log_eps_bar = 0.0
        self.h_bar = 0.0
        self.m = 0
        self.delta = target_accept

    def update(self, accept_prob: float) -> float:
        self.m += 1
        frac = 1.0 / (self.m + self.t0)
        self.h_bar = (1.0 - frac) * self.h_bar \
            + frac * (self.delta - accept_prob)
        self.log_eps = self.mu - math.sqrt(self.m) / self.gamma * self.h_bar
        w = self.m ** -self.kappa
        self.log_eps_bar = w * self.log_eps + (1.0 - w) * self.log_eps_bar
        return math.exp(self.log_eps)

    @property
    def adapted(self) -> float:
        return math.exp(self.log_eps_bar)


class _Welford:
    """Online mean/variance accumulator for the mass-matrix windows."""

    def __init__(self, dim: int):
        self.n = 0
        self.mean = np.zeros(dim)
        self.m2 = np.zeros(dim)

    def add(self, x: np.ndarray):
        self.n += 1
        delta = x - self.mean
        self.mean += delta / self.n
        self.m2 += delta * (x - self.mean)

    def variance(self) -> np.ndarray:
        """Regularised sample variance (shrunk toward 1e-3, Stan-style)."""
        if self.n < 2:
            return np.ones_like(self.mean)
        var = self.m2 / (self.n - 1)
        w = self.n / (self.n + 5.0)
        return w * var + (1.0 - w) * 1e-3


def _mass_windows(n_warmup: int):
    """(first_start, end_indices) of the mass-estimation windows in warmup.

    A short step-size-only buffer opens warmup, doubling variance windows
    fill the middle, and a final buffer re-tunes the step size against the
    frozen mass matrix.  Very short warmups skip mass adaptation entirely.
    """
    if n_warmup < 20:
        return 0, []
    if n_warmup >= 150:
        init, term, base = 75, 50, 25
    else:
        init = max(1, int(0.15 * n_warmup))
        term = max(1, int(0.10 * n_warmup))
        base = n_warmup - init - term
    ends = []
    start, width = init, base
    while start < n_warmup - term:
        end = start + width
        if end + 2 * width > n_warmup - term:
            end = n_warmup - term
        ends.append(end)
        start, width = end, 2 * width
    return init, ends


def _chain_rng(seed: int, chain_index: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence(entropy=seed, spawn_key=(chain_index,)))


def adapt(target, config: SamplerConfig, chain_index: int = 0):
    """Run only the warmup phase; returns the frozen (step_size, mass_diag).

    ``mass_diag`` is the diagonal of the inverse mass matrix, i.e. the
    regularised posterior variance estimate per unconstrained coordinate.
    """
    if config.n_warmup == 0:
        raise ValueError("adapt needs n_warmup > 0")
    return _run_chain(target, config, chain_index, warmup_only=True)


def _run_chain(target, config: SamplerConfig, chain_index: int,
               warmup_only: bool = False):
    rng = _chain_rng(config.seed, chain_index)
    dim = target.dim
    if hasattr(target, "initial_point"):
        q = np.asarray(target.initial_point(rng), dtype=float)
    else:
        q = rng.uniform(-2.0, 2.0, dim)
    logp, grad = _safe_logp_and_grad(target, q)
    for _ in range(100):
        if grad is not None:
            break
        q = rng.uniform(-2.0, 2.0, dim)
        logp, grad = _safe_logp_and_grad(target, q)
    else:
        raise SamplingError(f"chain {chain_index}: no finite starting point "
                            "found in [-2, 2]")

    warmup = config.n_warmup
    inv_mass = np.ones(dim)
    eps = _find_reasonable_step_size(target, q, logp, grad, inv_mass, rng)
    da = _DualAveraging(eps, config.target_accept)
    welford = _Welford(dim)
    window_start, window_ends = _mass_windows(warmup)
    next_window = 0

    retained = config.n_retained
    names = list(getattr(target, "record_names", None)
                 or [f"x[{i + 1}]" for i in range(dim)])
    record = getattr(target, "record", None)
    draws = np.empty((retained, len(names) + 1))
    divergent = np.zeros(retained, dtype=bool)
    tree_depth = np.zeros(retained, dtype=np.int16)
    step_sizes = np.empty(retained)
    accept = np.empty(retained)

    for it in range(config.n_iterations):
        q, logp, grad, stats = nuts_transition(
            q, eps, inv_mass, target, rng, logp=logp, grad=grad,
            max_tree_depth=config.max_tree_depth,
            divergence_threshold=config.divergence_threshold)
        if it < warmup:
            eps = da.update(stats["accept_stat"])
            if not math.isfinite(eps) or eps < 1e-12:
                raise SamplingError(
                    f"chain {chain_index}: step-size adaptation collapsed "
                    f"(eps={eps!r} at warmup iteration {it})")
            if next_window < len(window_ends) and it >= window_start:
                welford.add(q)
                if it + 1 == window_ends[next_window]:
                    inv_mass = welford.variance()
                    welford = _Welford(dim)
                    window_start = window_ends[next_window]
                    next_window += 1
                    eps = _find_reasonable_step_size(
                        target, q, logp, grad, inv_mass, rng)
                    da = _DualAveraging(eps, config.target_accept)
            if it + 1 == warmup:
                eps = da.adapted
                if warmup_only:
                    return eps, inv_mass.copy()
        else:
            k = it - warmup
            draws[k, :-1] = record(q) if record is not None else q
            draws[k, -1] = logp
            divergent[k] = stats["divergent"]
            tree_depth[k] = stats["depth"]
            step_sizes[k] = eps
            accept[k] = stats["accept_stat"]

    return {"names": names + ["lp"], "draws": draws, "divergent": divergent,
            "tree_depth": tree_depth, "step_size": step_sizes,
            "accept_stat": accept}


def run_chains(target, config: SamplerConfig) -> DrawsStore:
    """Run ``config.n_chains`` independent chains and collect retained draws.

    Fails with :class:`SamplingError` if any chain ends with more than 10%
    divergent post-warmup transitions.
    """
    results = [_run_chain(target, config, c) for c in range(config.n_chains)]
    names = results[0]["names"]
    store = DrawsStore(
        names=names,
        draws=np.stack([r["draws"] for r in results]),
        divergent=np.stack([r["divergent"] for r in results]),
        tree_depth=np.stack([r["tree_depth"] for r in results]),
        step_size=np.stack([r["step_size"] for r in results]),
        accept_stat=np.stack([r["accept_stat"] for r in results]),
        config=config,
    )
    rates = store.divergent.mean(axis=1)
    if np.any(rates > 0.10):
        report = ", ".join(f"chain {c}: {rate:.1%}"
                           for c, rate in enumerate(rates) if rate > 0.10)
        raise SamplingError("excessive divergent transitions -- " + report)
    return store
