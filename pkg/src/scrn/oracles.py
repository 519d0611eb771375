"""Stochastic gradient and Hessian estimators with calibrated error moments.

All sampling is driven by explicit ``numpy.random.Generator`` handles derived
from ``(master_seed, oracle_id, iteration)`` through
:func:`oracle_stream`, a splittable counter-based scheme: fixing the master
seed fixes every sample, and independent streams per iteration keep coupled
evaluations (see :func:`paired_hessian_samples`) reproducible under any
execution order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .exceptions import InvalidInputError

GRADIENT_STREAM = 0
HESSIAN_STREAM = 1
ITERATE_STREAM = 2  # reserved for the harness (reported-iterate draw)

GRADIENT_KINDS = ("exact", "gaussian_noise", "minibatch")
HESSIAN_KINDS = ("exact", "element_subsample", "minibatch", "gaussian_noise")


def oracle_stream(master_seed: int, oracle_id: int, k: int) -> np.random.Generator:
    """Independent generator for oracle ``oracle_id`` at iteration ``k``."""
    return np.random.default_rng(
        np.random.SeedSequence(master_seed, spawn_key=(oracle_id, k))
    )


@dataclass(frozen=True)
class GradientOracleSpec:
    kind: str = "exact"
    delta: float = 0.0
    batch_fraction: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in GRADIENT_KINDS:
            raise InvalidInputError(f"unknown gradient oracle kind {self.kind!r}")
        if self.delta < 0:
            raise InvalidInputError("delta must be nonnegative")
        if not (0 < self.batch_fraction <= 1):
            raise InvalidInputError("batch_fraction must lie in (0, 1]")


@dataclass(frozen=True)
class HessianOracleSpec:
    kind: str = "exact"
    keep_probability: float = 0.5
    sigma: float = 0.0
    batch_fraction: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in HESSIAN_KINDS:
            raise InvalidInputError(f"unknown hessian oracle kind {self.kind!r}")
        if not (0 < self.keep_probability <= 1):
            raise InvalidInputError("keep_probability must lie in (0, 1]")
        if self.sigma < 0:
            raise InvalidInputError("sigma must be nonnegative")
        if not (0 < self.batch_fraction <= 1):
            raise InvalidInputError("batch_fraction must lie in (0, 1]")


def _require_finite_point(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise InvalidInputError("evaluation point has non-finite entries")
    return x


def sample_gradient(
    problem, x, spec: GradientOracleSpec, delta_k: float | None = None, rng=None
) -> np.ndarray:
    """One stochastic gradient sample at x.

    ``gaussian_noise`` adds z ~ N(0, (delta_k^2/n) I), so E||z||^2 = delta_k^2
    and, since t -> t^{3/4} is concave, E||z||^{3/2} <= (E||z||^2)^{3/4}
    = delta_k^{3/2}: the 3/2-moment contract holds by construction, not just
    empirically.  ``minibatch`` averages per-sample gradients over a uniform
    subset drawn without replacement.
    """
    x = _require_finite_point(x)
    if delta_k is None:
        delta_k = spec.delta
    if delta_k < 0:
        raise InvalidInputError("delta_k must be nonnegative")
    if spec.kind == "exact":
        return problem.gradient(x)
    if rng is None:
        raise InvalidInputError(f"{spec.kind} gradient oracle needs an rng stream")
    if spec.kind == "gaussian_noise":
        g = problem.gradient(x)
        if delta_k == 0.0:
            return g
        n = x.size
        return g + rng.normal(0.0, delta_k / np.sqrt(n), size=n)
    # minibatch
    if problem.sample_count <= 0:
        raise InvalidInputError("minibatch oracle needs a finite-sum problem")
    idx = _draw_batch(problem.sample_count, spec.batch_fraction, rng)
    return problem.gradient_minibatch(x, idx)


def _draw_batch(m: int, fraction: float, rng) -> np.ndarray:
    size = int(np.ceil(fraction * m))
    size = max(1, min(size, m))
    return rng.choice(m, size=size, replace=False)


def _pair_mask(n: int, p: float, rng) -> np.ndarray:
    """Symmetric keep-mask: one coin per unordered index pair (i <= j)."""
    coins = rng.random((n, n)) < p
    upper = np.triu(coins)
    return upper | upper.T


def _sym_gaussian(n: int, sigma: float, rng) -> np.ndarray:
    """Symmetric Gaussian perturbation with E||E||_F^3 = sigma^3 exactly.

    Entries are built from d = n(n+1)/2 iid N(0, tau^2) variables w placed on
    the diagonal and, scaled by 1/sqrt(2), on the off-diagonal pairs, so that
    ||E||_F^2 = sum(w^2) = tau^2 * chi^2_d.  Choosing
    tau = sigma / E[(chi^2_d)^{3/2}]^{1/3} makes the third moment equal to
    sigma^3 (E[(chi^2_d)^{3/2}] = 2^{3/2} Gamma((d+3)/2) / Gamma(d/2)).
    """
    if sigma == 0.0:
        return np.zeros((n, n))
    d = n * (n + 1) // 2
    chi_moment = 2.0**1.5 * np.exp(gammaln((d + 3) / 2.0) - gammaln(d / 2.0))
    tau = sigma / chi_moment ** (1.0 / 3.0)
    w = rng.normal(0.0, tau, size=d)
    E = np.zeros((n, n))
    iu = np.triu_indices(n)
    E[iu] = w
    E = E + E.T
    E[np.diag_indices(n)] /= 2.0
    off = ~np.eye(n, dtype=bool)
    E[off] /= np.sqrt(2.0)
    return E


def _draw_hessian_realization(problem, spec: HessianOracleSpec, rng):
    """Draw the randomness of one Hessian sample, independent of the point."""
    if spec.kind == "exact":
        return None
    if rng is None:
        raise InvalidInputError(f"{spec.kind} hessian oracle needs an rng stream")
    n = problem.dim
    if spec.kind == "element_subsample":
        return _pair_mask(n, spec.keep_probability, rng)
    if spec.kind == "minibatch":
        if problem.sample_count <= 0:
            raise InvalidInputError("minibatch oracle needs a finite-sum problem")
        return _draw_batch(problem.sample_count, spec.batch_fraction, rng)
    return _sym_gaussian(n, spec.sigma, rng)  # gaussian_noise


def _apply_hessian_realization(problem, x, spec: HessianOracleSpec, realization):
    if spec.kind == "exact":
        return problem.hessian(x)
    if spec.kind == "element_subsample":
        H = problem.hessian(x)
        return np.where(realization, H / spec.keep_probability, 0.0)
    if spec.kind == "minibatch":
        return problem.hessian_minibatch(x, realization)
    return problem.hessian(x) + realization  # gaussian_noise


def sample_hessian(problem, x, spec: HessianOracleSpec, rng=None) -> np.ndarray:
    """One stochastic Hessian sample at x; always exactly symmetric.

    ``element_subsample`` keeps each unordered entry pair with probability
    ``keep_probability`` (one coin per pair, so symmetry is preserved) and
    rescales kept entries by its inverse, which makes the sample unbiased.
    """
    x = _require_finite_point(x)
    realization = _draw_hessian_realization(problem, spec, rng)
    return _apply_hessian_realization(problem, x, spec, realization)


def paired_hessian_samples(
    problem, x_prev, x_curr, spec: HessianOracleSpec, rng=None
) -> tuple[np.ndarray, np.ndarray]:
    """Two Hessian samples sharing one realization of the randomness.

    The mask / batch / noise draw is made once and applied at both points, so
    the difference of the two outputs reflects only the movement of the
    iterate.  With identical points the outputs are bitwise identical.
    """
    x_prev = _require_finite_point(x_prev)
    x_curr = _require_finite_point(x_curr)
    realization = _draw_hessian_realization(problem, spec, rng)
    h_prev = _apply_hessian_realization(problem, x_prev, spec, realization)
    h_curr = _apply_hessian_realization(problem, x_curr, spec, realization)
    return h_prev, h_curr


def gradient_error_moment(
    problem, x, spec: GradientOracleSpec, delta_k: float, n_samples: int, master_seed: int
) -> tuple[float, float]:
    """Empirical (mean, standard error) of ||g_sample - grad f(x)||^{3/2}."""
    g_true = problem.gradient(x)
    vals = np.empty(n_samples)
    for i in range(n_samples):
        rng = oracle_stream(master_seed, GRADIENT_STREAM, i)
        g = sample_gradient(problem, x, spec, delta_k, rng)
        vals[i] = np.linalg.norm(g - g_true) ** 1.5
    return float(vals.mean()), float(vals.std(ddof=1) / np.sqrt(n_samples))


def hessian_error_moment(
    problem, x, spec: HessianOracleSpec, n_samples: int, master_seed: int
) -> tuple[float, float]:
    """Empirical (mean, standard error) of ||H_sample - hess f(x)||_F^3."""
    H_true = problem.hessian(x)
    vals = np.empty(n_samples)
    for i in range(n_samples):
        rng = oracle_stream(master_seed, HESSIAN_STREAM, i)
        H = sample_hessian(problem, x, spec, rng)
        vals[i] = np.linalg.norm(H - H_true, "fro") ** 3
    return float(vals.mean()), float(vals.std(ddof=1) / np.sqrt(n_samples))
