"""Benchmark objectives with analytic derivatives and finite-difference checks.

Three statistical-learning problems (nonconvexly regularized logistic
regression, sigmoid least squares, robust linear regression) plus a synthetic
quartic with a planted second-order stationary point.  Every instance carries
value/gradient/hessian evaluators that are mutually consistent under central
finite differences, a finite lower bound where one exists, and optional
Lipschitz hints for schedule construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.sparse
from scipy.special import expit

from .exceptions import InvalidInputError

FD_STEP = 1e-6


@dataclass(frozen=True)
class LipschitzHints:
    L: float  # spectral-norm Hessian Lipschitz constant
    L_F: float  # Frobenius-norm Hessian Lipschitz constant
    L_H: Optional[float] = None  # mean-cubed smoothness constant of the oracle


@dataclass(frozen=True)
class ProblemInstance:
    """Objective with exact evaluators and metadata.

    ``gradient_minibatch`` / ``hessian_minibatch`` are unbiased estimators of
    the full derivatives built from a sample-index subset; they exist only
    for finite-sum problems (``sample_count > 0``).
    """

    name: str
    dim: int
    sample_count: int
    value: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    hessian: Callable[[np.ndarray], np.ndarray]
    f_low: float = -np.inf
    reg_lambda: float = 0.0
    reg_gamma: float = 0.0
    lipschitz_hints: Optional[LipschitzHints] = None
    gradient_minibatch: Optional[Callable] = None
    hessian_minibatch: Optional[Callable] = None
    meta: dict = field(default_factory=dict)


def _exact_sym(H: np.ndarray) -> np.ndarray:
    # (H + H^T)/2 is bitwise symmetric: FP addition is commutative.
    return (H + H.T) / 2.0


def _as_design(A):
    if scipy.sparse.issparse(A):
        return scipy.sparse.csr_matrix(A).astype(float)
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise InvalidInputError("feature matrix must be 2-d")
    return A


def _weighted_gram(A, w: np.ndarray) -> np.ndarray:
    """Dense A^T diag(w) A for dense or CSR A."""
    if scipy.sparse.issparse(A):
        G = (A.T @ A.multiply(w[:, None])).toarray()
    else:
        G = A.T @ (A * w[:, None])
    return _exact_sym(G)


def _rows(A, idx):
    return A[idx]


# ---------------------------------------------------------------------------
# Smooth nonconvex regularizer  lam * sum_j (gamma x_j)^2 / (1 + (gamma x_j)^2)
# ---------------------------------------------------------------------------

def _reg_value(x, lam, gamma):
    if lam == 0.0 or gamma == 0.0:
        return 0.0
    u2 = (gamma * x) ** 2
    return float(lam * np.sum(u2 / (1.0 + u2)))


def _reg_gradient(x, lam, gamma):
    if lam == 0.0 or gamma == 0.0:
        return np.zeros_like(x)
    u2 = (gamma * x) ** 2
    return 2.0 * lam * gamma**2 * x / (1.0 + u2) ** 2


def _reg_hessian_diag(x, lam, gamma):
    if lam == 0.0 or gamma == 0.0:
        return np.zeros_like(x)
    u2 = (gamma * x) ** 2
    return 2.0 * lam * gamma**2 * (1.0 - 3.0 * u2) / (1.0 + u2) ** 3


def _check_point(x, dim) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (dim,):
        raise InvalidInputError(f"point has shape {x.shape}, expected ({dim},)")
    if not np.all(np.isfinite(x)):
        raise InvalidInputError("point has non-finite entries")
    return x


def logistic_objective(
    A, b, reg_lambda: float = 0.001, reg_gamma: float = 10.0,
    negate_data_term: bool = True,
) -> ProblemInstance:
    """Logistic regression with a bounded nonconvex regularizer.

    The data-fit term is the Bernoulli log-likelihood
    sum_i [b_i ln(phi(a_i^T x)) + (1-b_i) ln(1 - phi(a_i^T x))].  With
    ``negate_data_term`` (the default) the negative log-likelihood is
    minimized, which is the standard, lower-bounded problem; the raw
    likelihood form is available for completeness but is unbounded below, so
    its ``f_low`` is -inf.
    """
    A = _as_design(A)
    b = np.asarray(b, dtype=float)
    m, n = A.shape
    if b.shape != (m,):
        raise InvalidInputError(f"labels have shape {b.shape}, expected ({m},)")
    if not np.all((b == 0.0) | (b == 1.0)):
        raise InvalidInputError("logistic labels must lie in {0, 1}")
    if reg_lambda < 0 or reg_gamma < 0:
        raise InvalidInputError("regularizer parameters must be nonnegative")
    sign = 1.0 if negate_data_term else -1.0

    def nll(x):
        t = A @ x
        # softplus(t) - b t, elementwise stable
        return float(np.sum(np.logaddexp(0.0, t) - b * t))

    def value(x):
        x = _check_point(x, n)
        return sign * nll(x) + _reg_value(x, reg_lambda, reg_gamma)

    def gradient(x):
        x = _check_point(x, n)
        p = expit(A @ x)
        return sign * (A.T @ (p - b)) + _reg_gradient(x, reg_lambda, reg_gamma)

    def hessian(x):
        x = _check_point(x, n)
        p = expit(A @ x)
        H = sign * _weighted_gram(A, p * (1.0 - p))
        H[np.diag_indices(n)] += _reg_hessian_diag(x, reg_lambda, reg_gamma)
        return _exact_sym(H)

    def gradient_minibatch(x, idx):
        x = _check_point(x, n)
        idx = np.asarray(idx)
        As, bs = _rows(A, idx), b[idx]
        p = expit(As @ x)
        scale = m / idx.size  # data term is a sum over samples
        return sign * scale * (As.T @ (p - bs)) + _reg_gradient(
            x, reg_lambda, reg_gamma
        )

    def hessian_minibatch(x, idx):
        x = _check_point(x, n)
        idx = np.asarray(idx)
        As = _rows(A, idx)
        p = expit(As @ x)
        H = sign * (m / idx.size) * _weighted_gram(As, p * (1.0 - p))
        H[np.diag_indices(n)] += _reg_hessian_diag(x, reg_lambda, reg_gamma)
        return _exact_sym(H)

    return ProblemInstance(
        name="logistic",
        dim=n,
        sample_count=m,
        value=value,
        gradient=gradient,
        hessian=hessian,
        f_low=0.0 if negate_data_term else -np.inf,
        reg_lambda=reg_lambda,
        reg_gamma=reg_gamma,
        gradient_minibatch=gradient_minibatch,
        hessian_minibatch=hessian_minibatch,
        meta={"negate_data_term": negate_data_term, "labels": "zero_one"},
    )


def nls_objective(
    A, b, reg_lambda: float = 0.001, reg_gamma: float = 1.0
) -> ProblemInstance:
    """Nonlinear least squares through a sigmoid link, plus the regularizer.

    f(x) = (1/m) sum_i (b_i - phi(a_i^T x))^2 + reg(x), phi the sigmoid.
    """
    A = _as_design(A)
    b = np.asarray(b, dtype=float)
    m, n = A.shape
    if m == 0:
        raise InvalidInputError("nls objective needs at least one sample")
    if b.shape != (m,):
        raise InvalidInputError(f"labels have shape {b.shape}, expected ({m},)")
    if reg_lambda < 0 or reg_gamma < 0:
        raise InvalidInputError("regularizer parameters must be nonnegative")

    def _fit_terms(As, bs, x):
        p = expit(As @ x)
        dp = p * (1.0 - p)
        ddp = dp * (1.0 - 2.0 * p)
        resid = p - bs
        return p, dp, ddp, resid

    def value(x):
        x = _check_point(x, n)
        p = expit(A @ x)
        return float(np.mean((b - p) ** 2)) + _reg_value(x, reg_lambda, reg_gamma)

    def gradient(x):
        x = _check_point(x, n)
        _, dp, _, resid = _fit_terms(A, b, x)
        return (2.0 / m) * (A.T @ (resid * dp)) + _reg_gradient(
            x, reg_lambda, reg_gamma
        )

    def hessian(x):
        x = _check_point(x, n)
        _, dp, ddp, resid = _fit_terms(A, b, x)
        H = (2.0 / m) * _weighted_gram(A, dp**2 + resid * ddp)
        H[np.diag_indices(n)] += _reg_hessian_diag(x, reg_lambda, reg_gamma)
        return _exact_sym(H)

    def gradient_minibatch(x, idx):
        x = _check_point(x, n)
        idx = np.asarray(idx)
        As, bs = _rows(A, idx), b[idx]
        _, dp, _, resid = _fit_terms(As, bs, x)
        return (2.0 / idx.size) * (As.T @ (resid * dp)) + _reg_gradient(
            x, reg_lambda, reg_gamma
        )

    def hessian_minibatch(x, idx):
        x = _check_point(x, n)
        idx = np.asarray(idx)
        As, bs = _rows(A, idx), b[idx]
        _, dp, ddp, resid = _fit_terms(As, bs, x)
        H = (2.0 / idx.size) * _weighted_gram(As, dp**2 + resid * ddp)
        H[np.diag_indices(n)] += _reg_hessian_diag(x, reg_lambda, reg_gamma)
        return _exact_sym(H)

    return ProblemInstance(
        name="nls",
        dim=n,
        sample_count=m,
        value=value,
        gradient=gradient,
        hessian=hessian,
        f_low=0.0,
        reg_lambda=reg_lambda,
        reg_gamma=reg_gamma,
        gradient_minibatch=gradient_minibatch,
        hessian_minibatch=hessian_minibatch,
        meta={},
    )


def robust_regression_objective(
    A, b, reg_lambda: float = 0.0, reg_gamma: float = 1.0,
    include_regularizer: bool = False,
) -> ProblemInstance:
    """Robust linear regression with the log-quadratic loss.

    f(x) = (1/m) sum_i rho(b_i - a_i^T x), rho(t) = ln(t^2/2 + 1).  The loss
    is nonconvex (rho'' changes sign at |t| = sqrt(2)).  The bounded
    regularizer can be switched on to match the other two problems.
    """
    A = _as_design(A)
    b = np.asarray(b, dtype=float)
    m, n = A.shape
    if m < 1:
        raise InvalidInputError("robust regression needs at least one sample")
    if b.shape != (m,):
        raise InvalidInputError(f"labels have shape {b.shape}, expected ({m},)")
    lam = reg_lambda if include_regularizer else 0.0

    def _loss_terms(As, bs, x):
        e = bs - As @ x
        den = e**2 / 2.0 + 1.0
        rho = np.log(den)
        d1 = e / den
        d2 = (1.0 - e**2 / 2.0) / den**2
        return rho, d1, d2

    def value(x):
        x = _check_point(x, n)
        rho, _, _ = _loss_terms(A, b, x)
        return float(np.mean(rho)) + _reg_value(x, lam, reg_gamma)

    def gradient(x):
        x = _check_point(x, n)
        _, d1, _ = _loss_terms(A, b, x)
        return -(A.T @ d1) / m + _reg_gradient(x, lam, reg_gamma)

    def hessian(x):
        x = _check_point(x, n)
        _, _, d2 = _loss_terms(A, b, x)
        H = _weighted_gram(A, d2) / m
        H[np.diag_indices(n)] += _reg_hessian_diag(x, lam, reg_gamma)
        return _exact_sym(H)

    def gradient_minibatch(x, idx):
        x = _check_point(x, n)
        idx = np.asarray(idx)
        As, bs = _rows(A, idx), b[idx]
        _, d1, _ = _loss_terms(As, bs, x)
        return -(As.T @ d1) / idx.size + _reg_gradient(x, lam, reg_gamma)

    def hessian_minibatch(x, idx):
        x = _check_point(x, n)
        idx = np.asarray(idx)
        As, bs = _rows(A, idx), b[idx]
        _, _, d2 = _loss_terms(As, bs, x)
        H = _weighted_gram(As, d2) / idx.size
        H[np.diag_indices(n)] += _reg_hessian_diag(x, lam, reg_gamma)
        return _exact_sym(H)

    return ProblemInstance(
        name="robust",
        dim=n,
        sample_count=m,
        value=value,
        gradient=gradient,
        hessian=hessian,
        f_low=0.0,
        reg_lambda=lam,
        reg_gamma=reg_gamma,
        gradient_minibatch=gradient_minibatch,
        hessian_minibatch=hessian_minibatch,
        meta={"include_regularizer": include_regularizer},
    )


def quartic_lipschitz_hints(n: int, radius: float) -> LipschitzHints:
    """Closed-form Hessian Lipschitz constants of the synthetic quartic on
    the ball ||x - x*|| <= radius.

    The Hessian is ||d||^2 I + 2 d d^T + Q with d = x - x*; differences of
    the first term are bounded by 2R||dx|| in spectral norm (sqrt(n) 2R||dx||
    in Frobenius norm) and of the rank-2 second term by 4R||dx|| in both, so
    L = 6R and L_F = 2R(sqrt(n) + 2).
    """
    return LipschitzHints(L=6.0 * radius, L_F=2.0 * radius * (np.sqrt(n) + 2.0))


def synthetic_quartic(
    n: int, seed: int = 0, region_radius: float = 1.0,
    curvature_scale: float = 1.0, curvature_floor: float = 0.0,
) -> ProblemInstance:
    """Quartic bowl with a planted global minimizer and known constants.

    f(x) = (1/4) ||x - x*||^4 + (1/2) (x - x*)^T Q (x - x*) with random
    Q >= 0 whose spectrum lies in [curvature_floor, curvature_scale].  x* is
    an exact second-order stationary point and f_low = 0.
    """
    if n < 1:
        raise InvalidInputError("dimension must be >= 1")
    if not (0 <= curvature_floor <= curvature_scale):
        raise InvalidInputError("need 0 <= curvature_floor <= curvature_scale")
    rng = np.random.default_rng(seed)
    B = rng.standard_normal((n, n))
    Q = _exact_sym(B.T @ B)
    Q *= (curvature_scale - curvature_floor) / np.linalg.norm(Q, 2)
    if curvature_floor > 0:
        Q[np.diag_indices(n)] += curvature_floor
    x_star = rng.standard_normal(n)

    def value(x):
        x = _check_point(x, n)
        d = x - x_star
        return float(0.25 * np.dot(d, d) ** 2 + 0.5 * d @ (Q @ d))

    def gradient(x):
        x = _check_point(x, n)
        d = x - x_star
        return np.dot(d, d) * d + Q @ d

    def hessian(x):
        x = _check_point(x, n)
        d = x - x_star
        H = np.dot(d, d) * np.eye(n) + 2.0 * np.outer(d, d) + Q
        return _exact_sym(H)

    return ProblemInstance(
        name="quartic",
        dim=n,
        sample_count=0,
        value=value,
        gradient=gradient,
        hessian=hessian,
        f_low=0.0,
        lipschitz_hints=quartic_lipschitz_hints(n, region_radius),
        meta={"x_star": x_star, "Q": Q, "region_radius": region_radius},
    )


# ---------------------------------------------------------------------------
# Finite-difference self-checks
# ---------------------------------------------------------------------------

def fd_gradient(value_fn, x, step: float = FD_STEP) -> np.ndarray:
    """Central-difference gradient of a scalar function."""
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = step
        g[i] = (value_fn(x + e) - value_fn(x - e)) / (2.0 * step)
    return g


def fd_hessian(gradient_fn, x, step: float = FD_STEP) -> np.ndarray:
    """Central differences of the analytic gradient, column by column."""
    x = np.asarray(x, dtype=float)
    n = x.size
    H = np.zeros((n, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = step
        H[:, j] = (gradient_fn(x + e) - gradient_fn(x - e)) / (2.0 * step)
    return (H + H.T) / 2.0


def check_derivatives(
    problem: ProblemInstance, seed: int = 0, n_points: int = 10, scale: float = 1.0
) -> tuple[float, float]:
    """Max relative finite-difference errors of gradient and Hessian.

    Errors are ||fd - analytic|| / (1 + ||analytic||) maximized over
    ``n_points`` random points drawn from N(0, scale^2).
    """
    rng = np.random.default_rng(seed)
    worst_g = worst_h = 0.0
    for _ in range(n_points):
        x = scale * rng.standard_normal(problem.dim)
        g = problem.gradient(x)
        g_err = np.linalg.norm(fd_gradient(problem.value, x) - g) / (
            1.0 + np.linalg.norm(g)
        )
        H = problem.hessian(x)
        h_err = np.linalg.norm(fd_hessian(problem.gradient, x) - H, "fro") / (
            1.0 + np.linalg.norm(H, "fro")
        )
        worst_g = max(worst_g, g_err)
        worst_h = max(worst_h, h_err)
    return worst_g, worst_h
