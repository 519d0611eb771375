"""Cubic-regularized Newton subproblem solvers.

The subproblem is

    min_s  g^T s + (1/2) s^T M s + ||s||^3 / (6 eta)

with symmetric M (possibly indefinite) and eta > 0.  A global minimizer is
characterized by the KKT system

    g + M s + (r / (2 eta)) s = 0,      M + (r / (2 eta)) I  >=  0,

with r = ||s||.  :func:`solve_exact` solves the system through the secular
equation in the radius variable r; :func:`solve_lanczos` projects the model
onto a growing Krylov subspace and solves the projected system until the
lifted KKT residual is small.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .exceptions import InvalidInputError, NumericFailure
from . import linalg

SECULAR_MAX_ITER = 200
# Relative size below which gradient components on the minimum eigenspace are
# treated as zero when probing for the hard case.
HARD_CASE_RTOL = 1e-10


@dataclass(frozen=True)
class CubicModel:
    """Subproblem data: gradient estimate g, Hessian estimate M, weight eta."""

    g: np.ndarray
    M: np.ndarray
    eta: float

    def __post_init__(self):
        g = np.asarray(self.g, dtype=float)
        M = linalg.require_symmetric(self.M, "M")
        if g.ndim != 1 or g.size != M.shape[0]:
            raise InvalidInputError(
                f"gradient shape {g.shape} incompatible with M shape {M.shape}"
            )
        if not np.all(np.isfinite(g)):
            raise InvalidInputError("gradient has non-finite entries")
        if not (np.isfinite(self.eta) and self.eta > 0):
            raise InvalidInputError(f"eta must be positive, got {self.eta}")
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "M", M)

    @property
    def dim(self) -> int:
        return self.g.size


@dataclass(frozen=True)
class CubicSolution:
    """Step plus its KKT certificate.

    ``stationarity_residual`` is ||g + M s + (r/(2 eta)) s|| with r = ||s||;
    ``curvature_margin`` is lambda_min(M) + r/(2 eta).  Accepted solutions
    satisfy residual <= kkt_tol*(1+||g||) and margin >= -kkt_tol*(1+||M||).
    """

    step: np.ndarray
    radius: float
    stationarity_residual: float
    curvature_margin: float
    solver_kind: str  # exact_easy | exact_hard_case | lanczos
    iterations: int = 0
    krylov_dim: int = 0


def model_value(model: CubicModel, s) -> float:
    """Objective of the cubic model at step s."""
    s = np.asarray(s, dtype=float)
    if s.shape != model.g.shape:
        raise InvalidInputError(f"step shape {s.shape} != gradient shape {model.g.shape}")
    r = np.linalg.norm(s)
    return float(model.g @ s + 0.5 * s @ (model.M @ s) + r**3 / (6.0 * model.eta))


def _check_kkt_tol(kkt_tol: float):
    if not (0 < kkt_tol <= 1e-4):
        raise InvalidInputError(f"kkt_tol must lie in (0, 1e-4], got {kkt_tol}")


def _secular_root(evals, ghat, eta, kkt_tol):
    """Root of psi(r) = ||(Lambda + r/(2 eta))^{-1} ghat|| - r on (r_min, inf).

    psi is strictly decreasing, so a safeguarded Newton iteration inside a
    shrinking bisection bracket is globally convergent.  Returns (r, iters).
    """
    lam_min = evals[0]
    r_min = max(0.0, -2.0 * eta * lam_min)
    gnorm = float(np.linalg.norm(ghat))

    def s_norm_and_deriv(r):
        shift = evals + r / (2.0 * eta)
        with np.errstate(over="ignore", divide="ignore"):
            s = ghat / shift
            ns = float(np.linalg.norm(s))
            if not np.isfinite(ns):
                return np.inf, -np.inf
            dn = -float(np.sum(s * s / shift)) / max(ns, 1e-300) / (2.0 * eta)
        return ns, dn

    lo = r_min
    hi = r_min + max(gnorm, 1e-8)
    it = 0
    while s_norm_and_deriv(hi)[0] - hi > 0:
        lo = hi
        hi *= 2.0
        it += 1
        if it > 400:
            raise NumericFailure(
                "secular bracketing failed", detail={"lo": lo, "hi": hi}
            )
    # hi >= r_min + max(gnorm, 1e-8), so the midpoint is strictly above r_min.
    r = 0.5 * (lo + hi)
    for it in range(SECULAR_MAX_ITER):
        ns, dn = s_norm_and_deriv(r)
        psi = ns - r
        # Terminate when both the secular residual and the implied KKT
        # residual |psi| * ||s|| / (2 eta) are inside tolerance.
        if abs(psi) <= kkt_tol * (1.0 + r) and abs(psi) * ns / (2.0 * eta) <= kkt_tol * (
            1.0 + gnorm
        ):
            return r, it
        if psi > 0:
            lo = r
        else:
            hi = r
        r_newton = r - psi / (dn - 1.0) if np.isfinite(dn) else lo
        r = r_newton if lo < r_newton < hi else 0.5 * (lo + hi)
    raise NumericFailure(
        "secular root-finder exceeded max iterations",
        detail={"lo": lo, "hi": hi, "last_r": r, "max_iter": SECULAR_MAX_ITER},
    )


def _solve_spectral(evals, ghat, eta, kkt_tol):
    """Solve the subproblem in an eigenbasis; returns (shat, kind, iters)."""
    n = evals.size
    lam_min = evals[0]
    r_min = max(0.0, -2.0 * eta * lam_min)
    gnorm = float(np.linalg.norm(ghat))

    if gnorm == 0.0 and lam_min >= 0.0:
        return np.zeros(n), "exact_easy", 0

    min_space = np.abs(evals - lam_min) <= 1e-12 * (1.0 + abs(lam_min))
    g_on_min = float(np.linalg.norm(ghat[min_space]))
    if g_on_min <= HARD_CASE_RTOL * gnorm and r_min > 0.0:
        # Candidate hard case: pseudo-inverse solution on the complement of
        # the minimum eigenspace, padded with an eigenvector component so
        # that ||s|| = r_min.
        shift = evals + r_min / (2.0 * eta)
        shat = np.zeros(n)
        rest = ~min_space
        shat[rest] = -ghat[rest] / shift[rest]
        norm_rest = float(np.linalg.norm(shat))
        if norm_rest < r_min:  # psi(r_min+) < 0: boundary root does not exist
            alpha = np.sqrt(max(r_min**2 - norm_rest**2, 0.0))
            shat[np.argmax(min_space)] += alpha
            return shat, "exact_hard_case", 0

    r, iters = _secular_root(evals, ghat, eta, kkt_tol)
    shift = evals + r / (2.0 * eta)
    shat = -ghat / shift
    return shat, "exact_easy", iters


def solve_exact(model: CubicModel, kkt_tol: float = 1e-9) -> CubicSolution:
    """Solve the subproblem by eigendecomposition plus a secular root-find."""
    _check_kkt_tol(kkt_tol)
    evals, Q = np.linalg.eigh(model.M)
    ghat = Q.T @ model.g
    shat, kind, iters = _solve_spectral(evals, ghat, model.eta, kkt_tol)
    s = Q @ shat
    return _certify(model, s, kind, iters, 0, float(evals[0]), kkt_tol)


def _certify(model, s, kind, iters, kdim, lam_min, kkt_tol) -> CubicSolution:
    r = float(np.linalg.norm(s))
    residual = float(
        np.linalg.norm(model.g + model.M @ s + (r / (2.0 * model.eta)) * s)
    )
    margin = lam_min + r / (2.0 * model.eta)
    sol = CubicSolution(
        step=s,
        radius=r,
        stationarity_residual=residual,
        curvature_margin=margin,
        solver_kind=kind,
        iterations=iters,
        krylov_dim=kdim,
    )
    gnorm = float(np.linalg.norm(model.g))
    mnorm = linalg.spectral_norm(model.M)
    if residual > kkt_tol * (1.0 + gnorm) or margin < -kkt_tol * (1.0 + mnorm):
        raise NumericFailure(
            "subproblem solution failed its KKT certificate",
            detail={"residual": residual, "margin": margin, "kkt_tol": kkt_tol},
            partial=sol,
        )
    return sol


def solve_lanczos(
    model: CubicModel, krylov_dim: int, kkt_tol: float = 1e-6
) -> CubicSolution:
    """Solve the subproblem on a growing Krylov subspace of M seeded at g.

    The basis is built with full reorthogonalization; after each expansion
    the projected (tridiagonal) subproblem is solved and the lifted KKT
    residual evaluated in the full space.  On breakdown the basis is reseeded
    with a direction orthogonal to the current subspace.  If the residual is
    still above tolerance when ``krylov_dim`` is reached, a
    :class:`NumericFailure` is raised whose ``partial`` holds the best step
    found with its true residual.
    """
    if krylov_dim < 2:
        raise InvalidInputError(f"krylov_dim must be >= 2, got {krylov_dim}")
    _check_kkt_tol(kkt_tol)
    n = model.dim
    g, M, eta = model.g, model.M, model.eta
    gnorm = float(np.linalg.norm(g))
    lam_min, vmin = linalg.min_eigenpair(M)

    if gnorm == 0.0:
        if lam_min >= 0.0:
            return _certify(model, np.zeros(n), "lanczos", 0, 0, lam_min, kkt_tol)
        seed = vmin  # descent is only available along the negative curvature
    else:
        seed = g / gnorm

    krylov_dim = min(krylov_dim, n)
    V = np.zeros((n, krylov_dim))
    MV = np.zeros((n, krylov_dim))
    alphas = np.zeros(krylov_dim)
    betas = np.zeros(max(krylov_dim - 1, 0))
    V[:, 0] = seed
    best: CubicSolution | None = None

    j = 0
    while j < krylov_dim:
        q = V[:, j]
        u = M @ q
        MV[:, j] = u
        alphas[j] = q @ u
        w = u - alphas[j] * q
        if j > 0:
            w -= betas[j - 1] * V[:, j - 1]
        # Full reorthogonalization: cheap at these dimensions and avoids the
        # classical loss of orthogonality.
        w -= V[:, : j + 1] @ (V[:, : j + 1].T @ w)

        k = j + 1
        try:
            evals, W = scipy.linalg.eigh_tridiagonal(alphas[:k], betas[: k - 1])
        except np.linalg.LinAlgError:
            evals, W = np.linalg.eigh(
                np.diag(alphas[:k])
                + np.diag(betas[: k - 1], 1)
                + np.diag(betas[: k - 1], -1)
            )
        ghat = W.T @ (V[:, :k].T @ g)
        try:
            yhat, _, _ = _solve_spectral(evals, ghat, eta, min(kkt_tol, 1e-9))
        except NumericFailure:
            yhat = None
        if yhat is not None:
            y = W @ yhat
            s = V[:, :k] @ y
            r = float(np.linalg.norm(s))
            residual = float(
                np.linalg.norm(g + MV[:, :k] @ y + (r / (2.0 * eta)) * s)
            )
            margin = lam_min + r / (2.0 * eta)
            cand = CubicSolution(
                step=s,
                radius=r,
                stationarity_residual=residual,
                curvature_margin=margin,
                solver_kind="lanczos",
                iterations=j + 1,
                krylov_dim=k,
            )
            if best is None or cand.stationarity_residual < best.stationarity_residual:
                best = cand
            if residual <= kkt_tol * (1.0 + gnorm) and margin >= -kkt_tol * (
                1.0 + linalg.spectral_norm(M)
            ):
                return cand

        if j + 1 >= krylov_dim:
            break
        beta = float(np.linalg.norm(w))
        if beta <= 1e-14 * max(1.0, linalg.frobenius_norm(M)):
            # Invariant subspace reached: reseed with a direction outside it.
            w = vmin - V[:, : j + 1] @ (V[:, : j + 1].T @ vmin)
            beta = float(np.linalg.norm(w))
            if beta <= 1e-12:
                rng = np.random.default_rng(j)
                for _ in range(10):
                    w = rng.standard_normal(n)
                    w -= V[:, : j + 1] @ (V[:, : j + 1].T @ w)
                    beta = float(np.linalg.norm(w))
                    if beta > 1e-12:
                        break
                else:
                    break
            betas[j] = 0.0
            V[:, j + 1] = w / beta
        else:
            betas[j] = beta
            V[:, j + 1] = w / beta
        j += 1

    raise NumericFailure(
        "Lanczos subproblem did not reach the KKT tolerance",
        detail={
            "krylov_dim": krylov_dim,
            "residual": best.stationarity_residual if best is not None else np.inf,
        },
        partial=best,
    )


def solve(
    model: CubicModel,
    kkt_tol: float = 1e-9,
    dense_cutoff: int = linalg.DENSE_EIG_CUTOFF,
    krylov_dim: int = 64,
    lanczos_kkt_tol: float = 1e-6,
) -> CubicSolution:
    """Dispatch to the exact solver below ``dense_cutoff``, Lanczos above.

    A Lanczos failure falls back to the exact solver so callers always get a
    certified step or a hard error from the exact path.
    """
    if model.dim <= dense_cutoff:
        return solve_exact(model, kkt_tol=kkt_tol)
    try:
        return solve_lanczos(model, krylov_dim=krylov_dim, kkt_tol=lanczos_kkt_tol)
    except NumericFailure:
        return solve_exact(model, kkt_tol=kkt_tol)
