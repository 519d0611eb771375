"""Matrix norms, extreme eigenvalues, and cubed-norm expansion bounds.

Everything here is a pure function of its arguments and safe to call
concurrently.  Matrices are plain ``numpy`` arrays; symmetric inputs are
validated (or produced) with :func:`symmetrize` / :func:`require_symmetric`
so that downstream eigensolvers never see an asymmetric matrix.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse.linalg

from .exceptions import InvalidInputError, NumericFailure

# Dimension at which min_eigenvalue switches from a dense symmetric
# eigendecomposition to a Lanczos (ARPACK) solve.
DENSE_EIG_CUTOFF = 500


def _as_matrix(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise InvalidInputError(f"expected a matrix, got ndim={a.ndim}")
    if not np.all(np.isfinite(a)):
        raise InvalidInputError("matrix has non-finite entries")
    return a


def symmetrize(a) -> np.ndarray:
    """Return the symmetric part (A + A^T)/2 as a new array."""
    a = _as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise InvalidInputError(f"cannot symmetrize non-square shape {a.shape}")
    return (a + a.T) / 2.0


def require_symmetric(a, name: str = "matrix") -> np.ndarray:
    """Validate that ``a`` is square, finite, and exactly symmetric."""
    a = _as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise InvalidInputError(f"{name} is not square: shape {a.shape}")
    if not np.array_equal(a, a.T):
        raise InvalidInputError(f"{name} is not symmetric")
    return a


def frobenius_norm(a) -> float:
    """Frobenius norm sqrt(sum_ij A_ij^2) of a vector or matrix.

    Scaled by the largest magnitude before squaring so subnormal and huge
    entries neither underflow nor overflow.
    """
    a = np.asarray(a, dtype=float)
    if not np.all(np.isfinite(a)):
        raise InvalidInputError("non-finite entries")
    if a.size == 0:
        return 0.0
    scale = float(np.max(np.abs(a)))
    if scale == 0.0:
        return 0.0
    scaled = a / scale
    return scale * float(np.sqrt(np.sum(scaled * scaled)))


def spectral_norm(a) -> float:
    """Largest singular value."""
    a = _as_matrix(a)
    return float(np.linalg.norm(a, 2))


def min_eigenvalue(a, dense_cutoff: int = DENSE_EIG_CUTOFF) -> float:
    """Smallest eigenvalue of a symmetric matrix.

    Uses a full symmetric eigendecomposition for dim <= ``dense_cutoff`` and
    a shift-free Lanczos solve (ARPACK ``eigsh`` on the negated matrix, which
    targets the algebraically smallest eigenvalue as the dominant one after
    shifting) above it.
    """
    return min_eigenpair(a, dense_cutoff=dense_cutoff)[0]


def min_eigenpair(a, dense_cutoff: int = DENSE_EIG_CUTOFF) -> tuple[float, np.ndarray]:
    """Smallest eigenvalue of a symmetric matrix and a unit eigenvector."""
    a = require_symmetric(a)
    n = a.shape[0]
    if n <= dense_cutoff or n < 3:
        evals, vecs = np.linalg.eigh(a)
        return float(evals[0]), vecs[:, 0]
    # Shift by the largest-magnitude Gershgorin bound so the target eigenvalue
    # becomes the one of largest magnitude, which Lanczos finds reliably.
    shift = float(np.max(np.sum(np.abs(a), axis=1)))
    try:
        evals, vecs = scipy.sparse.linalg.eigsh(a - shift * np.eye(n), k=1, which="LM")
    except scipy.sparse.linalg.ArpackNoConvergence as exc:
        raise NumericFailure(
            "Lanczos eigensolver did not converge",
            detail={"dim": n, "converged_eigenvalues": len(exc.eigenvalues)},
        ) from exc
    lam = float(evals[0]) + shift
    return lam, vecs[:, 0]


def cubed_norm_expansion_bounds(u, v, c: float) -> tuple[float, float, float]:
    """Cubed Frobenius norm of a sum and its two upper-bound expansions.

    For matrices U, V of equal shape and any c > 0 returns

        lhs  = ||U+V||_F^3
        rhs1 = (1+c)||U||_F^3 + 3 ||U||_F tr(U^T V) + 2 (1 + c^{-1/2}) ||V||_F^3
        rhs2 = (1+2c)||U||_F^3 + 2 (1 + c^{-1/2} + 2 c^{-2}) ||V||_F^3

    Both ``lhs <= rhs1`` and ``lhs <= rhs2`` hold for all inputs; the property
    suite asserts this over random triples.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise InvalidInputError(f"shape mismatch: {u.shape} vs {v.shape}")
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
        raise InvalidInputError("non-finite entries")
    if not (np.isfinite(c) and c > 0):
        raise InvalidInputError(f"c must be positive, got {c}")
    nu = frobenius_norm(u)
    nv = frobenius_norm(v)
    lhs = frobenius_norm(u + v) ** 3
    cross = float(np.sum(u * v))  # tr(U^T V)
    rhs1 = (1 + c) * nu**3 + 3 * nu * cross + 2 * (1 + c**-0.5) * nv**3
    rhs2 = (1 + 2 * c) * nu**3 + 2 * (1 + c**-0.5 + 2 * c**-2) * nv**3
    return lhs, rhs1, rhs2
