"""Horizon-indexed parameter schedules and complexity constants.

The two momentum methods run with constant-in-k parameter triples
(eta, theta, delta) whose values depend on the horizon K and on Hessian
Lipschitz constants.  Closed-form identities tie the sequences together
(delta = 9 eta^2 for the Polyak variant, delta = 289 eta^3 for the recursive
variant); the test suite asserts them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exceptions import InvalidInputError
from .problems import LipschitzHints, ProblemInstance


@dataclass(frozen=True)
class ScheduleParams:
    """Resolved parameter sequences for one run.

    All three sequences are constant in k; ``eta_k``/``theta_k``/``delta_k``
    exist so drivers are written against the general indexed form.  ``valid``
    records whether K clears the method's validity threshold (theta in (0,1)
    and eta < 1/(2L)); runs proceed either way but are stamped.
    """

    method: str  # pm | rm | fixed
    horizon: int
    eta: float
    theta: float
    delta: float
    L: float = 0.0
    L_F: float = 0.0
    L_H: float = 0.0
    valid: bool = True
    validity_threshold: float = 1.0

    def eta_k(self, k: int) -> float:
        return self.eta

    def theta_k(self, k: int) -> float:
        return self.theta

    def delta_k(self, k: int) -> float:
        return self.delta

    def potential_weight(self) -> float:
        """Preset weight p_k multiplying the cubed Hessian error in the
        potential: 7 eta / (6 L_F) for pm, 25 / (648 (L_F^3+L_H^3)^{2/3})
        for rm, 0 otherwise (potential reduces to f)."""
        if self.method == "pm" and self.L_F > 0:
            return 7.0 * self.eta / (6.0 * self.L_F)
        if self.method == "rm" and (self.L_F > 0 or self.L_H > 0):
            return 25.0 / (648.0 * (self.L_F**3 + self.L_H**3) ** (2.0 / 3.0))
        return 0.0


def _check_horizon(K: int):
    if not (isinstance(K, (int, np.integer)) and K >= 1):
        raise InvalidInputError(f"horizon K must be a positive integer, got {K}")


def pm_schedule(K: int, L: float, L_F: float) -> ScheduleParams:
    """Polyak-momentum schedule: eta = 1/(9 K^{2/7}), theta = 7 L_F/(3 K^{2/7}),
    delta = 1/(9 K^{4/7}); valid for K >= max{(2L/9)^{7/2}, (7L_F/3)^{7/2}, 1}.
    """
    _check_horizon(K)
    if not (L > 0 and L_F > 0):
        raise InvalidInputError("pm schedule needs positive L and L_F")
    eta = 1.0 / (9.0 * K ** (2.0 / 7.0))
    theta = 7.0 * L_F / (3.0 * K ** (2.0 / 7.0))
    delta = 1.0 / (9.0 * K ** (4.0 / 7.0))
    threshold = max((2.0 * L / 9.0) ** 3.5, (7.0 * L_F / 3.0) ** 3.5, 1.0)
    return ScheduleParams(
        method="pm",
        horizon=K,
        eta=eta,
        theta=theta,
        delta=delta,
        L=L,
        L_F=L_F,
        valid=K >= threshold,
        validity_threshold=threshold,
    )


def rm_schedule(K: int, L: float, L_F: float, L_H: float) -> ScheduleParams:
    """Recursive-momentum schedule: eta = 1/(17 K^{1/5}),
    theta = 625 (L_F^3+L_H^3)^{2/3} / (289 K^{2/5}), delta = 1/(17 K^{3/5});
    valid for K >= max{(2L/17)^5, 7 (L_F^3+L_H^3)^{5/3}, 1}.
    """
    _check_horizon(K)
    if not (L > 0 and L_F > 0 and L_H >= 0):
        raise InvalidInputError("rm schedule needs positive L, L_F and L_H >= 0")
    cube_sum = L_F**3 + L_H**3
    eta = 1.0 / (17.0 * K ** 0.2)
    theta = 625.0 * cube_sum ** (2.0 / 3.0) / (289.0 * K ** 0.4)
    delta = 1.0 / (17.0 * K ** 0.6)
    threshold = max((2.0 * L / 17.0) ** 5, 7.0 * cube_sum ** (5.0 / 3.0), 1.0)
    return ScheduleParams(
        method="rm",
        horizon=K,
        eta=eta,
        theta=theta,
        delta=delta,
        L=L,
        L_F=L_F,
        L_H=L_H,
        valid=K >= threshold,
        validity_threshold=threshold,
    )


def fixed_schedule(
    K: int, eta: float, theta: float = 1.0, delta: float = 0.0,
    L: float = 0.0, L_F: float = 0.0, L_H: float = 0.0,
) -> ScheduleParams:
    """User-chosen constant parameters, outside the theorem regime."""
    _check_horizon(K)
    if eta <= 0:
        raise InvalidInputError("eta must be positive")
    if not (0 < theta <= 1):
        raise InvalidInputError("theta must lie in (0, 1]")
    if delta < 0:
        raise InvalidInputError("delta must be nonnegative")
    return ScheduleParams(
        method="fixed", horizon=K, eta=eta, theta=theta, delta=delta,
        L=L, L_F=L_F, L_H=L_H, valid=True, validity_threshold=1.0,
    )


def complexity_constants(
    method: str,
    f0: float,
    f_low: float,
    sigma: float,
    L: float,
    L_F: float,
    L_H: Optional[float] = None,
    eps_g: Optional[float] = None,
    eps_H: Optional[float] = None,
) -> tuple[float, Optional[int]]:
    """Complexity constant of the chosen method and, given a target
    (eps_g, eps_H), the minimal horizon K guaranteeing the reported iterate
    is an (eps_g, eps_H)-SSOSP.
    """
    for name, val in (("f0", f0), ("f_low", f_low), ("sigma", sigma), ("L", L),
                      ("L_F", L_F)):
        if val is None or not np.isfinite(val):
            raise InvalidInputError(f"constant {name} must be finite, got {val}")
    if sigma < 0 or L <= 0 or L_F <= 0:
        raise InvalidInputError("need sigma >= 0, L > 0, L_F > 0")
    gap = f0 - f_low
    if gap < 0:
        raise InvalidInputError("f0 must be >= f_low")
    if method == "pm":
        M = 54.0 * (gap + sigma**3 * L_F**-2 + L_F**1.5 * sigma**3 + 1.0)
        terms = [(2.0 * L / 9.0) ** 3.5, (7.0 * L_F / 3.0) ** 3.5, 1.0]
        if eps_g is not None and eps_H is not None:
            terms.append(((3.0 * M) ** (2.0 / 3.0) / eps_g) ** 1.75)
            terms.append(((108.0 * M) ** (1.0 / 3.0) / eps_H) ** 7)
    elif method == "rm":
        if L_H is None or L_H < 0:
            raise InvalidInputError("rm constants need L_H >= 0")
        cs = L_F**3 + L_H**3
        M = 75.0 * (gap + sigma**3 * cs ** (-2.0 / 3.0) + cs * sigma**3 + 1.0)
        terms = [(2.0 * L / 17.0) ** 5, 7.0 * cs ** (5.0 / 3.0), 1.0]
        if eps_g is not None and eps_H is not None:
            terms.append(((3.0 * M) ** (2.0 / 3.0) / eps_g) ** (5.0 / 3.0))
            terms.append(((281.0 * M) ** (1.0 / 3.0) / eps_H) ** 5)
    else:
        raise InvalidInputError(f"unknown method {method!r}")
    k_min = None
    if eps_g is not None and eps_H is not None:
        if not (0 < eps_g < 1 and 0 < eps_H < 1):
            raise InvalidInputError("tolerances must lie in (0, 1)")
        k_min = int(math.ceil(max(terms)))
    return M, k_min


def estimate_lipschitz_hints(
    problem: ProblemInstance,
    center,
    radius: float,
    n_pairs: int = 100,
    seed: int = 0,
    safety: float = 1.5,
) -> LipschitzHints:
    """Empirical Hessian Lipschitz constants from random segment pairs.

    Samples point pairs inside the ball of given radius around ``center`` and
    takes the largest observed ratio ||H(x) - H(y)|| / ||x - y|| in spectral
    and Frobenius norms, inflated by ``safety``.
    """
    if radius <= 0 or n_pairs < 1:
        raise InvalidInputError("need radius > 0 and n_pairs >= 1")
    center = np.asarray(center, dtype=float)
    rng = np.random.default_rng(seed)
    worst_spec = worst_fro = 0.0
    for _ in range(n_pairs):
        u = rng.standard_normal(problem.dim)
        v = rng.standard_normal(problem.dim)
        x = center + radius * rng.random() * u / np.linalg.norm(u)
        y = center + radius * rng.random() * v / np.linalg.norm(v)
        dist = np.linalg.norm(x - y)
        if dist < 1e-12:
            continue
        D = problem.hessian(x) - problem.hessian(y)
        worst_spec = max(worst_spec, np.linalg.norm(D, 2) / dist)
        worst_fro = max(worst_fro, np.linalg.norm(D, "fro") / dist)
    return LipschitzHints(L=safety * worst_spec, L_F=safety * worst_fro)
