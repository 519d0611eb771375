"""Executable property suites behind the ``check`` CLI subcommand.

Each suite runs a fixed-seed batch of the library's mathematical invariants
and returns structured results; the CLI renders them and exits nonzero on
any failure.  The pytest acceptance module runs the same checks at their full
advertised sizes.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import minimize

from . import linalg, oracles, schedules, subproblem
from .algorithms import OracleSet, scrn_pm_run, scrn_rm_run
from .exceptions import InvalidInputError
from .oracles import GradientOracleSpec, HessianOracleSpec
from .problems import synthetic_quartic

SUITES = ("lemmas", "oracles", "subproblem", "schedules", "all")


@dataclass
class CheckResult:
    suite: str
    check: str
    passed: bool
    detail: str
    seconds: float


def _result(suite, check, passed, detail, t0) -> CheckResult:
    return CheckResult(suite, check, bool(passed), detail, time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# lemmas suite
# ---------------------------------------------------------------------------

def check_cubed_norm_bounds(n_triples: int = 1000, seed: int = 0,
                            slack: float = -1e-12) -> CheckResult:
    """Both cubed-norm expansion inequalities over random (U, V, c)."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst = np.inf
    violations = 0
    for _ in range(n_triples):
        n = int(rng.integers(1, 9))
        U = rng.uniform(-1.0, 1.0, (n, n))
        V = rng.uniform(-1.0, 1.0, (n, n))
        c = 10.0 ** rng.uniform(-3.0, 3.0)
        lhs, rhs1, rhs2 = linalg.cubed_norm_expansion_bounds(U, V, c)
        worst = min(worst, rhs1 - lhs, rhs2 - lhs)
        if rhs1 - lhs < slack or rhs2 - lhs < slack:
            violations += 1
    return _result(
        "lemmas", "cubed_norm_expansion_bounds", violations == 0,
        f"{n_triples} triples, {violations} violations, worst slack {worst:.3e}",
        t0,
    )


def check_spectral_vs_frobenius(n_matrices: int = 300, seed: int = 1) -> CheckResult:
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    bad = 0
    for _ in range(n_matrices):
        n = int(rng.integers(1, 12))
        A = rng.standard_normal((n, n))
        if linalg.spectral_norm(A) > linalg.frobenius_norm(A) * (1 + 1e-12):
            bad += 1
    return _result(
        "lemmas", "spectral_le_frobenius", bad == 0,
        f"{n_matrices} matrices, {bad} violations", t0,
    )


# ---------------------------------------------------------------------------
# subproblem suite
# ---------------------------------------------------------------------------

def random_cubic_model(rng, max_dim: int = 20) -> subproblem.CubicModel:
    n = int(rng.integers(2, max_dim + 1))
    A = rng.standard_normal((n, n))
    M = (A + A.T) / 2.0
    g = rng.standard_normal(n) * 10.0 ** rng.uniform(-2, 2)
    eta = 10.0 ** rng.uniform(-2, 1)
    return subproblem.CubicModel(g=g, M=M, eta=eta)


def hard_case_model(rng, n: int = 6) -> subproblem.CubicModel:
    """Indefinite model whose gradient is orthogonal to the bottom eigenspace."""
    evals = np.sort(rng.uniform(-2.0, 2.0, n))
    evals[0] = -abs(evals[0]) - 0.5
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    M = (Q * evals) @ Q.T
    M = (M + M.T) / 2.0
    ghat = rng.standard_normal(n)
    ghat[0] = 0.0  # no component on the minimum eigenspace
    # Small eta keeps ||pinv solution|| below r_min so the boundary case bites.
    eta = 2.0
    return subproblem.CubicModel(g=Q @ ghat, M=M, eta=eta)


def brute_force_model_minimum(model: subproblem.CubicModel, n_starts: int = 8,
                              seed: int = 0) -> float:
    """Independent multistart quasi-Newton minimization of the model."""
    rng = np.random.default_rng(seed)
    g, M, eta = model.g, model.M, model.eta
    evals, vecs = np.linalg.eigh(M)
    lam_min = evals[0]
    gnorm = np.linalg.norm(g)
    r_max = eta * (-lam_min + np.sqrt(lam_min**2 + 2.0 * gnorm / eta)) + 1e-3

    def fun(s):
        return subproblem.model_value(model, s)

    def jac(s):
        return g + M @ s + (np.linalg.norm(s) / (2.0 * eta)) * s

    starts = [
        np.zeros(model.dim),
        -eta * g / (1.0 + gnorm),
        vecs[:, 0] * r_max,
        -vecs[:, 0] * r_max,
    ]
    for _ in range(n_starts - len(starts)):
        u = rng.standard_normal(model.dim)
        starts.append(u / np.linalg.norm(u) * rng.uniform(0.0, 1.5 * r_max))
    best = np.inf
    for s0 in starts:
        res = minimize(fun, s0, jac=jac, method="BFGS",
                       options={"gtol": 1e-12, "maxiter": 500})
        best = min(best, float(res.fun))
    return best


def check_subproblem_kkt(n_models: int = 150, seed: int = 2,
                         kkt_tol: float = 1e-9) -> CheckResult:
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst_res = worst_margin = 0.0
    bad = 0
    for _ in range(n_models):
        model = random_cubic_model(rng)
        sol = subproblem.solve_exact(model, kkt_tol=kkt_tol)
        gn = np.linalg.norm(model.g)
        mn = linalg.spectral_norm(model.M)
        rel_res = sol.stationarity_residual / (1.0 + gn)
        rel_margin = sol.curvature_margin / (1.0 + mn)
        worst_res = max(worst_res, rel_res)
        worst_margin = min(worst_margin, rel_margin)
        value_ok = subproblem.model_value(model, sol.step) <= 1e-12
        if rel_res > kkt_tol or rel_margin < -kkt_tol or not value_ok:
            bad += 1
    return _result(
        "subproblem", "kkt_certificates", bad == 0,
        f"{n_models} models, {bad} failures, worst residual {worst_res:.2e}, "
        f"worst margin {worst_margin:.2e}", t0,
    )


def check_subproblem_brute_force(n_models: int = 60, seed: int = 3,
                                 value_tol: float = 1e-6) -> CheckResult:
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst = 0.0
    bad = 0
    for i in range(n_models):
        model = random_cubic_model(rng, max_dim=12)
        sol = subproblem.solve_exact(model)
        ours = subproblem.model_value(model, sol.step)
        oracle = brute_force_model_minimum(model, seed=seed + i)
        gap = abs(ours - oracle)
        worst = max(worst, gap)
        if gap > value_tol:
            bad += 1
    return _result(
        "subproblem", "brute_force_value_agreement", bad == 0,
        f"{n_models} models, {bad} failures, worst value gap {worst:.2e}", t0,
    )


def check_subproblem_hard_cases(n_models: int = 15, seed: int = 4) -> CheckResult:
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    bad = 0
    kinds = []
    for _ in range(n_models):
        model = hard_case_model(rng)
        sol = subproblem.solve_exact(model)
        kinds.append(sol.solver_kind)
        gn = np.linalg.norm(model.g)
        mn = linalg.spectral_norm(model.M)
        if (
            sol.stationarity_residual > 1e-9 * (1.0 + gn)
            or sol.curvature_margin < -1e-9 * (1.0 + mn)
            or subproblem.model_value(model, sol.step) > 0.0
        ):
            bad += 1
    n_hard = sum(k == "exact_hard_case" for k in kinds)
    return _result(
        "subproblem", "hard_case_instances", bad == 0 and n_hard > 0,
        f"{n_models} instances, {bad} failures, {n_hard} took the hard-case path",
        t0,
    )


def check_lanczos_equivalence(n_models: int = 15, n: int = 60,
                              seed: int = 5) -> CheckResult:
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst = 0.0
    bad = 0
    for _ in range(n_models):
        A = rng.standard_normal((n, n))
        M = (A + A.T) / 2.0
        g = rng.standard_normal(n)
        model = subproblem.CubicModel(g=g, M=M, eta=0.5)
        exact = subproblem.solve_exact(model)
        lcz = subproblem.solve_lanczos(model, krylov_dim=n, kkt_tol=1e-9)
        rel = np.linalg.norm(exact.step - lcz.step) / (1.0 + np.linalg.norm(exact.step))
        worst = max(worst, rel)
        if rel > 1e-6:
            bad += 1
    return _result(
        "subproblem", "lanczos_matches_exact", bad == 0,
        f"{n_models} models at n={n}, {bad} failures, worst step diff {worst:.2e}",
        t0,
    )


# ---------------------------------------------------------------------------
# oracles suite
# ---------------------------------------------------------------------------

def _moment_problem(n: int = 10, seed: int = 11):
    return synthetic_quartic(n=n, seed=seed)


def check_gradient_moment(n_samples: int = 100_000, delta: float = 0.1,
                          seed: int = 6) -> CheckResult:
    t0 = time.perf_counter()
    problem = _moment_problem()
    x = np.random.default_rng(seed).standard_normal(problem.dim)
    spec = GradientOracleSpec("gaussian_noise", delta=delta)
    mean, se = oracles.gradient_error_moment(problem, x, spec, delta, n_samples, seed)
    bound = delta**1.5 + 3.0 * se
    return _result(
        "oracles", "gaussian_gradient_moment", mean <= bound,
        f"E||err||^1.5 = {mean:.5f} (se {se:.2e}) vs delta^1.5 = {delta**1.5:.5f}",
        t0,
    )


def check_subsample_unbiased(n_samples: int = 100_000, seed: int = 7,
                             n: int = 5) -> CheckResult:
    t0 = time.perf_counter()
    problem = _moment_problem(n=n, seed=seed)
    x = np.random.default_rng(seed).standard_normal(n)
    H_true = problem.hessian(x)
    spec = HessianOracleSpec("element_subsample", keep_probability=0.5)
    total = np.zeros_like(H_true)
    total_sq = np.zeros_like(H_true)
    asym = 0
    for i in range(n_samples):
        H = oracles.sample_hessian(
            problem, x, spec, oracles.oracle_stream(seed, oracles.HESSIAN_STREAM, i)
        )
        if not np.array_equal(H, H.T):
            asym += 1
        total += H
        total_sq += H * H
    mean = total / n_samples
    var = total_sq / n_samples - mean**2
    se = np.sqrt(np.maximum(var, 0.0) / n_samples)
    off = np.abs(mean - H_true) > 3.0 * se + 1e-12
    return _result(
        "oracles", "element_subsample_unbiased",
        not off.any() and asym == 0,
        f"{n_samples} samples: {int(off.sum())} entries off by >3 s.e., "
        f"{asym} asymmetric samples", t0,
    )


def check_paired_coupling(seed: int = 8) -> CheckResult:
    t0 = time.perf_counter()
    problem = _moment_problem()
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(problem.dim)
    ok = True
    for kind in ("element_subsample", "gaussian_noise", "exact"):
        spec = HessianOracleSpec(kind, keep_probability=0.5, sigma=0.3)
        h1, h2 = oracles.paired_hessian_samples(
            problem, x, x, spec, oracles.oracle_stream(seed, 1, 0)
        )
        ok = ok and np.array_equal(h1, h2)
    return _result(
        "oracles", "paired_samples_identical_at_same_point", ok,
        "bitwise equality at coupled evaluation points", t0,
    )


def check_determinism(seed: int = 9) -> CheckResult:
    t0 = time.perf_counter()
    problem = _moment_problem()
    x0 = problem.meta["x_star"] + 0.1
    sched = schedules.fixed_schedule(20, eta=0.05, theta=0.4, delta=0.01)
    oset = OracleSet(
        GradientOracleSpec("gaussian_noise", delta=0.01),
        HessianOracleSpec("gaussian_noise", sigma=0.3),
    )
    a = scrn_pm_run(problem, x0, sched, oset, master_seed=seed)
    b = scrn_pm_run(problem, x0, sched, oset, master_seed=seed)
    c = scrn_rm_run(problem, x0, sched, oset, master_seed=seed)
    d = scrn_rm_run(problem, x0, sched, oset, master_seed=seed)
    same = np.array_equal(a.column("f"), b.column("f")) and np.array_equal(
        c.column("f"), d.column("f")
    )
    return _result(
        "oracles", "seeded_runs_bitwise_identical", same,
        "objective columns of repeated runs compared bitwise", t0,
    )


# ---------------------------------------------------------------------------
# schedules suite
# ---------------------------------------------------------------------------

def check_schedule_identities(rtol: float = 1e-15) -> CheckResult:
    t0 = time.perf_counter()
    worst = 0.0
    for K in (1, 10, 1000, 1_000_000):
        pm = schedules.pm_schedule(K, L=1.0, L_F=1.0)
        rm = schedules.rm_schedule(K, L=1.0, L_F=1.0, L_H=1.0)
        worst = max(worst, abs(9.0 * pm.eta**2 - pm.delta) / pm.delta)
        worst = max(worst, abs(289.0 * rm.eta**3 - rm.delta) / rm.delta)
    return _result(
        "schedules", "delta_eta_identities", worst <= rtol,
        f"worst relative deviation {worst:.2e} (tolerance {rtol:g})", t0,
    )


def check_schedule_validity() -> CheckResult:
    t0 = time.perf_counter()
    ok = True
    for K, L, L_F, L_H in ((128, 1.0, 1.0, 0.5), (4, 9.0, 3.0, 1.0)):
        pm = schedules.pm_schedule(K, L, L_F)
        expected_pm = K >= max((2 * L / 9) ** 3.5, (7 * L_F / 3) ** 3.5, 1.0)
        rm = schedules.rm_schedule(K, L, L_F, L_H)
        cs = L_F**3 + L_H**3
        expected_rm = K >= max((2 * L / 17) ** 5, 7 * cs ** (5 / 3), 1.0)
        ok = ok and pm.valid == expected_pm and rm.valid == expected_rm
        ok = ok and (not pm.valid or (0 < pm.theta < 1 and pm.eta < 1 / (2 * L)))
        ok = ok and (not rm.valid or (0 < rm.theta < 1 and rm.eta < 1 / (2 * L)))
    return _result(
        "schedules", "validity_thresholds", ok,
        "thresholds match independent recomputation", t0,
    )


def check_complexity_constants() -> CheckResult:
    t0 = time.perf_counter()
    M_pm, _ = schedules.complexity_constants("pm", f0=0.0, f_low=0.0, sigma=0.0,
                                             L=1.0, L_F=1.0)
    M_rm, _ = schedules.complexity_constants("rm", f0=0.0, f_low=0.0, sigma=0.0,
                                             L=1.0, L_F=1.0, L_H=0.0)
    ok = abs(M_pm - 54.0) < 1e-12 and abs(M_rm - 75.0) < 1e-12
    return _result(
        "schedules", "constant_collapse_values", ok,
        f"M_pm={M_pm}, M_rm={M_rm} (expected 54, 75)", t0,
    )


SUITE_CHECKS = {
    "lemmas": (check_cubed_norm_bounds, check_spectral_vs_frobenius),
    "subproblem": (
        check_subproblem_kkt,
        check_subproblem_brute_force,
        check_subproblem_hard_cases,
        check_lanczos_equivalence,
    ),
    "oracles": (
        check_gradient_moment,
        check_subsample_unbiased,
        check_paired_coupling,
        check_determinism,
    ),
    "schedules": (
        check_schedule_identities,
        check_schedule_validity,
        check_complexity_constants,
    ),
}


def run_suite(suite: str) -> list[CheckResult]:
    if suite not in SUITES:
        raise InvalidInputError(f"unknown suite {suite!r}; expected one of {SUITES}")
    names = SUITE_CHECKS.keys() if suite == "all" else [suite]
    results = []
    for name in names:
        for fn in SUITE_CHECKS[name]:
            results.append(fn())
    return results


def report_dict(results: list[CheckResult]) -> dict:
    return {
        "passed": all(r.passed for r in results),
        "checks": [asdict(r) for r in results],
    }
