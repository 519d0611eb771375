"""Outer-loop optimization drivers and run diagnostics.

Five methods share one trace format: the two momentum-based stochastic
cubic-Newton methods (``scrn_pm``, ``scrn_rm``), deterministic fixed-weight
cubic Newton (``crn``), its adaptive-weight variant (``acrn``), and a
heavy-ball stochastic-gradient baseline (``sgd_momentum``).

Every run is deterministic given (configuration, master seed): all sampling
goes through per-iteration oracle streams.  Debug mode re-derives descent and
stationarity certificates from exact derivatives at every accepted step and
counts violations.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import linalg, oracles, subproblem
from .exceptions import InvalidInputError, NumericFailure
from .oracles import GradientOracleSpec, HessianOracleSpec, oracle_stream
from .problems import ProblemInstance
from .schedules import ScheduleParams, fixed_schedule

DIVERGENCE_LIMIT = 1e12


@dataclass(frozen=True)
class SolverOptions:
    """Subproblem solver selection shared by all cubic methods."""

    mode: str = "auto"  # auto | exact | lanczos
    kkt_tol: float = 1e-9
    lanczos_kkt_tol: float = 1e-6
    krylov_dim: int = 64
    dense_cutoff: int = linalg.DENSE_EIG_CUTOFF


@dataclass(frozen=True)
class OracleSet:
    gradient: GradientOracleSpec = field(default_factory=GradientOracleSpec)
    hessian: HessianOracleSpec = field(default_factory=HessianOracleSpec)


EXACT_ORACLES = OracleSet(GradientOracleSpec("exact"), HessianOracleSpec("exact"))


@dataclass
class RunRecord:
    k: int
    f: float
    grad_norm: float = np.nan
    min_eig: float = np.nan
    mu_eta: float = np.nan
    step_norm: float = np.nan
    hessian_err_frob: float = np.nan
    grad_err: float = np.nan
    potential: float = np.nan
    kkt_residual: float = np.nan
    wallclock_s: float = 0.0


@dataclass
class CertificateReport:
    """Counts of per-iteration inequality checks done in debug mode.

    ``worst_*`` is the largest observed lhs - rhs (negative means the
    inequality held with margin everywhere).
    """

    checked: int = 0
    descent_violations: int = 0
    mu_violations: int = 0
    grad_violations: int = 0
    worst_descent: float = -np.inf
    worst_mu: float = -np.inf
    worst_grad: float = -np.inf

    @property
    def clean(self) -> bool:
        return (
            self.descent_violations == 0
            and self.mu_violations == 0
            and self.grad_violations == 0
        )


@dataclass
class RunTrace:
    algorithm: str
    seed: int
    horizon: int
    eta: float
    records: list
    sampled_index: int = 0
    sampled_x: Optional[np.ndarray] = None
    sampled_mu: float = np.nan
    schedule_invalid: bool = False
    converged: bool = False
    aborted: bool = False
    abort_reason: str = ""
    certificates: Optional[CertificateReport] = None
    meta: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])

    @property
    def final_f(self) -> float:
        return self.records[-1].f


@dataclass
class SolverState:
    """Mutable iteration state of the two momentum methods.

    ``M`` is the momentum Hessian estimate entering iteration ``k`` (that is,
    M_{k-1}); ``None`` encodes the initialization M_{-1} = 0 with
    theta_{-1} = 1, under which the first update reduces to the raw sample.
    """

    x: np.ndarray
    schedule: ScheduleParams
    oracles: OracleSet = field(default_factory=lambda: EXACT_ORACLES)
    master_seed: int = 0
    solver: SolverOptions = field(default_factory=SolverOptions)
    k: int = 0
    M: Optional[np.ndarray] = None
    g: Optional[np.ndarray] = None
    prev_x: Optional[np.ndarray] = None
    last_solution: Optional[subproblem.CubicSolution] = None

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        if not np.all(np.isfinite(self.x)):
            raise InvalidInputError("starting point has non-finite entries")


def _solve_model(model: subproblem.CubicModel, opts: SolverOptions):
    """Solve one subproblem under the retry policy: a Lanczos failure falls
    back to the exact solver; an exact failure propagates to the driver."""
    if opts.mode == "exact":
        return subproblem.solve_exact(model, kkt_tol=opts.kkt_tol)
    if opts.mode == "lanczos":
        try:
            return subproblem.solve_lanczos(
                model, krylov_dim=opts.krylov_dim, kkt_tol=opts.lanczos_kkt_tol
            )
        except NumericFailure:
            return subproblem.solve_exact(model, kkt_tol=opts.kkt_tol)
    return subproblem.solve(
        model,
        kkt_tol=opts.kkt_tol,
        dense_cutoff=opts.dense_cutoff,
        krylov_dim=opts.krylov_dim,
        lanczos_kkt_tol=opts.lanczos_kkt_tol,
    )


def _momentum_update(variant, state: SolverState, problem) -> np.ndarray:
    """Build M_k for the current iteration of the given variant."""
    k = state.k
    spec = state.oracles.hessian
    rng = oracle_stream(state.master_seed, oracles.HESSIAN_STREAM, k)
    theta_prev = 1.0 if k == 0 else state.schedule.theta_k(k - 1)
    if variant == "pm":
        H = oracles.sample_hessian(problem, state.x, spec, rng)
        if k == 0 or theta_prev == 1.0 or state.M is None:
            return H
        return (1.0 - theta_prev) * state.M + theta_prev * H
    if variant == "rm":
        x_prev = state.x if state.prev_x is None else state.prev_x
        H_prev, H_curr = oracles.paired_hessian_samples(
            problem, x_prev, state.x, spec, rng
        )
        if k == 0 or state.M is None:
            return H_curr
        # Grouped so that with exact oracles (M_{k-1} == H(x^{k-1}) bitwise)
        # the correction cancels exactly and M_k == H(x^k).
        return (1.0 - theta_prev) * (state.M - H_prev) + H_curr
    # crn: exact Hessian regardless of the oracle set
    return problem.hessian(state.x)


def _advance(variant: str, state: SolverState, problem: ProblemInstance) -> SolverState:
    k = state.k
    eta = state.schedule.eta_k(k)
    delta = state.schedule.delta_k(k)
    if variant == "crn":
        g = problem.gradient(state.x)
    else:
        g = oracles.sample_gradient(
            problem,
            state.x,
            state.oracles.gradient,
            delta,
            oracle_stream(state.master_seed, oracles.GRADIENT_STREAM, k),
        )
    M = _momentum_update(variant, state, problem)
    model = subproblem.CubicModel(g=g, M=M, eta=eta)
    solution = _solve_model(model, state.solver)
    state.prev_x = state.x
    state.x = state.x + solution.step
    state.M = M
    state.g = g
    state.k = k + 1
    state.last_solution = solution
    return state


def scrn_pm_step(
    state: SolverState, problem: ProblemInstance, oracle_set: Optional[OracleSet] = None
) -> SolverState:
    """One iteration of the Polyak-momentum method: fresh gradient sample,
    exponential-moving-average Hessian estimate, cubic-model step.  The state
    is advanced in place and returned; ``oracle_set`` overrides the one the
    state was built with."""
    if oracle_set is not None:
        state.oracles = oracle_set
    return _advance("pm", state, problem)


def scrn_rm_step(
    state: SolverState, problem: ProblemInstance, oracle_set: Optional[OracleSet] = None
) -> SolverState:
    """One iteration of the recursive-momentum method: the Hessian estimate
    is corrected with a coupled pair of samples at the last two iterates."""
    if oracle_set is not None:
        state.oracles = oracle_set
    return _advance("rm", state, problem)


def stationarity_measure(
    problem: ProblemInstance, x, eta: float
) -> tuple[float, float, float]:
    """Scalar stationarity measure from exact derivatives.

    Returns (mu, ||gradient||, smallest Hessian eigenvalue) where
    mu = max{ ||grad||^{3/2} / 3, -(eta^{3/2}/4) lambda_min^3 }.
    """
    if eta <= 0:
        raise InvalidInputError("eta must be positive")
    x = np.asarray(x, dtype=float)
    grad_norm = float(np.linalg.norm(problem.gradient(x)))
    min_eig = linalg.min_eigenvalue(problem.hessian(x))
    mu = max(grad_norm**1.5 / 3.0, -(eta**1.5) / 4.0 * min_eig**3)
    return mu, grad_norm, min_eig


def potential_value(f_val: float, M, true_hessian, p_k: float) -> float:
    """Potential f + p_k ||M - true_hessian||_F^3 driving the analysis."""
    if p_k < 0:
        raise InvalidInputError("p_k must be nonnegative")
    err = linalg.frobenius_norm(np.asarray(M) - np.asarray(true_hessian))
    return float(f_val + p_k * err**3)


@dataclass(frozen=True)
class SsospReport:
    n_runs: int
    grad_moment: float  # mean ||grad f||^{3/2} over runs
    grad_moment_se: float
    eig_moment: float  # mean lambda_min^3 over runs
    eig_moment_se: float
    eps_g: float
    eps_H: float
    grad_ok: bool
    eig_ok: bool

    @property
    def passed(self) -> bool:
        return self.grad_ok and self.eig_ok


def ssosp_check(
    problem: ProblemInstance, sampled_iterates, eps_g: float, eps_H: float
) -> SsospReport:
    """Empirical second-order stationarity test over independently sampled
    reported iterates: passes when the gradient moment is below eps_g^{3/2}
    and the eigenvalue moment above -eps_H^3, each within 2 standard errors.
    """
    iterates = [np.asarray(x, dtype=float) for x in sampled_iterates]
    if len(iterates) < 2:
        raise InvalidInputError("ssosp_check needs at least 2 sampled iterates")
    gvals = np.array(
        [np.linalg.norm(problem.gradient(x)) ** 1.5 for x in iterates]
    )
    evals = np.array(
        [linalg.min_eigenvalue(problem.hessian(x)) ** 3 for x in iterates]
    )
    n = len(iterates)
    g_mean, g_se = gvals.mean(), gvals.std(ddof=1) / np.sqrt(n)
    e_mean, e_se = evals.mean(), evals.std(ddof=1) / np.sqrt(n)
    return SsospReport(
        n_runs=n,
        grad_moment=float(g_mean),
        grad_moment_se=float(g_se),
        eig_moment=float(e_mean),
        eig_moment_se=float(e_se),
        eps_g=eps_g,
        eps_H=eps_H,
        grad_ok=bool(g_mean <= eps_g**1.5 + 2.0 * g_se),
        eig_ok=bool(e_mean >= -(eps_H**3) - 2.0 * e_se),
    )


def _auto_stride(n: int) -> int:
    # lambda_min / Hessian-error diagnostics cost a dense eigendecomposition;
    # thin them out for larger problems.
    return 1 if n <= 100 else 10


def _check_certificates(
    report: CertificateReport,
    eta: float,
    f_k: float,
    f_next: float,
    mu_next: float,
    grad_next_norm: float,
    step_norm: float,
    hess_err: float,
    grad_err: float,
):
    cube = step_norm**3
    slack = 1e-12 * (1.0 + abs(f_k))
    descent_rhs = (
        f_k - cube / (9.0 * eta) + 24.0 * eta**2 * hess_err**3
        + 3.0 * np.sqrt(eta) * grad_err**1.5
    )
    mu_rhs = eta**-1.5 * cube + eta**1.5 * hess_err**3 + grad_err**1.5
    grad_rhs = (
        3.0 * eta**-1.5 * cube + 0.75 * eta**1.5 * hess_err**3
        + 3.0 * grad_err**1.5
    )
    report.checked += 1
    report.worst_descent = max(report.worst_descent, f_next - descent_rhs)
    report.worst_mu = max(report.worst_mu, mu_next - mu_rhs)
    report.worst_grad = max(report.worst_grad, grad_next_norm**1.5 - grad_rhs)
    if f_next > descent_rhs + slack:
        report.descent_violations += 1
    if mu_next > mu_rhs + 1e-12 * (1.0 + mu_next):
        report.mu_violations += 1
    if grad_next_norm**1.5 > grad_rhs + 1e-12 * (1.0 + grad_rhs):
        report.grad_violations += 1


def _run_cubic(
    variant: str,
    problem: ProblemInstance,
    x0,
    schedule: ScheduleParams,
    oracle_set: OracleSet,
    master_seed: int = 0,
    K: Optional[int] = None,
    solver: Optional[SolverOptions] = None,
    debug_certificates: bool = False,
    diag_stride: Optional[int] = None,
    early_stop_grad_tol: Optional[float] = None,
    potential_weight: Optional[float] = None,
) -> RunTrace:
    K = schedule.horizon if K is None else K
    solver = solver or SolverOptions()
    stride = _auto_stride(problem.dim) if diag_stride is None else diag_stride
    p_weight = (
        schedule.potential_weight() if potential_weight is None else potential_weight
    )
    state = SolverState(
        x=np.asarray(x0, dtype=float),
        schedule=schedule,
        oracles=oracle_set if variant != "crn" else EXACT_ORACLES,
        master_seed=master_seed,
        solver=solver,
    )
    iota = int(oracle_stream(master_seed, oracles.ITERATE_STREAM, 0).integers(1, K + 1))
    trace = RunTrace(
        algorithm={"pm": "scrn_pm", "rm": "scrn_rm", "crn": "crn"}[variant],
        seed=master_seed,
        horizon=K,
        eta=schedule.eta,
        records=[],
        sampled_index=iota,
        schedule_invalid=not schedule.valid,
        certificates=CertificateReport() if debug_certificates else None,
    )
    start = time.perf_counter()
    pending = None  # certificate inputs carried from step k to head k+1
    for k in range(K + 1):
        x = state.x
        f_k = problem.value(x)
        if f_k > DIVERGENCE_LIMIT:
            trace.records.append(RunRecord(k=k, f=f_k))
            trace.aborted = True
            trace.abort_reason = f"objective exceeded {DIVERGENCE_LIMIT:g}"
            break
        grad_exact = problem.gradient(x)
        grad_norm = float(np.linalg.norm(grad_exact))
        rec = RunRecord(k=k, f=f_k, grad_norm=grad_norm)
        heavy = stride > 0 and (k % stride == 0 or k == K)
        if heavy:
            min_eig = linalg.min_eigenvalue(problem.hessian(x))
            rec.min_eig = min_eig
            eta_here = schedule.eta_k(min(k, K - 1))
            rec.mu_eta = max(
                grad_norm**1.5 / 3.0, -(eta_here**1.5) / 4.0 * min_eig**3
            )
        if debug_certificates and pending is not None:
            mu_next = rec.mu_eta
            if not np.isfinite(mu_next):
                mu_eta_p = pending["eta"]
                me = linalg.min_eigenvalue(problem.hessian(x))
                mu_next = max(grad_norm**1.5 / 3.0, -(mu_eta_p**1.5) / 4.0 * me**3)
            _check_certificates(
                trace.certificates,
                pending["eta"],
                pending["f"],
                f_k,
                mu_next,
                grad_norm,
                pending["step_norm"],
                pending["hess_err"],
                pending["grad_err"],
            )
        if k == iota:
            trace.sampled_x = x.copy()
        if k == K:
            rec.wallclock_s = time.perf_counter() - start
            trace.records.append(rec)
            break
        if early_stop_grad_tol is not None and grad_norm <= early_stop_grad_tol:
            rec.wallclock_s = time.perf_counter() - start
            trace.records.append(rec)
            trace.converged = True
            break
        try:
            state = _advance(variant, state, problem)
        except NumericFailure as exc:
            rec.wallclock_s = time.perf_counter() - start
            trace.records.append(rec)
            trace.aborted = True
            trace.abort_reason = f"subproblem failure at k={k}: {exc}"
            break
        sol = state.last_solution
        rec.step_norm = sol.radius
        rec.kkt_residual = sol.stationarity_residual
        rec.grad_err = float(np.linalg.norm(state.g - grad_exact))
        if sol.radius == 0.0 and grad_norm == 0.0:
            # Exact stationary fixed point: the iteration cannot move again.
            rec.wallclock_s = time.perf_counter() - start
            trace.records.append(rec)
            trace.converged = True
            break
        if heavy:
            hess_err = linalg.frobenius_norm(state.M - problem.hessian(state.prev_x))
            rec.hessian_err_frob = hess_err
            rec.potential = f_k + p_weight * hess_err**3
        if debug_certificates:
            hess_err = rec.hessian_err_frob
            if not np.isfinite(hess_err):
                hess_err = linalg.frobenius_norm(
                    state.M - problem.hessian(state.prev_x)
                )
            pending = {
                "eta": schedule.eta_k(k),
                "f": f_k,
                "step_norm": sol.radius,
                "hess_err": hess_err,
                "grad_err": rec.grad_err,
            }
        rec.wallclock_s = time.perf_counter() - start
        trace.records.append(rec)
    if trace.sampled_x is None:
        # Run ended before the drawn index was reached; report the last point.
        trace.sampled_x = state.x.copy()
        trace.meta["sampled_index_truncated"] = True
    trace.sampled_mu = stationarity_measure(problem, trace.sampled_x, schedule.eta)[0]
    return trace


def scrn_pm_run(problem, x0, schedule, oracle_set, master_seed=0, **kwargs) -> RunTrace:
    """Run the Polyak-momentum method for the schedule's horizon."""
    return _run_cubic("pm", problem, x0, schedule, oracle_set, master_seed, **kwargs)


def scrn_rm_run(problem, x0, schedule, oracle_set, master_seed=0, **kwargs) -> RunTrace:
    """Run the recursive-momentum method for the schedule's horizon."""
    return _run_cubic("rm", problem, x0, schedule, oracle_set, master_seed, **kwargs)


def crn_run(
    problem: ProblemInstance,
    x0,
    eta,
    K: int,
    solver: Optional[SolverOptions] = None,
    master_seed: int = 0,
    reg_weight0: float = 1.0,
    accept_threshold: float = 0.1,
    weight_floor: float = 1e-8,
    diag_stride: Optional[int] = None,
    early_stop_grad_tol: Optional[float] = None,
    debug_certificates: bool = False,
) -> RunTrace:
    """Deterministic cubic Newton with exact derivatives.

    ``eta`` is either a fixed positive weight or the string ``"adaptive"``,
    which runs the trust-ratio variant: steps with model-agreement ratio
    rho >= ``accept_threshold`` are accepted and the regularization weight is
    halved (floored), otherwise the step is rejected and the weight doubled.
    """
    if eta == "adaptive":
        return _acrn_run(
            problem,
            x0,
            K,
            solver or SolverOptions(),
            master_seed,
            reg_weight0,
            accept_threshold,
            weight_floor,
            diag_stride,
            early_stop_grad_tol,
        )
    if not (isinstance(eta, (int, float)) and eta > 0):
        raise InvalidInputError(f"eta must be positive or 'adaptive', got {eta!r}")
    schedule = fixed_schedule(K, eta=float(eta))
    return _run_cubic(
        "crn",
        problem,
        x0,
        schedule,
        EXACT_ORACLES,
        master_seed,
        solver=solver,
        diag_stride=diag_stride,
        early_stop_grad_tol=early_stop_grad_tol,
        debug_certificates=debug_certificates,
    )


def _acrn_run(
    problem,
    x0,
    K,
    solver,
    master_seed,
    weight0,
    accept_threshold,
    weight_floor,
    diag_stride,
    early_stop_grad_tol,
) -> RunTrace:
    x = np.asarray(x0, dtype=float)
    weight = float(weight0)
    stride = _auto_stride(problem.dim) if diag_stride is None else diag_stride
    trace = RunTrace(
        algorithm="acrn", seed=master_seed, horizon=K, eta=np.nan, records=[]
    )
    iota = int(oracle_stream(master_seed, oracles.ITERATE_STREAM, 0).integers(1, K + 1))
    trace.sampled_index = iota
    start = time.perf_counter()
    for k in range(K + 1):
        f_k = problem.value(x)
        grad = problem.gradient(x)
        grad_norm = float(np.linalg.norm(grad))
        rec = RunRecord(k=k, f=f_k, grad_norm=grad_norm)
        if stride > 0 and (k % stride == 0 or k == K):
            min_eig = linalg.min_eigenvalue(problem.hessian(x))
            rec.min_eig = min_eig
            eta_here = 1.0 / weight
            rec.mu_eta = max(
                grad_norm**1.5 / 3.0, -(eta_here**1.5) / 4.0 * min_eig**3
            )
            rec.hessian_err_frob = 0.0
            rec.potential = f_k
        if k == iota:
            trace.sampled_x = x.copy()
        if k == K:
            rec.wallclock_s = time.perf_counter() - start
            trace.records.append(rec)
            break
        if early_stop_grad_tol is not None and grad_norm <= early_stop_grad_tol:
            rec.wallclock_s = time.perf_counter() - start
            trace.records.append(rec)
            trace.converged = True
            break
        H = problem.hessian(x)
        model = subproblem.CubicModel(g=grad, M=H, eta=1.0 / weight)
        try:
            sol = _solve_model(model, solver)
        except NumericFailure as exc:
            rec.wallclock_s = time.perf_counter() - start
            trace.records.append(rec)
            trace.aborted = True
            trace.abort_reason = f"subproblem failure at k={k}: {exc}"
            break
        mv = subproblem.model_value(model, sol.step)
        rec.kkt_residual = sol.stationarity_residual
        rec.grad_err = 0.0
        if mv >= 0.0:
            # Zero predicted decrease: the current point satisfies the model's
            # stationarity conditions, stop as converged.
            rec.step_norm = 0.0
            rec.wallclock_s = time.perf_counter() - start
            trace.records.append(rec)
            trace.converged = True
            break
        trial = x + sol.step
        rho = (f_k - problem.value(trial)) / (-mv)
        if rho >= accept_threshold:
            x = trial
            rec.step_norm = sol.radius
            weight = max(weight / 2.0, weight_floor)
        else:
            rec.step_norm = 0.0
            weight *= 2.0
        rec.wallclock_s = time.perf_counter() - start
        trace.records.append(rec)
    if trace.sampled_x is None:
        trace.sampled_x = x.copy()
    trace.sampled_mu = stationarity_measure(problem, trace.sampled_x, 1.0)[0]
    return trace


def sgd_momentum_run(
    problem: ProblemInstance,
    x0,
    step_size: float,
    momentum_beta: float,
    oracle_spec: GradientOracleSpec,
    K: int,
    master_seed: int = 0,
    diag_stride: Optional[int] = None,
    report_eta: float = 1.0,
) -> RunTrace:
    """Heavy-ball iteration on stochastic gradients, traced like the others.

    Aborts with a flag if the objective exceeds the divergence limit.
    """
    if step_size < 0:
        raise InvalidInputError("step_size must be nonnegative")
    if not (0 <= momentum_beta < 1):
        raise InvalidInputError("momentum_beta must lie in [0, 1)")
    x = np.asarray(x0, dtype=float)
    v = np.zeros_like(x)
    stride = _auto_stride(problem.dim) if diag_stride is None else diag_stride
    trace = RunTrace(
        algorithm="sgd_momentum", seed=master_seed, horizon=K, eta=report_eta,
        records=[],
    )
    iota = int(oracle_stream(master_seed, oracles.ITERATE_STREAM, 0).integers(1, K + 1))
    trace.sampled_index = iota
    start = time.perf_counter()
    for k in range(K + 1):
        f_k = problem.value(x)
        grad_exact = problem.gradient(x)
        grad_norm = float(np.linalg.norm(grad_exact))
        rec = RunRecord(k=k, f=f_k, grad_norm=grad_norm)
        if stride > 0 and (k % stride == 0 or k == K):
            min_eig = linalg.min_eigenvalue(problem.hessian(x))
            rec.min_eig = min_eig
            rec.mu_eta = max(
                grad_norm**1.5 / 3.0, -(report_eta**1.5) / 4.0 * min_eig**3
            )
        if k == iota:
            trace.sampled_x = x.copy()
        if k == K:
            rec.wallclock_s = time.perf_counter() - start
            trace.records.append(rec)
            break
        if f_k > DIVERGENCE_LIMIT:
            rec.wallclock_s = time.perf_counter() - start
            trace.records.append(rec)
            trace.aborted = True
            trace.abort_reason = f"objective exceeded {DIVERGENCE_LIMIT:g}"
            break
        g = oracles.sample_gradient(
            problem,
            x,
            oracle_spec,
            oracle_spec.delta,
            oracle_stream(master_seed, oracles.GRADIENT_STREAM, k),
        )
        rec.grad_err = float(np.linalg.norm(g - grad_exact))
        v = momentum_beta * v + g
        step = -step_size * v
        x = x + step
        rec.step_norm = float(np.linalg.norm(step))
        rec.wallclock_s = time.perf_counter() - start
        trace.records.append(rec)
    if trace.sampled_x is None:
        trace.sampled_x = x.copy()
    trace.sampled_mu = stationarity_measure(problem, trace.sampled_x, report_eta)[0]
    return trace
