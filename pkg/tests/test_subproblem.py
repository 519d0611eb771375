import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from scrn import linalg, subproblem
from scrn.checks import brute_force_model_minimum, hard_case_model, random_cubic_model
from scrn.exceptions import InvalidInputError, NumericFailure
from scrn.subproblem import CubicModel, model_value, solve_exact, solve_lanczos


def kkt_residuals(model, step):
    r = np.linalg.norm(step)
    res = np.linalg.norm(model.g + model.M @ step + (r / (2 * model.eta)) * step)
    margin = np.linalg.eigvalsh(model.M)[0] + r / (2 * model.eta)
    return res, margin


class TestModelValue:
    def test_zero_step(self, rng):
        model = random_cubic_model(rng)
        assert model_value(model, np.zeros(model.dim)) == 0.0

    def test_handcrafted(self):
        model = CubicModel(g=np.array([1.0, 0.0]), M=np.zeros((2, 2)), eta=0.5)
        assert model_value(model, np.array([-1.0, 0.0])) == pytest.approx(-2.0 / 3.0)

    def test_matches_scalar_recomputation(self, rng):
        model = random_cubic_model(rng)
        s = rng.standard_normal(model.dim)
        manual = (
            float(model.g @ s)
            + 0.5 * float(s @ model.M @ s)
            + np.linalg.norm(s) ** 3 / (6 * model.eta)
        )
        assert model_value(model, s) == pytest.approx(manual, rel=1e-14)

    def test_shape_mismatch(self, rng):
        model = random_cubic_model(rng)
        with pytest.raises(InvalidInputError):
            model_value(model, np.zeros(model.dim + 1))


class TestCubicModelValidation:
    def test_rejects_asymmetric(self, rng):
        with pytest.raises(InvalidInputError):
            CubicModel(g=np.zeros(3), M=rng.standard_normal((3, 3)), eta=1.0)

    def test_rejects_bad_eta(self):
        with pytest.raises(InvalidInputError):
            CubicModel(g=np.zeros(2), M=np.eye(2), eta=0.0)

    def test_rejects_nonfinite(self):
        with pytest.raises(InvalidInputError):
            CubicModel(g=np.array([np.inf, 0.0]), M=np.eye(2), eta=1.0)


class TestSolveExact:
    def test_zero_gradient_psd(self):
        model = CubicModel(g=np.zeros(3), M=np.eye(3), eta=1.0)
        sol = solve_exact(model)
        assert sol.radius == 0.0
        assert np.all(sol.step == 0.0)

    def test_zero_hessian_closed_form(self):
        # KKT forces (r/(2 eta)) s = -g with r = ||s||, so r = sqrt(2 eta ||g||).
        model = CubicModel(g=np.array([1.0, 0.0]), M=np.zeros((2, 2)), eta=0.5)
        sol = solve_exact(model)
        assert sol.radius == pytest.approx(1.0, rel=1e-12)
        assert sol.step == pytest.approx(np.array([-1.0, 0.0]), rel=1e-10)

    def test_matches_brute_force_on_indefinite_models(self, rng):
        for trial in range(25):
            n = 5
            A = rng.standard_normal((n, n))
            M = (A + A.T) / 2.0 - 1.5 * np.eye(n)  # push lambda_min negative
            g = rng.standard_normal(n)
            model = CubicModel(g=g, M=M, eta=10.0 ** rng.uniform(-1.5, 0.5))
            assert np.linalg.eigvalsh(M)[0] < 0
            sol = solve_exact(model)
            oracle = brute_force_model_minimum(model, seed=trial)
            assert model_value(model, sol.step) == pytest.approx(oracle, abs=1e-6)

    def test_hard_case_analytic_enumeration(self):
        # KKT enumeration: (M + I)s = -(0,1) with r = 2 forces s2 = -1/2 and
        # a free +-e1 component with |s1| = sqrt(15)/2.
        model = CubicModel(g=np.array([0.0, 1.0]), M=np.diag([-1.0, 1.0]), eta=1.0)
        sol = solve_exact(model)
        assert sol.solver_kind == "exact_hard_case"
        assert sol.radius == pytest.approx(2.0, rel=1e-12)
        assert abs(sol.step[0]) == pytest.approx(np.sqrt(15.0) / 2.0, rel=1e-12)
        assert sol.step[1] == pytest.approx(-0.5, rel=1e-12)
        assert model_value(model, sol.step) == pytest.approx(-11.0 / 12.0, rel=1e-12)

    def test_kkt_invariants_on_random_models(self, rng):
        for _ in range(60):
            model = random_cubic_model(rng)
            sol = solve_exact(model, kkt_tol=1e-9)
            gn = np.linalg.norm(model.g)
            mn = linalg.spectral_norm(model.M)
            assert sol.stationarity_residual <= 1e-9 * (1 + gn)
            assert sol.curvature_margin >= -1e-9 * (1 + mn)
            assert sol.radius == pytest.approx(np.linalg.norm(sol.step), rel=1e-12)
            assert model_value(model, sol.step) <= 1e-12

    def test_constructed_hard_cases(self, rng):
        seen_hard = False
        for _ in range(10):
            model = hard_case_model(rng)
            sol = solve_exact(model)
            seen_hard = seen_hard or sol.solver_kind == "exact_hard_case"
            res, margin = kkt_residuals(model, sol.step)
            assert res <= 1e-9 * (1 + np.linalg.norm(model.g))
            assert margin >= -1e-9 * (1 + linalg.spectral_norm(model.M))
        assert seen_hard

    def test_kkt_tol_range_enforced(self, rng):
        model = random_cubic_model(rng)
        with pytest.raises(InvalidInputError):
            solve_exact(model, kkt_tol=1e-3)


def cauchy_point_value(model):
    """Best model value along the steepest-descent ray (independent oracle)."""
    g = model.g
    gn = np.linalg.norm(g)
    if gn == 0:
        return 0.0
    d = -g / gn

    def along(t):
        return model_value(model, t * d)

    res = minimize_scalar(along, bounds=(0.0, 1e3), method="bounded",
                          options={"xatol": 1e-12})
    return min(0.0, float(res.fun))


class TestSolveLanczos:
    def test_full_subspace_matches_exact(self, rng):
        for _ in range(5):
            model = random_cubic_model(rng, max_dim=15)
            exact = solve_exact(model)
            lcz = solve_lanczos(model, krylov_dim=model.dim, kkt_tol=1e-9)
            assert np.linalg.norm(exact.step - lcz.step) <= 1e-8 * (1 + exact.radius)

    def test_zero_gradient_psd(self):
        model = CubicModel(g=np.zeros(4), M=np.eye(4), eta=1.0)
        sol = solve_lanczos(model, krylov_dim=4)
        assert np.all(sol.step == 0.0)

    def test_zero_gradient_indefinite_takes_eigvector_step(self, rng):
        Q, _ = np.linalg.qr(rng.standard_normal((6, 6)))
        evals = np.array([-1.0, 0.2, 0.5, 0.9, 1.3, 2.0])
        M = (Q * evals) @ Q.T
        M = (M + M.T) / 2.0
        model = CubicModel(g=np.zeros(6), M=M, eta=0.5)
        sol = solve_lanczos(model, krylov_dim=6)
        # r_min = 2 eta |lambda_min| = 1; step is the padded eigvector
        assert sol.radius == pytest.approx(1.0, rel=1e-6)
        assert model_value(model, sol.step) < 0.0

    def test_large_model_residual_and_cauchy_dominance(self, rng):
        n = 200
        A = rng.standard_normal((n, n)) / np.sqrt(n)
        M = (A + A.T) / 2.0
        g = rng.standard_normal(n)
        model = CubicModel(g=g, M=M, eta=0.3)
        sol = solve_lanczos(model, krylov_dim=30, kkt_tol=1e-6)
        assert sol.stationarity_residual <= 1e-6 * (1 + np.linalg.norm(g))
        assert model_value(model, sol.step) <= cauchy_point_value(model) + 1e-12

    def test_failure_carries_truthful_residual(self, rng):
        # Tight tolerance with a tiny subspace cannot converge; the error
        # object must carry the best step with its true residual.
        n = 80
        A = rng.standard_normal((n, n))
        M = (A + A.T) / 2.0
        g = rng.standard_normal(n)
        model = CubicModel(g=g, M=M, eta=0.5)
        with pytest.raises(NumericFailure) as exc_info:
            solve_lanczos(model, krylov_dim=2, kkt_tol=1e-9)
        partial = exc_info.value.partial
        assert partial is not None
        r = np.linalg.norm(partial.step)
        recomputed = np.linalg.norm(
            model.g + model.M @ partial.step + (r / (2 * model.eta)) * partial.step
        )
        assert partial.stationarity_residual == pytest.approx(recomputed, rel=1e-12)

    def test_krylov_dim_validation(self, rng):
        model = random_cubic_model(rng)
        with pytest.raises(InvalidInputError):
            solve_lanczos(model, krylov_dim=1)


class TestDispatch:
    def test_auto_uses_exact_below_cutoff(self, rng):
        model = random_cubic_model(rng)
        sol = subproblem.solve(model, dense_cutoff=50)
        assert sol.solver_kind.startswith("exact")

    def test_auto_uses_lanczos_above_cutoff(self, rng):
        n = 60
        A = rng.standard_normal((n, n))
        model = CubicModel(g=rng.standard_normal(n), M=(A + A.T) / 2, eta=0.5)
        sol = subproblem.solve(model, dense_cutoff=50, krylov_dim=60)
        assert sol.solver_kind == "lanczos"
