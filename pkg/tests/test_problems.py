import numpy as np
import pytest
import scipy.sparse

from scrn.exceptions import InvalidInputError
from scrn.problems import (
    check_derivatives,
    fd_gradient,
    fd_hessian,
    logistic_objective,
    nls_objective,
    quartic_lipschitz_hints,
    robust_regression_objective,
    synthetic_quartic,
)
from scipy.special import expit


@pytest.fixture
def design(rng):
    A = rng.standard_normal((20, 5))
    b = (rng.random(20) < 0.5).astype(float)
    return A, b


class TestLogistic:
    def test_value_at_zero(self, design):
        A, b = design
        m = A.shape[0]
        problem = logistic_objective(A, b, reg_lambda=0.001, reg_gamma=10.0)
        # every sample contributes ln 2 to the negative log-likelihood at x=0
        assert problem.value(np.zeros(5)) == pytest.approx(m * np.log(2.0))

    def test_as_printed_sign_flag(self, design, rng):
        A, b = design
        nll = logistic_objective(A, b, 0.001, 10.0, negate_data_term=True)
        printed = logistic_objective(A, b, 0.001, 10.0, negate_data_term=False)
        x = rng.standard_normal(5)
        # data terms are negatives of each other; regularizer is shared
        reg = 0.001 * np.sum((10 * x) ** 2 / (1 + (10 * x) ** 2))
        assert nll.value(x) + printed.value(x) == pytest.approx(2 * reg, rel=1e-12)
        assert printed.f_low == -np.inf and nll.f_low == 0.0

    def test_gamma_zero_kills_regularizer(self, design, rng):
        A, b = design
        problem = logistic_objective(A, b, reg_lambda=0.5, reg_gamma=0.0)
        x = rng.standard_normal(5)
        pure = logistic_objective(A, b, reg_lambda=0.0, reg_gamma=1.0)
        assert problem.value(x) == pytest.approx(pure.value(x))
        assert problem.gradient(x) == pytest.approx(pure.gradient(x))

    def test_finite_differences(self, design):
        A, b = design
        problem = logistic_objective(A, b, 0.001, 10.0)
        g_err, h_err = check_derivatives(problem, seed=1, n_points=10)
        assert g_err <= 1e-5
        assert h_err <= 1e-4

    def test_label_validation(self, design):
        A, _ = design
        with pytest.raises(InvalidInputError):
            logistic_objective(A, np.full(20, 2.0))

    def test_sparse_design(self, design, rng):
        A, b = design
        dense = logistic_objective(A, b)
        sparse = logistic_objective(scipy.sparse.csr_matrix(A), b)
        x = rng.standard_normal(5)
        assert sparse.value(x) == pytest.approx(dense.value(x), rel=1e-12)
        assert sparse.gradient(x) == pytest.approx(dense.gradient(x), rel=1e-12)
        assert sparse.hessian(x) == pytest.approx(dense.hessian(x), rel=1e-12)

    def test_minibatch_full_batch_is_exact(self, design, rng):
        A, b = design
        problem = logistic_objective(A, b)
        x = rng.standard_normal(5)
        idx = np.arange(20)
        assert problem.gradient_minibatch(x, idx) == pytest.approx(
            problem.gradient(x), rel=1e-12
        )
        assert problem.hessian_minibatch(x, idx) == pytest.approx(
            problem.hessian(x), rel=1e-12
        )


class TestNls:
    def test_planted_fit_leaves_only_regularizer(self, rng):
        A = rng.standard_normal((15, 4))
        x0 = rng.standard_normal(4)
        b = expit(A @ x0)
        problem = nls_objective(A, b, reg_lambda=0.01, reg_gamma=1.0)
        reg = 0.01 * np.sum(x0**2 / (1 + x0**2))
        assert problem.value(x0) == pytest.approx(reg, abs=1e-12)

    def test_single_sample_at_zero(self):
        A = np.array([[1.0, 0.0]])
        problem = nls_objective(A, np.array([0.5]), reg_lambda=0.0)
        assert problem.value(np.zeros(2)) == pytest.approx(0.0, abs=1e-16)

    def test_finite_differences(self, rng):
        A = rng.standard_normal((12, 4))
        b = rng.random(12)
        problem = nls_objective(A, b, 0.001, 1.0)
        g_err, h_err = check_derivatives(problem, seed=2, n_points=10)
        assert g_err <= 1e-5
        assert h_err <= 1e-4

    def test_empty_rejected(self):
        with pytest.raises(InvalidInputError):
            nls_objective(np.zeros((0, 3)), np.zeros(0))

    def test_lower_bound(self, rng):
        A = rng.standard_normal((12, 4))
        problem = nls_objective(A, rng.random(12))
        for _ in range(20):
            assert problem.value(rng.standard_normal(4) * 3) >= problem.f_low


class TestRobust:
    def test_zero_residuals_global_minimum(self, rng):
        A = rng.standard_normal((10, 3))
        x0 = rng.standard_normal(3)
        problem = robust_regression_objective(A, A @ x0)
        assert problem.value(x0) == pytest.approx(0.0, abs=1e-14)
        for _ in range(20):
            assert problem.value(rng.standard_normal(3)) >= 0.0

    def test_nonconvexity_witness(self):
        # single sample with residual sqrt(2): the loss curvature vanishes
        A = np.array([[1.0]])
        b = np.array([np.sqrt(2.0)])
        problem = robust_regression_objective(A, b)
        H = problem.hessian(np.zeros(1))
        assert H[0, 0] == pytest.approx(0.0, abs=1e-14)

    def test_finite_differences(self, rng):
        A = rng.standard_normal((12, 4))
        b = A @ rng.standard_normal(4) + rng.standard_normal(12)
        problem = robust_regression_objective(A, b)
        g_err, h_err = check_derivatives(problem, seed=3, n_points=10)
        assert g_err <= 1e-5
        assert h_err <= 1e-4

    def test_optional_regularizer(self, rng):
        A = rng.standard_normal((10, 3))
        b = rng.standard_normal(10)
        plain = robust_regression_objective(A, b)
        reg = robust_regression_objective(
            A, b, reg_lambda=0.001, reg_gamma=1.0, include_regularizer=True
        )
        x = rng.standard_normal(3)
        assert reg.value(x) > plain.value(x)


class TestQuartic:
    def test_planted_stationary_point(self):
        problem = synthetic_quartic(6, seed=0)
        x_star = problem.meta["x_star"]
        assert np.linalg.norm(problem.gradient(x_star)) == 0.0
        assert np.linalg.eigvalsh(problem.hessian(x_star))[0] >= 0.0
        assert problem.value(x_star) == 0.0

    def test_unit_offset_derivatives(self):
        problem = synthetic_quartic(4, seed=1, curvature_scale=0.0)
        x = problem.meta["x_star"] + np.array([1.0, 0.0, 0.0, 0.0])
        assert problem.value(x) == pytest.approx(0.25)
        assert problem.gradient(x) == pytest.approx(np.array([1.0, 0, 0, 0]))
        assert problem.hessian(x) == pytest.approx(np.diag([3.0, 1.0, 1.0, 1.0]))
        g_err, h_err = check_derivatives(problem, seed=4, n_points=5)
        assert g_err <= 1e-5 and h_err <= 1e-4

    def test_nonnegative(self, rng):
        problem = synthetic_quartic(5, seed=2)
        for _ in range(30):
            assert problem.value(rng.standard_normal(5) * 2) >= 0.0

    def test_curvature_floor(self):
        problem = synthetic_quartic(5, seed=3, curvature_scale=0.3, curvature_floor=0.1)
        evals = np.linalg.eigvalsh(problem.meta["Q"])
        assert evals[0] >= 0.1 - 1e-12
        assert evals[-1] <= 0.3 + 1e-12

    def test_lipschitz_hints_formula(self):
        hints = quartic_lipschitz_hints(9, radius=2.0)
        assert hints.L == pytest.approx(12.0)
        assert hints.L_F == pytest.approx(2 * 2.0 * (3.0 + 2.0))


class TestSharedInvariants:
    @pytest.mark.parametrize("factory", ["logistic", "nls", "robust", "quartic"])
    def test_hessian_exactly_symmetric(self, factory, rng):
        if factory == "quartic":
            problem = synthetic_quartic(6, seed=5)
        else:
            A = rng.standard_normal((15, 6))
            if factory == "logistic":
                problem = logistic_objective(A, (rng.random(15) < 0.5).astype(float))
            elif factory == "nls":
                problem = nls_objective(A, rng.random(15))
            else:
                problem = robust_regression_objective(A, rng.standard_normal(15))
        for _ in range(5):
            H = problem.hessian(rng.standard_normal(6))
            assert np.array_equal(H, H.T)

    def test_regularizer_bounded(self, rng):
        A = rng.standard_normal((10, 4))
        b = (rng.random(10) < 0.5).astype(float)
        lam = 0.37
        with_reg = logistic_objective(A, b, reg_lambda=lam, reg_gamma=10.0)
        without = logistic_objective(A, b, reg_lambda=0.0, reg_gamma=10.0)
        n = 4
        for _ in range(50):
            x = rng.standard_normal(n) * 100
            reg_term = with_reg.value(x) - without.value(x)
            assert 0.0 <= reg_term <= lam * n + 1e-12


class TestFiniteDifferenceHelpers:
    def test_fd_gradient_on_quadratic(self):
        Q = np.diag([2.0, 3.0])

        def f(x):
            return 0.5 * x @ Q @ x

        x = np.array([1.0, -2.0])
        assert fd_gradient(f, x) == pytest.approx(Q @ x, rel=1e-7)

    def test_fd_hessian_on_quadratic(self):
        Q = np.array([[2.0, 0.5], [0.5, 3.0]])

        def grad(x):
            return Q @ x

        H = fd_hessian(grad, np.array([0.3, 0.7]))
        assert H == pytest.approx(Q, rel=1e-7)
