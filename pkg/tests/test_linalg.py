import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from scrn import linalg
from scrn.exceptions import InvalidInputError, NumericFailure


def faddeev_leverrier_charpoly(A):
    """Characteristic polynomial coefficients by the trace recurrence.

    Independent of any eigensolver; returns monic coefficients
    [1, c_{n-1}, ..., c_0].
    """
    n = A.shape[0]
    coeffs = [1.0]
    Mk = np.zeros_like(A)
    for k in range(1, n + 1):
        Mk = A @ Mk + coeffs[-1] * np.eye(n)
        coeffs.append(-np.trace(A @ Mk) / k)
    return np.array(coeffs)


class TestFrobeniusNorm:
    def test_zero_matrix(self):
        assert linalg.frobenius_norm(np.zeros((4, 4))) == 0.0

    def test_identity(self):
        assert linalg.frobenius_norm(np.eye(3)) == pytest.approx(np.sqrt(3.0))

    def test_matches_trace_oracle(self, rng):
        A = rng.standard_normal((4, 4))
        # brute-force double loop for trace(A^T A)
        acc = 0.0
        for i in range(4):
            for j in range(4):
                acc += A[i, j] * A[i, j]
        assert linalg.frobenius_norm(A) == pytest.approx(np.sqrt(acc), rel=1e-14)

    def test_rejects_nonfinite(self):
        with pytest.raises(InvalidInputError):
            linalg.frobenius_norm(np.array([[1.0, np.nan], [0.0, 1.0]]))


class TestEigenvalues:
    def test_diagonal(self):
        A = np.diag([3.0, -1.0])
        assert linalg.spectral_norm(A) == pytest.approx(3.0)
        assert linalg.min_eigenvalue(A) == pytest.approx(-1.0)

    def test_identity(self):
        assert linalg.spectral_norm(np.eye(5)) == pytest.approx(1.0)
        assert linalg.min_eigenvalue(np.eye(5)) == pytest.approx(1.0)

    def test_min_eigenvalue_matches_charpoly_roots(self, rng):
        A = rng.standard_normal((6, 6))
        A = (A + A.T) / 2.0
        roots = np.roots(faddeev_leverrier_charpoly(A))
        oracle = np.min(np.real(roots))
        assert linalg.min_eigenvalue(A) == pytest.approx(oracle, abs=1e-10)

    def test_dense_agreement_up_to_dim_50(self, rng):
        for n in (2, 17, 50):
            A = rng.standard_normal((n, n))
            A = (A + A.T) / 2.0
            lam = linalg.min_eigenvalue(A)
            ref = np.linalg.eigvalsh(A)[0]
            assert lam == pytest.approx(ref, rel=1e-10, abs=1e-10)

    def test_lanczos_path_matches_dense(self, rng):
        A = rng.standard_normal((40, 40))
        A = (A + A.T) / 2.0
        lam = linalg.min_eigenvalue(A, dense_cutoff=10)
        assert lam == pytest.approx(np.linalg.eigvalsh(A)[0], rel=1e-8, abs=1e-8)

    def test_requires_symmetry(self, rng):
        with pytest.raises(InvalidInputError):
            linalg.min_eigenvalue(rng.standard_normal((4, 4)))


class TestCubedNormBounds:
    def test_zero_u_collapses(self, rng):
        V = rng.standard_normal((3, 3))
        lhs, rhs1, rhs2 = linalg.cubed_norm_expansion_bounds(np.zeros((3, 3)), V, 1.0)
        nv3 = linalg.frobenius_norm(V) ** 3
        assert lhs == pytest.approx(nv3)
        assert rhs1 == pytest.approx(4.0 * nv3)
        assert lhs <= rhs1 and lhs <= rhs2

    def test_zero_v_collapses(self, rng):
        U = rng.standard_normal((3, 3))
        c = 0.7
        lhs, rhs1, rhs2 = linalg.cubed_norm_expansion_bounds(U, np.zeros((3, 3)), c)
        nu3 = linalg.frobenius_norm(U) ** 3
        assert lhs == pytest.approx(nu3)
        assert rhs1 == pytest.approx((1.0 + c) * nu3 + 3.0 * linalg.frobenius_norm(U) * 0.0)
        assert lhs <= rhs1 and lhs <= rhs2

    def test_shape_mismatch(self):
        with pytest.raises(InvalidInputError):
            linalg.cubed_norm_expansion_bounds(np.eye(2), np.eye(3), 1.0)

    def test_invalid_c(self):
        with pytest.raises(InvalidInputError):
            linalg.cubed_norm_expansion_bounds(np.eye(2), np.eye(2), 0.0)

    @settings(max_examples=300)
    @given(
        n=st.integers(1, 6),
        data=st.data(),
        logc=st.floats(-3.0, 3.0),
    )
    def test_both_bounds_hold(self, n, data, logc):
        elems = st.floats(-1.0, 1.0, allow_nan=False)
        U = data.draw(hnp.arrays(float, (n, n), elements=elems))
        V = data.draw(hnp.arrays(float, (n, n), elements=elems))
        lhs, rhs1, rhs2 = linalg.cubed_norm_expansion_bounds(U, V, 10.0**logc)
        assert lhs <= rhs1 + 1e-12
        assert lhs <= rhs2 + 1e-12

    @settings(max_examples=200)
    @given(n=st.integers(1, 8), m=st.integers(1, 8), data=st.data())
    def test_spectral_below_frobenius(self, n, m, data):
        A = data.draw(
            hnp.arrays(float, (n, m), elements=st.floats(-10, 10, allow_nan=False))
        )
        assert linalg.spectral_norm(A) <= linalg.frobenius_norm(A) * (1 + 1e-12) + 1e-300


class TestSymmetrize:
    def test_symmetrize_and_validate(self, rng):
        A = rng.standard_normal((5, 5))
        S = linalg.symmetrize(A)
        assert np.array_equal(S, S.T)
        assert linalg.require_symmetric(S) is S or np.array_equal(
            linalg.require_symmetric(S), S
        )

    def test_nonsquare_rejected(self):
        with pytest.raises(InvalidInputError):
            linalg.symmetrize(np.ones((2, 3)))
