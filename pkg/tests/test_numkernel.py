import numpy as np
import pytest

from evolqr.numkernel import (
    ConvergenceError,
    SingularMatrixError,
    dare_gain,
    mat_exp,
    solve_linear,
    spectral_radius,
)


class TestSolveLinear:
    def test_identity(self):
        b = np.arange(6.0).reshape(3, 2)
        assert np.allclose(solve_linear(np.eye(3), b), b)

    def test_diagonal(self):
        x = solve_linear(np.array([[2.0, 0.0], [0.0, 4.0]]), np.array([[2.0], [8.0]]))
        assert np.allclose(x, [[1.0], [2.0]])

    def test_random_residual(self):
        rng = np.random.default_rng(0)
        a = rng.normal(size=(6, 6)) + 6 * np.eye(6)
        b = rng.normal(size=(6, 3))
        x = solve_linear(a, b)
        assert np.abs(a @ x - b).max() <= 1e-9 * (1 + np.abs(b).max())

    def test_residual_over_many_systems(self):
        rng = np.random.default_rng(1)
        for _ in range(1000):
            n = int(rng.integers(2, 7))
            a = rng.normal(size=(n, n)) + n * np.eye(n)
            b = rng.normal(size=(n, 2))
            x = solve_linear(a, b)
            assert np.abs(a @ x - b).max() <= 1e-9 * (1 + np.abs(b).max())

    def test_singular_raises(self):
        with pytest.raises(SingularMatrixError):
            solve_linear(np.array([[1.0, 2.0], [2.0, 4.0]]), np.eye(2))

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            solve_linear(np.array([[np.nan, 0.0], [0.0, 1.0]]), np.eye(2))


class TestMatExp:
    def test_zero(self):
        assert np.allclose(mat_exp(np.zeros((3, 3))), np.eye(3))

    def test_diagonal(self):
        a = np.diag([np.log(2.0), np.log(3.0)])
        assert np.allclose(mat_exp(a), np.diag([2.0, 3.0]), rtol=1e-12)

    def test_nilpotent(self):
        assert np.allclose(mat_exp(np.array([[0.0, 1.0], [0.0, 0.0]])), [[1, 1], [0, 1]])

    def test_inverse_identity(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            a = rng.normal(size=(4, 4))
            a *= 5.0 / max(1.0, np.linalg.norm(a))
            assert np.abs(mat_exp(a) @ mat_exp(-a) - np.eye(4)).max() < 1e-8


class TestDareGain:
    def test_scalar_quadratic_oracle(self):
        # p = 0.25p - (0.5p)^2/(1+p) + 1 reduces to p^2 - 0.25p - 1 = 0
        p_star = (0.25 + np.sqrt(0.0625 + 4.0)) / 2.0
        k_star = 0.5 * p_star / (1.0 + p_star)
        k, p = dare_gain(np.array([[0.5]]), np.array([[1.0]]), np.eye(1), np.eye(1))
        assert abs(p[0, 0] - p_star) < 1e-8
        assert abs(k[0, 0] - k_star) < 1e-8

    def test_uncontrollable_stable_geometric(self):
        k, p = dare_gain(
            np.array([[0.5]]), np.array([[0.0]]), np.eye(1), np.eye(1), tol=1e-12
        )
        assert abs(k[0, 0]) == 0.0
        assert abs(p[0, 0] - 1.0 / (1.0 - 0.25)) < 1e-9

    def test_vehicle_model_stabilizes(self):
        from evolqr.vehicle import build_continuous, default_truck, discretize_zoh

        model = discretize_zoh(build_continuous(default_truck()), 0.1)
        k, p = dare_gain(model.f, model.g, np.eye(4), np.eye(1))
        assert spectral_radius(model.f - model.g @ k) < 1.0

    def test_p_symmetric_psd(self):
        rng = np.random.default_rng(3)
        for _ in range(30):
            n, m = int(rng.integers(2, 5)), int(rng.integers(1, 3))
            f = rng.normal(size=(n, n)) * 0.6
            g = rng.normal(size=(n, m))
            k, p = dare_gain(f, g, np.eye(n), np.eye(m))
            assert np.abs(p - p.T).max() < 1e-10
            assert np.linalg.eigvalsh(p).min() >= -1e-10

    def test_no_convergence_reports_residual(self):
        with pytest.raises(ConvergenceError) as exc:
            dare_gain(np.array([[2.0]]), np.array([[0.0]]), np.eye(1), np.eye(1), max_iter=50)
        assert np.isfinite(exc.value.residual)


class TestSpectralRadius:
    def test_diagonal(self):
        assert spectral_radius(np.diag([0.2, -0.9])) == pytest.approx(0.9, abs=1e-12)

    def test_rotation(self):
        assert spectral_radius(np.array([[0.0, 1.0], [-1.0, 0.0]])) == pytest.approx(1.0, abs=1e-12)

    def test_matches_companion_matrix_oracle(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            a = rng.normal(size=(4, 4))
            oracle = np.abs(np.roots(np.poly(a))).max()
            assert spectral_radius(a) == pytest.approx(oracle, rel=1e-8, abs=1e-8)
