"""Regularized solves: both routes, diagnostics, and failure modes."""

import numpy as np
import pytest

from tubal import (
    GsvdTikhonovSolver,
    RegularizerKind,
    ShapeMismatchError,
    SingularFilterError,
    SingularSliceError,
    Tensor3,
    add_noise,
    choose_mu_discrepancy,
    fnorm,
    gravity_matrix,
    make_regularizer,
    normal_equation_residual,
    ones_solution,
    relative_error,
    run_tikhonov,
    separable_blur_tensor,
    solve_tikhonov_gsvd,
    solve_tikhonov_normal,
    sweep_mu,
    tgsvd,
    tprod,
    ttranspose,
)
from tubal.tikhonov import RESIDUAL_TOL
from tubal.tensor import inverse_dft_real, mirror_spectrum

from conftest import random_tensor


def normal_residual_oracle(a, l, b, mu, x):
    """Residual of the normal equation evaluated purely through tprod."""
    lhs = tprod(ttranspose(a), tprod(a, x)) + (1.0 / mu) * tprod(
        ttranspose(l), tprod(l, x)
    )
    return fnorm(lhs - tprod(ttranspose(a), b))


def small_problem(seed, m=6, k=2, n3=4, level=1e-2):
    rng = np.random.default_rng(seed)
    a = random_tensor(rng, m, m, n3)
    l = make_regularizer(RegularizerKind.L1, m, n3)
    x_true = Tensor3(rng.standard_normal((n3, m, k)))
    b_true = tprod(a, x_true)
    b, _ = add_noise(b_true, level, seed)
    return a, l, b, x_true


class TestMakeRegularizer:
    def test_l1_stencil(self):
        l = make_regularizer(RegularizerKind.L1, 5, 3)
        assert l.shape == (3, 5, 3)
        first = np.zeros((3, 5))
        first[0, :3] = (-0.25, 0.5, -0.25)
        first[1, 1:4] = (-0.25, 0.5, -0.25)
        first[2, 2:] = (-0.25, 0.5, -0.25)
        assert np.array_equal(l.slice(0), first)
        assert np.array_equal(l.data[1:], np.zeros((2, 3, 5)))

    def test_l2_stencil(self):
        l = make_regularizer("l2", 4, 2)
        assert l.shape == (3, 4, 2)
        first = np.zeros((3, 4))
        for i in range(3):
            first[i, i : i + 2] = (0.5, -0.5)
        assert np.array_equal(l.slice(0), first)
        assert np.array_equal(l.slice(1), np.zeros((3, 4)))

    def test_size_gates(self):
        with pytest.raises(ValueError):
            make_regularizer(RegularizerKind.L1, 2, 3)
        with pytest.raises(ValueError):
            make_regularizer(RegularizerKind.L2, 1, 3)
        with pytest.raises(ValueError):
            make_regularizer("l3", 5, 3)


class TestRelativeError:
    def test_value(self, rng):
        x = Tensor3(rng.standard_normal((2, 3, 2)))
        assert relative_error(x, x) == 0.0
        assert relative_error(2.0 * x, x) == pytest.approx(1.0)

    def test_gates(self, rng):
        x = Tensor3(rng.standard_normal((2, 3, 2)))
        with pytest.raises(ShapeMismatchError):
            relative_error(x, Tensor3(rng.standard_normal((2, 3, 1))))
        with pytest.raises(ValueError):
            relative_error(x, Tensor3.zeros(3, 2, 2))


class TestRoutes:
    @pytest.mark.parametrize("seed", [0, 1, 2])
    @pytest.mark.parametrize("mu", [1e-2, 1.0, 1e2])
    def test_gsvd_matches_normal(self, seed, mu):
        a, l, b, _ = small_problem(seed)
        xg = solve_tikhonov_gsvd(tgsvd(a, l), b, mu)
        xn = solve_tikhonov_normal(a, l, b, mu)
        assert fnorm(xg - xn) <= 1e-8 * max(1.0, fnorm(xn))

    @pytest.mark.parametrize("n3", [1, 3, 4])
    def test_residual_matches_tprod_oracle(self, n3):
        a, l, b, _ = small_problem(7, n3=n3)
        x = solve_tikhonov_normal(a, l, b, 0.5)
        reported = normal_equation_residual(a, l, b, 0.5, x)
        oracle = normal_residual_oracle(a, l, b, 0.5, x)
        assert reported == pytest.approx(oracle, rel=1e-10, abs=1e-13)

    def test_mu_gates(self):
        a, l, b, _ = small_problem(0)
        with pytest.raises(ValueError):
            solve_tikhonov_normal(a, l, b, 0.0)
        with pytest.raises(ValueError):
            solve_tikhonov_gsvd(tgsvd(a, l), b, -1.0)

    def test_shape_gates(self, rng):
        a, l, b, _ = small_problem(0)
        with pytest.raises(ShapeMismatchError):
            solve_tikhonov_normal(Tensor3(a.data[:, :5, :]), l, b, 1.0)
        with pytest.raises(ShapeMismatchError):
            solve_tikhonov_normal(a, Tensor3(l.data[:, :, :5]), b, 1.0)
        with pytest.raises(ShapeMismatchError):
            solve_tikhonov_normal(a, l, Tensor3(b.data[:, :5, :]), 1.0)


class TestRunTikhonov:
    def test_residual_bound_and_diagnostics(self):
        a, l, b, x_true = small_problem(3)
        run = run_tikhonov(a, l, b, 2.0, x_true=x_true)
        bound = RESIDUAL_TOL * fnorm(tprod(ttranspose(a), b))
        assert normal_residual_oracle(a, l, b, 2.0, run.x_mu) <= bound
        assert run.normal_residual <= bound
        assert 0 <= run.refine_passes <= 4
        assert run.relative_error == relative_error(run.x_mu, x_true)
        assert run_tikhonov(a, l, b, 2.0).relative_error is None

    def test_shared_factorization_is_equivalent(self):
        a, l, b, _ = small_problem(4)
        g = tgsvd(a, l)
        x1 = run_tikhonov(a, l, b, 0.3).x_mu
        x2 = run_tikhonov(a, l, b, 0.3, g=g).x_mu
        assert np.array_equal(x1.data, x2.data)

    def test_sweep_matches_single_runs(self):
        a, l, b, x_true = small_problem(5)
        mus = [1e-3, 1e-1, 10.0]
        runs = sweep_mu(a, l, b, mus, x_true=x_true)
        assert [r.mu for r in runs] == mus
        for r in runs:
            single = run_tikhonov(a, l, b, r.mu, x_true=x_true)
            assert np.array_equal(r.x_mu.data, single.x_mu.data)
            assert r.normal_residual == single.normal_residual
            assert r.relative_error == single.relative_error


class TestSingularities:
    def test_rank_deficient_slice_reported(self, rng):
        a_data = rng.standard_normal((3, 4, 4))
        l_data = rng.standard_normal((3, 2, 4))
        a_data[:, :, 0] = 0.0  # shared dead column of the stacked pair
        l_data[:, :, 0] = 0.0
        a, l = Tensor3(a_data), Tensor3(l_data)
        b = Tensor3(rng.standard_normal((3, 4, 1)))
        with pytest.raises(SingularSliceError) as info:
            run_tikhonov(a, l, b, 1.0)
        assert info.value.slice_index == 1

    @staticmethod
    def _null_direction_pair():
        # second column leaves the operator's range at the first frequency
        # slice only; with a huge weight its filter tube degenerates
        half_a = np.stack([np.diag([1.0, 0.0]), np.eye(2)]).astype(complex)
        half_l = np.stack([np.eye(2), np.eye(2)]).astype(complex)
        a = Tensor3(inverse_dft_real(mirror_spectrum(half_a, 3))[0])
        l = Tensor3(inverse_dft_real(mirror_spectrum(half_l, 3))[0])
        return a, l

    def test_vanishing_filter_tube_reported(self, rng):
        a, l = self._null_direction_pair()
        solver = GsvdTikhonovSolver(tgsvd(a, l))
        b = Tensor3(rng.standard_normal((3, 2, 1)))
        assert solver.solve(b, 1.0).shape == (2, 1, 3)
        with pytest.raises(SingularFilterError) as info:
            solver.solve(b, 1e16)
        assert info.value.tube_index == 2
        assert info.value.fourier_index == 1


class TestDiscrepancy:
    @staticmethod
    def _gravity_problem(n=16, level=1e-2, seed=0):
        k1 = gravity_matrix(n, 0.8)
        a = separable_blur_tensor(k1[:, 0], k1)
        l = make_regularizer(RegularizerKind.L1, n, n)
        x_true = ones_solution(n, 3, n)
        b_true = tprod(a, x_true)
        b, e = add_noise(b_true, level, seed)
        return a, l, b, fnorm(e)

    def test_matches_target_residual(self):
        # random truth, so heavy regularization leaves a large misfit and
        # the target residual is reached at an interior weight
        a, l, b, x_true = small_problem(11, m=8, level=1e-2)
        eps = fnorm(b - tprod(a, x_true))
        mu = choose_mu_discrepancy(a, l, b, eps, eta=1.1)
        x = run_tikhonov(a, l, b, mu).x_mu
        fit = fnorm(tprod(a, x) - b)
        assert fit == pytest.approx(1.1 * eps, rel=0.05)

    def test_bracket_endpoints(self):
        a, l, b, _ = self._gravity_problem()
        big = 10.0 * fnorm(b)
        assert choose_mu_discrepancy(a, l, b, big, bracket=(1e-6, 1e6)) == 1e-6
        assert choose_mu_discrepancy(a, l, b, 0.0, bracket=(1e-6, 1e6)) == 1e6
        with pytest.raises(ValueError):
            choose_mu_discrepancy(a, l, b, -1.0)
