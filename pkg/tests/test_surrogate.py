import numpy as np
import pytest
from numpy.testing import assert_allclose
from sklearn.base import clone

from nodectrl.errors import ConfigurationError, IllConditionedError
from nodectrl.surrogate import (
    GaussianKernelSurrogate,
    fit_interpolation,
    fit_ridge,
    kernel_eval,
    relative_error_field,
)


def random_fit(n=10, gamma=0.05, seed=3):
    rg = np.random.default_rng(seed)
    X = rg.random((n, 2))
    y = rg.normal(size=n)
    return X, y


class TestKernel:
    def test_self_similarity_is_one(self):
        assert kernel_eval([0.3, 0.7], [0.3, 0.7], 0.01) == 1.0

    def test_known_value(self):
        # |p - q|^2 = 1 and gamma = 0.5 give exp(-1)
        assert_allclose(kernel_eval([0.0, 0.0], [1.0, 0.0], 0.5), np.exp(-1.0), rtol=1e-15)

    def test_gamma_validated(self):
        with pytest.raises(ConfigurationError):
            kernel_eval([0.0], [1.0], 0.0)


class TestInterpolation:
    def test_reproduces_node_values(self):
        X, y = random_fit()
        surr = fit_interpolation(X, y, 0.05)
        assert_allclose(surr.predict(X), y, rtol=0, atol=1e-13)

    def test_two_node_closed_form(self):
        # symmetric midpoint prediction has the closed form 3 e^{-1/4} / (1 + e^{-1})
        nodes = np.array([[0.0, 0.0], [1.0, 0.0]])
        surr = fit_interpolation(nodes, [1.0, 2.0], 0.5)
        expect = 3.0 / (1.0 + np.exp(-1.0)) * np.exp(-0.25)
        assert_allclose(surr.predict_one([0.5, 0.0]), expect, rtol=1e-14)

    def test_gradient_matches_finite_differences(self):
        X, y = random_fit(n=8, gamma=0.3)
        surr = fit_interpolation(X, y, 0.3)
        p = np.array([0.4, 0.6])
        h = 1e-6
        grad = surr.gradient_one(p)
        for k in range(2):
            e = np.zeros(2)
            e[k] = h
            fd = (surr.predict_one(p + e) - surr.predict_one(p - e)) / (2 * h)
            assert_allclose(grad[k], fd, rtol=1e-7, atol=1e-9)

    def test_gradient_zero_at_symmetric_point(self):
        nodes = np.array([[0.0, 0.0], [1.0, 0.0]])
        surr = fit_interpolation(nodes, [1.0, 1.0], 0.5)
        g = surr.gradient_one([0.5, 0.0])
        assert abs(g[0]) < 1e-15

    def test_batch_shapes(self):
        X, y = random_fit()
        surr = fit_interpolation(X, y, 0.05)
        q = np.random.default_rng(0).random((7, 2))
        assert surr.predict(q).shape == (7,)
        assert surr.gradient(q).shape == (7, 2)

    def test_duplicate_nodes_rejected(self):
        nodes = np.array([[0.1, 0.2], [0.3, 0.4], [0.1, 0.2]])
        with pytest.raises(ConfigurationError):
            fit_interpolation(nodes, [1.0, 2.0, 3.0], 0.05)

    def test_length_mismatch_rejected(self):
        with pytest.raises(ConfigurationError):
            fit_interpolation(np.zeros((3, 2)), [1.0, 2.0], 0.05)

    def test_gamma_validated(self):
        X, y = random_fit()
        with pytest.raises(ConfigurationError):
            fit_interpolation(X, y, -1.0)


class TestRidge:
    def test_lambda_zero_is_interpolation_bitwise(self):
        X, y = random_fit()
        a = fit_interpolation(X, y, 0.05)
        b = fit_ridge(X, y, 0.05, 0.0)
        assert np.array_equal(a.coeffs_, b.coeffs_)

    def test_shrinks_norm_and_leaves_residual(self):
        X, y = random_fit()
        interp = fit_interpolation(X, y, 0.05)
        ridge = fit_ridge(X, y, 0.05, 1e-3)
        assert ridge.rkhs_norm2() < interp.rkhs_norm2()
        assert np.abs(ridge.predict(X) - y).max() > 1e-3

    def test_noise_cov_zero_falls_back_to_unit_scale(self):
        X, y = random_fit()
        a = fit_ridge(X, y, 0.05, 1e-3, noise_cov=0.0)
        b = fit_ridge(X, y, 0.05, 1e-3, noise_cov=1.0)
        assert np.array_equal(a.coeffs_, b.coeffs_)

    def test_larger_noise_cov_shrinks_more(self):
        X, y = random_fit()
        a = fit_ridge(X, y, 0.05, 1e-3, noise_cov=1.0)
        b = fit_ridge(X, y, 0.05, 1e-3, noise_cov=2.0)
        assert b.rkhs_norm2() < a.rkhs_norm2()

    def test_negative_lambda_rejected(self):
        X, y = random_fit()
        with pytest.raises(ConfigurationError):
            fit_ridge(X, y, 0.05, -1e-3)


class TestConditioning:
    def test_jitter_ladder_handles_near_duplicates(self):
        eps = np.finfo(float).eps
        nodes = np.array([[1.0, 1.0], [1.0 + 2 * eps, 1.0], [2.0, 2.0]])
        vals = [1.0, 1.0, 2.0]
        surr = fit_interpolation(nodes, vals, 0.5)
        assert surr.jitter_ > 0
        assert np.abs(surr.predict(nodes) - vals).max() < 1e-6

    def test_clean_fit_needs_no_jitter(self):
        X, y = random_fit()
        assert fit_interpolation(X, y, 0.05).jitter_ == 0.0

    def test_jitter_ceiling_raises(self, monkeypatch):
        import nodectrl.surrogate as sg

        def always_fail(K, b):
            raise np.linalg.LinAlgError("forced")

        monkeypatch.setattr(sg, "_solve_spd_ld", always_fail)
        X, y = random_fit()
        with pytest.raises(IllConditionedError) as exc:
            fit_interpolation(X, y, 0.05)
        assert exc.value.cond_estimate >= 1.0


class TestSerialization:
    def test_round_trip_preserves_evaluation_bitwise(self):
        X, y = random_fit()
        surr = fit_interpolation(X, y, 0.05)
        back = GaussianKernelSurrogate.from_json(surr.to_json())
        q = np.random.default_rng(11).random((5, 2))
        assert np.array_equal(surr.predict(q), back.predict(q))
        assert np.array_equal(surr.gradient(q), back.gradient(q))
        assert back.gamma == surr.gamma
        assert np.array_equal(back.nodes_, surr.nodes_)
        assert np.array_equal(back.values_, surr.values_)

    def test_unfitted_to_json_rejected(self):
        with pytest.raises(Exception):
            GaussianKernelSurrogate().to_json()


class TestEstimatorApi:
    def test_get_set_params_and_clone(self):
        est = GaussianKernelSurrogate(gamma=0.2, ridge_lambda=1e-4, noise_cov=0.5)
        params = est.get_params()
        assert params == {"gamma": 0.2, "ridge_lambda": 1e-4, "noise_cov": 0.5}
        est.set_params(gamma=0.3)
        assert est.gamma == 0.3
        assert clone(est).get_params() == est.get_params()

    def test_rkhs_norm_equals_coeff_value_product(self):
        # for interpolation, coeffs^T K coeffs = coeffs^T values
        X, y = random_fit()
        surr = fit_interpolation(X, y, 0.05)
        assert_allclose(surr.rkhs_norm2(), float(surr.coeffs_ @ y), rtol=1e-10)


class TestRelativeErrorField:
    def test_guard_skips_small_truth(self):
        nodes = np.array([[0.0, 0.0], [1.0, 0.0]])
        surr = fit_interpolation(nodes, [1.0, 2.0], 0.5)
        grid = np.array([[0.0, 0.0], [0.5, 0.0], [1.0, 0.0]])
        field, lo, hi, skipped = relative_error_field(surr, [1.0, 0.0, 2.0], grid)
        assert skipped == 1
        assert np.isnan(field[1])
        assert lo == 0.0 and hi == 0.0

    def test_all_skipped_rejected(self):
        nodes = np.array([[0.0, 0.0], [1.0, 0.0]])
        surr = fit_interpolation(nodes, [1.0, 2.0], 0.5)
        with pytest.raises(ConfigurationError):
            relative_error_field(surr, [0.0, 0.0], nodes)
