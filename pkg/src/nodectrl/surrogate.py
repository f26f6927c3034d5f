"""Gaussian-kernel surrogate of the loss landscape.

The surrogate is the weighted kernel sum

    Lhat(p) = sum_n coeffs_n k(p, node_n),   k(p, q) = exp(-|p - q|^2 / (2 gamma)),

with coefficients from the interpolation system K coeffs = values or its ridge
variant (K + N lambda c I) coeffs = values, c = noise_cov when positive else 1.

Numerical note: at gamma = 1e-2 the experiment boxes span only a few kernel
length scales, so the Gram matrix condition number reaches ~1e12 and the
coefficients reach ~1e8 in magnitude. Double-precision evaluation of the kernel
sum then carries an absolute noise floor around sum|coeffs| * eps ~ 1e-7, which
is too coarse both to reproduce node values to 1e-8 relative and to compare the
analytic gradient against central finite differences at 1e-5 relative. The
factorization, the coefficients, and every evaluation therefore run in numpy's
extended precision (longdouble); callers see float64 results. The 20x20
Cholesky factorization is hand-rolled because LAPACK offers no extended-
precision path.
"""

import json

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .errors import ConfigurationError, IllConditionedError

_LD = np.longdouble

# escalating diagonal shift, as multiples of trace(K)/N
_JITTER_START = 1e-12
_JITTER_CEIL = 1e-6


def kernel_eval(p, q, gamma):
    """k(p, q) = exp(-|p - q|^2 / (2 gamma)), in (0, 1]."""
    if gamma <= 0:
        raise ConfigurationError(f"need gamma > 0, got {gamma}")
    d = np.asarray(p, dtype=float) - np.asarray(q, dtype=float)
    return float(np.exp(-(d * d).sum() / (2.0 * gamma)))


def _kernel_matrix_ld(P, Q, gamma):
    P = np.asarray(P).astype(_LD)
    Q = np.asarray(Q).astype(_LD)
    d2 = ((P[:, None, :] - Q[None, :, :]) ** 2).sum(-1)
    return np.exp(-d2 / (2 * _LD(gamma)))


def _cholesky_ld(K):
    """Lower Cholesky factor in extended precision; LinAlgError if not SPD."""
    n = K.shape[0]
    L = np.zeros_like(K)
    for i in range(n):
        s = K[i, i] - (L[i, :i] ** 2).sum()
        if not s > 0:
            raise np.linalg.LinAlgError(f"pivot {i} not positive")
        L[i, i] = np.sqrt(s)
        for j in range(i + 1, n):
            L[j, i] = (K[j, i] - (L[j, :i] * L[i, :i]).sum()) / L[i, i]
    return L


def _solve_spd_ld(K, b):
    L = _cholesky_ld(K)
    n = K.shape[0]
    y = np.zeros_like(b)
    for i in range(n):
        y[i] = (b[i] - (L[i, :i] * y[:i]).sum()) / L[i, i]
    x = np.zeros_like(b)
    for i in range(n - 1, -1, -1):
        x[i] = (y[i] - (L[i + 1:, i] * x[i + 1:]).sum()) / L[i, i]
    return x


class GaussianKernelSurrogate(BaseEstimator, RegressorMixin):
    """Kernel interpolant / ridge regressor over parameter points.

    Parameters
    ----------
    gamma : float, length scale of the Gaussian kernel (squared-distance
        denominator is 2*gamma).
    ridge_lambda : float >= 0, regularization weight; 0 gives plain
        interpolation through the observed values.
    noise_cov : float >= 0, observation-noise scale entering the ridge shift
        N * ridge_lambda * noise_cov (a zero value falls back to scale 1, so
        ridge_lambda alone still regularizes).

    Attributes after fit
    --------------------
    nodes_ : (N, 2) float64 node coordinates
    values_ : (N,) float64 fitted values
    coeffs_ : (N,) float64 view of the kernel coefficients
    jitter_ : float, diagonal shift actually applied on top of the ridge shift
    """

    def __init__(self, gamma=1e-2, ridge_lambda=0.0, noise_cov=0.0):
        self.gamma = gamma
        self.ridge_lambda = ridge_lambda
        self.noise_cov = noise_cov

    def fit(self, X, y):
        X = check_array(X, dtype=np.float64)
        y = np.asarray(y, dtype=float).reshape(-1)
        if X.shape[0] != y.shape[0]:
            raise ConfigurationError(f"{X.shape[0]} nodes but {y.shape[0]} values")
        if self.gamma <= 0:
            raise ConfigurationError(f"need gamma > 0, got {self.gamma}")
        if self.ridge_lambda < 0:
            raise ConfigurationError(f"need ridge_lambda >= 0, got {self.ridge_lambda}")
        n = X.shape[0]
        if n != np.unique(X, axis=0).shape[0]:
            raise ConfigurationError("duplicate nodes make the kernel system singular")
        K = _kernel_matrix_ld(X, X, self.gamma)
        scale = self.noise_cov if self.noise_cov > 0 else 1.0
        shift = _LD(n * self.ridge_lambda * scale)
        trace_unit = np.trace(K) / n
        jitter = _LD(0.0)
        while True:
            try:
                coeffs = _solve_spd_ld(K + (shift + jitter) * np.eye(n, dtype=_LD), y.astype(_LD))
                break
            except np.linalg.LinAlgError:
                jitter = _JITTER_START * trace_unit if jitter == 0 else jitter * 10
                if jitter > _JITTER_CEIL * trace_unit:
                    evs = np.linalg.eigvalsh(K.astype(float))
                    cond = float(evs[-1] / evs[0]) if evs[0] > 0 else float("inf")
                    raise IllConditionedError(
                        f"kernel system unsolvable within jitter ceiling "
                        f"{_JITTER_CEIL:g}*trace(K)/N (cond ~ {cond:.3e})",
                        cond_estimate=cond,
                    ) from None
        self._coeffs_ld = coeffs
        self._nodes_ld = np.asarray(X).astype(_LD)
        self.nodes_ = X.copy()
        self.values_ = y.copy()
        self.coeffs_ = coeffs.astype(float)
        self.jitter_ = float(jitter)
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        """Kernel sum at each query point (extended precision inside)."""
        check_is_fitted(self, "coeffs_")
        X = check_array(np.atleast_2d(X), dtype=np.float64)
        Kq = _kernel_matrix_ld(X, self._nodes_ld, self.gamma)
        return (Kq @ self._coeffs_ld).astype(float)

    def gradient(self, X):
        """Analytic gradient rows sum_n coeffs_n (-(p - node_n)/gamma) k(p, node_n)."""
        check_is_fitted(self, "coeffs_")
        X = check_array(np.atleast_2d(X), dtype=np.float64)
        P = np.asarray(X).astype(_LD)
        diff = P[:, None, :] - self._nodes_ld[None, :, :]
        kq = np.exp(-(diff ** 2).sum(-1) / (2 * _LD(self.gamma)))
        g = np.einsum("qnd,qn,n->qd", -diff / _LD(self.gamma), kq, self._coeffs_ld)
        return g.astype(float)

    def predict_one(self, p):
        return float(self.predict(np.asarray(p, dtype=float).reshape(1, -1))[0])

    def gradient_one(self, p):
        return self.gradient(np.asarray(p, dtype=float).reshape(1, -1))[0]

    def rkhs_norm2(self):
        """Squared native-space norm coeffs^T K coeffs of the fitted surrogate."""
        check_is_fitted(self, "coeffs_")
        K = _kernel_matrix_ld(self._nodes_ld, self._nodes_ld, self.gamma)
        return float(self._coeffs_ld @ K @ self._coeffs_ld)

    # -- serialization (JSON round-trip preserves extended precision) --------

    def to_json(self):
        check_is_fitted(self, "coeffs_")
        return json.dumps(
            {
                "gamma": self.gamma,
                "ridge_lambda": self.ridge_lambda,
                "noise_cov": self.noise_cov,
                "jitter": self.jitter_,
                "nodes": self.nodes_.tolist(),
                "values": self.values_.tolist(),
                "coeffs": self.coeffs_.tolist(),
                "coeffs_extended": [
                    np.format_float_scientific(c, precision=25) for c in self._coeffs_ld
                ],
            },
            indent=1,
        )

    @classmethod
    def from_json(cls, doc):
        data = json.loads(doc)
        est = cls(
            gamma=data["gamma"],
            ridge_lambda=data.get("ridge_lambda", 0.0),
            noise_cov=data.get("noise_cov", 0.0),
        )
        est.nodes_ = np.asarray(data["nodes"], dtype=float)
        est.values_ = np.asarray(data["values"], dtype=float)
        est._nodes_ld = est.nodes_.astype(_LD)
        est._coeffs_ld = np.array([_LD(s) for s in data["coeffs_extended"]])
        est.coeffs_ = est._coeffs_ld.astype(float)
        est.jitter_ = float(data.get("jitter", 0.0))
        est.n_features_in_ = est.nodes_.shape[1]
        return est


def fit_interpolation(nodes, values, gamma):
    """Interpolating surrogate: solves K coeffs = values exactly (SPD solve with
    an escalating-jitter fallback; the applied jitter is recorded)."""
    return GaussianKernelSurrogate(gamma=gamma).fit(nodes, values)


def fit_ridge(nodes, values, gamma, ridge_lambda, noise_cov=0.0):
    """Regularized fit; ridge_lambda = 0 reduces bitwise to fit_interpolation."""
    return GaussianKernelSurrogate(
        gamma=gamma, ridge_lambda=ridge_lambda, noise_cov=noise_cov
    ).fit(nodes, values)


def relative_error_field(surr, truth_values, grid_points, guard=1e-14):
    """Per-point |truth - surrogate| / |truth| over a grid.

    Cells with |truth| < guard are skipped (NaN) and reported; returns
    (field, min, max, skipped_count) over the valid cells.
    """
    truth = np.asarray(truth_values, dtype=float).reshape(-1)
    pred = surr.predict(grid_points)
    with np.errstate(divide="ignore", invalid="ignore"):
        field = np.abs(truth - pred) / np.abs(truth)
    skip = np.abs(truth) < guard
    field = np.where(skip, np.nan, field)
    valid = field[~skip]
    if valid.size == 0:
        raise ConfigurationError("no grid cell exceeds the truth guard")
    return field, float(valid.min()), float(valid.max()), int(skip.sum())
