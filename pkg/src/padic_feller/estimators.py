"""scikit-learn wrappers over batches of radial functions.

A batch is a 2-D array whose rows are ``[inner, f(p**k_min), ..., f(p**(k_min+K-1))]``:
the first column is the constant value on the ball below ``k_min`` and
outside the window each row is taken to be zero.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .levy import sample_increments, shell_masses
from .operators import PseudoDiffOperator, resolvent_solve
from .radial import RadialFunction, inverse_radial_fourier, radial_fourier
from .semigroup import heat_kernel, semigroup_apply


def _rows(X) -> np.ndarray:
    X = np.asarray(X)
    if X.ndim != 2 or X.shape[1] < 2:
        raise ValueError("expected a 2-D array with an inner column and at least one shell")
    return X


def _to_function(row, p, n, k_min) -> RadialFunction:
    return RadialFunction(p, n, k_min, np.asarray(row[1:]), inner=row[0])


def _sample_on(g: RadialFunction, k_min: int, K: int) -> np.ndarray:
    ks = range(k_min, k_min + K)
    return np.array([g.at(-np.inf)] + [g.at(k) for k in ks])


class RadialFourierTransformer(TransformerMixin, BaseEstimator):
    """Exact radial Fourier transform of each row.

    Rows on shells ``[a, b]`` transform to rows on ``[1 - b, 1 - a]``, so the
    output has the input's shape and applying the transform twice returns the
    original window.
    """

    def __init__(self, p=2, n=1, k_min=0, inverse=False):
        self.p = p
        self.n = n
        self.k_min = k_min
        self.inverse = inverse

    def fit(self, X, y=None):
        X = _rows(X)
        self.n_shells_ = X.shape[1] - 1
        self.output_k_min_ = 2 - self.k_min - self.n_shells_
        return self

    def transform(self, X):
        check_is_fitted(self, "n_shells_")
        X = _rows(X)
        if X.shape[1] - 1 != self.n_shells_:
            raise ValueError("column count differs from fit")
        ft = inverse_radial_fourier if self.inverse else radial_fourier
        out = [_sample_on(ft(_to_function(r, self.p, self.n, self.k_min)),
                          self.output_k_min_, self.n_shells_) for r in X]
        out = np.array(out)
        return out.real if np.all(out.imag == 0) else out


class HeatSemigroup(TransformerMixin, BaseEstimator):
    """``T_t f`` for each row, sampled back on the input window.

    The first output column is the value at the origin.
    """

    def __init__(self, operator: PseudoDiffOperator | None = None, t=1.0, k_min=0, eps=1e-12):
        self.operator = operator
        self.t = t
        self.k_min = k_min
        self.eps = eps

    def fit(self, X, y=None):
        X = _rows(X)
        if self.operator is None:
            raise ValueError("operator is required")
        self.kernel_ = heat_kernel(self.operator, self.t, self.eps)
        self.n_shells_ = X.shape[1] - 1
        return self

    def transform(self, X):
        check_is_fitted(self, "kernel_")
        op = self.operator
        return np.array([_sample_on(semigroup_apply(self.kernel_, _to_function(r, op.p, op.n,
                                                                             self.k_min)).real_part(),
                                    self.k_min, X.shape[1] - 1) for r in _rows(X)])


class ResolventTransformer(TransformerMixin, BaseEstimator):
    """``(lam - P)^{-1} f`` for each row, sampled on the input window."""

    def __init__(self, operator: PseudoDiffOperator | None = None, lam=1.0, k_min=0):
        self.operator = operator
        self.lam = lam
        self.k_min = k_min

    def fit(self, X, y=None):
        _rows(X)
        if self.operator is None or not self.lam > 0:
            raise ValueError("an operator and a positive lam are required")
        self.fitted_ = True
        return self

    def transform(self, X):
        check_is_fitted(self, "fitted_")
        op = self.operator
        return np.array([_sample_on(resolvent_solve(op, self.lam,
                                                    _to_function(r, op.p, op.n, self.k_min)).real_part(),
                                    self.k_min, X.shape[1] - 1) for r in _rows(X)])


class LevyIncrementSampler(BaseEstimator):
    """Norm shells of increments ``X_t`` drawn from the heat kernel.

    Not a transformer: ``fit`` builds the shell law and ``sample`` draws from it.
    """

    def __init__(self, operator: PseudoDiffOperator | None = None, t=1.0, seed=0, digits=32,
                 workers=1):
        self.operator = operator
        self.t = t
        self.seed = seed
        self.digits = digits
        self.workers = workers

    def fit(self, X=None, y=None):
        if self.operator is None:
            raise ValueError("operator is required")
        self.measure_ = shell_masses(heat_kernel(self.operator, self.t))
        return self

    def sample(self, N, stream=0):
        check_is_fitted(self, "measure_")
        batch = sample_increments(self.measure_, N, self.seed, stream=stream, L=self.digits,
                                  workers=self.workers)
        return batch.norm_shells()
