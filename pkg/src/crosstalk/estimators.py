"""scikit-learn style wrappers: fit a crystal/probe model, predict over separations."""

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted

from crosstalk.correlation import correlation
from crosstalk.damping import (MANIFOLD, Contact, ProbeConfig, crosstalk_finite_time,
                               crosstalk_long_time)
from crosstalk.lattice import LatticeSpec


class CrossTalkRegressor(RegressorMixin, BaseEstimator):
    """Normalized cross-damping ``Gamma13(r) / Gamma11`` as a function of ``r``.

    Parameters
    ----------
    dimension, symmetry, omega0, g
        Crystal parameters.
    omega : float
        Probe frequency.
    temperature : float
    sigma : float
        Gaussian contact width (0 for a point contact).
    time : float or None
        ``None`` for the long-time limit, else the finite evaluation time.
    method : {"manifold", "broadened_grid"}
        Long-time estimator.
    resolution : int or None

    Examples
    --------
    >>> est = CrossTalkRegressor(dimension=1, g=0.75, omega=1.01).fit()
    >>> est.predict([[0.0]])
    array([1.])
    """

    def __init__(self, dimension=1, symmetry="cubic", omega0=1.0, g=0.75, omega=1.01,
                 temperature=0.0, sigma=0.0, time=None, method=MANIFOLD, resolution=None):
        self.dimension = dimension
        self.symmetry = symmetry
        self.omega0 = omega0
        self.g = g
        self.omega = omega
        self.temperature = temperature
        self.sigma = sigma
        self.time = time
        self.method = method
        self.resolution = resolution

    def fit(self, X=None, y=None):
        """Validate parameters and evaluate the self-damping; ``X`` is ignored."""
        self.spec_ = LatticeSpec(self.dimension, self.symmetry, self.omega0, self.g)
        self.probes_ = ProbeConfig(self.omega, temperature=self.temperature,
                                   contact=Contact.gaussian(self.sigma))
        self.gamma11_ = self._profile(np.zeros((1, self.dimension))).gamma11
        self.n_features_in_ = self.dimension
        return self

    def _profile(self, r):
        if self.time is None:
            return crosstalk_long_time(self.spec_, self.probes_, r, self.method,
                                       self.resolution, lamb=False)
        return crosstalk_finite_time(self.spec_, self.probes_, self.time, r, self.resolution)

    def predict(self, X):
        """Normalized cross-talk at separations ``X`` of shape (n_samples, D)."""
        check_is_fitted(self, "spec_")
        X = check_array(X, dtype=float)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return self._profile(X).normalized


class CorrelationRegressor(RegressorMixin, BaseEstimator):
    """Normalized bath correlation ``C(R) / C(0)`` as a function of ``R``."""

    def __init__(self, dimension=1, symmetry="cubic", omega0=1.0, g=0.75, temperature=0.0,
                 resolution=None):
        self.dimension = dimension
        self.symmetry = symmetry
        self.omega0 = omega0
        self.g = g
        self.temperature = temperature
        self.resolution = resolution

    def fit(self, X=None, y=None):
        self.spec_ = LatticeSpec(self.dimension, self.symmetry, self.omega0, self.g)
        self.c0_ = correlation(self.spec_, np.zeros((1, self.dimension)), self.temperature,
                               self.resolution).c0
        self.n_features_in_ = self.dimension
        return self

    def predict(self, X):
        check_is_fitted(self, "spec_")
        X = check_array(X, dtype=float)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return correlation(self.spec_, X, self.temperature, self.resolution).values
