"""scikit-learn compatible wrappers around the cut-off estimators.

The input ``y`` is the vector of observed coefficients ``(y^delta, u_j)``;
``transform`` returns the coefficients of the regularised solution in the
basis ``v_j``, padded with zeros to the length of ``y``.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_coefficients, check_index, check_positive
from .discrepancy import DpConfig, Heuristic, cutoff_estimate, modified_discrepancy
from .sequence_model import Observation
from .spectrum import Spectrum

__all__ = ["DiscrepancyCutoff", "SpectralCutoff"]


def _padded(est, n):
    out = np.zeros(n)
    out[: est.size] = est
    return out


class DiscrepancyCutoff(TransformerMixin, BaseEstimator):
    """Spectral cut-off with the truncation level picked from the data.

    Parameters
    ----------
    spectrum : Spectrum
        Singular values of the forward operator.
    delta : float
        Noise level of the observation.
    tau : float, default=1.5
        Discrepancy safety factor, must exceed 1.
    policy : FixedM, NormBound or Heuristic, default=None
        How far the discretisation level ``m`` is searched. ``None`` means
        ``Heuristic()``.

    Attributes
    ----------
    k_ : int
        Selected truncation level.
    result_ : DpResult
        Full search record including the ``(m, k(m))`` trace.
    coef_ : ndarray of shape (k_,)
        Estimated solution coefficients.
    """

    def __init__(self, spectrum=None, delta=None, tau=1.5, policy=None):
        self.spectrum = spectrum
        self.delta = delta
        self.tau = tau
        self.policy = policy

    def _config(self):
        return DpConfig(self.tau, self.policy if self.policy is not None else Heuristic())

    def fit(self, y, x=None):
        if not isinstance(self.spectrum, Spectrum):
            raise TypeError("spectrum must be a Spectrum instance")
        y = check_coefficients(y)
        obs = Observation(y, check_positive(self.delta, "delta"))
        self.result_ = modified_discrepancy(obs, self._config(), self.spectrum)
        self.k_ = self.result_.k_dp
        self.trace_ = self.result_.trace
        self.coef_ = cutoff_estimate(obs, self.spectrum, self.k_)
        self.n_coefficients_in_ = y.size
        return self

    def transform(self, y):
        check_is_fitted(self, "k_")
        y = check_coefficients(y)
        if y.size < self.k_:
            raise ValueError(f"need at least k_={self.k_} coefficients, got {y.size}")
        return _padded(cutoff_estimate(y, self.spectrum, self.k_), y.size)


class SpectralCutoff(TransformerMixin, BaseEstimator):
    """Spectral cut-off at a fixed truncation level ``k``."""

    def __init__(self, spectrum=None, k=1):
        self.spectrum = spectrum
        self.k = k

    def fit(self, y, x=None):
        if not isinstance(self.spectrum, Spectrum):
            raise TypeError("spectrum must be a Spectrum instance")
        y = check_coefficients(y)
        self.k_ = min(check_index(self.k, "k", minimum=0), y.size)
        self.coef_ = cutoff_estimate(y, self.spectrum, self.k_)
        self.n_coefficients_in_ = y.size
        return self

    def transform(self, y):
        check_is_fitted(self, "k_")
        y = check_coefficients(y)
        k = min(self.k_, y.size)
        return _padded(cutoff_estimate(y, self.spectrum, k), y.size)
