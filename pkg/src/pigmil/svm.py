"""Soft-margin linear SVM used for exemplar models and the bag classifier."""

import warnings
from dataclasses import dataclass

import numpy as np
from sklearn.exceptions import ConvergenceWarning
from sklearn.svm import SVC


class SolverError(RuntimeError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True)
class SolverConfig:
    C: float = 1.0
    max_iter: int = 100_000
    tol: float = 1e-6


@dataclass(frozen=True)
class LinearModel:
    weights: np.ndarray
    bias: float

    def decision_function(self, X):
        return np.atleast_2d(np.asarray(X, dtype=float)) @ self.weights + self.bias


def fit_linear_svm(X, y, sample_weight=None, cfg: SolverConfig = SolverConfig()) -> LinearModel:
    """Hinge-loss soft-margin SVM with an unregularized bias.

    Deterministic: libsvm's SMO has no randomness outside probability
    calibration, which is not used.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    if np.unique(y).size < 2:
        raise ValueError("both classes are needed to train a linear SVM")
    clf = SVC(kernel="linear", C=cfg.C, tol=cfg.tol, max_iter=cfg.max_iter, shrinking=True)
    with warnings.catch_warnings():
        warnings.simplefilter("error", ConvergenceWarning)
        try:
            clf.fit(X, y, sample_weight=sample_weight)
        except ConvergenceWarning as exc:
            raise SolverError(f"linear SVM hit the {cfg.max_iter} iteration cap", residual=str(exc)) from None
    # positive decision values map to classes_[1], the larger label
    return LinearModel(clf.coef_.ravel().copy(), float(clf.intercept_[0]))
