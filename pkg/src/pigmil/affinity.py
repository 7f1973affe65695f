"""Pairwise similarity, quasi-clique consistency and robust discrimination."""

from dataclasses import dataclass

import numpy as np

from .cliques import consistency, consistency_matrix  # noqa: F401  (re-exported)
from .core import DataError
from .density import NegativeIndex
from .svm import LinearModel, SolverConfig, fit_linear_svm

ExemplarModel = LinearModel


@dataclass(frozen=True)
class DiscParams:
    z: float = 1.0
    gamma1: float = 1.0
    gamma2: float = 1.0
    floor: float = -1e6


def train_exemplar(x_i, neg: NegativeIndex, solver_cfg: SolverConfig = SolverConfig()) -> ExemplarModel:
    """Linear SVM separating ``x_i`` from every negative instance.

    ``x_i`` is replicated to match the negative count.  Identical copies
    contribute identical hinge terms, so the replicas are passed as a single
    sample whose weight equals the copy count.
    """
    if neg.n_instances == 0:
        raise DataError("no negative instances")
    x_i = np.asarray(x_i, dtype=float).reshape(1, -1)
    X = np.vstack([x_i, neg.X])
    y = np.r_[1, -np.ones(neg.n_instances, dtype=int)]
    w = np.r_[float(neg.n_instances), np.ones(neg.n_instances)]
    return fit_linear_svm(X, y, sample_weight=w, cfg=solver_cfg)


class ConfidenceTable:
    """``conf[i, j]``: decision value of exemplar ``i`` on instance ``j``.

    ``universe`` lists the instance references the rows/columns stand for.
    """

    def __init__(self, conf, universe):
        conf = np.asarray(conf, dtype=float)
        if conf.shape != (len(universe), len(universe)):
            raise ValueError("confidence table must be square over the universe")
        self.conf = conf
        self.universe = list(universe)
        self.index = {ref: k for k, ref in enumerate(self.universe)}
        self._phi = _rank_positive(conf)

    @classmethod
    def build(cls, X, universe, neg: NegativeIndex, solver_cfg: SolverConfig = SolverConfig()):
        X = np.asarray(X, dtype=float)
        models = [train_exemplar(x, neg, solver_cfg) for x in X]
        W = np.array([m.weights for m in models])
        b = np.array([m.bias for m in models])
        table = cls(W @ X.T + b[:, None], universe)
        table.models = models
        return table

    @property
    def self_confidence(self):
        return np.diag(self.conf).copy()

    def phi(self, i, j):
        """1-based rank of instance ``j`` under exemplar ``i``; 0 if not positive."""
        return int(self._phi[i, j])

    def similarity_matrix(self):
        """``S[i, j] = 1 / (phi(j|i) * phi(i|j))`` where both confidences are positive."""
        P = self._phi
        both = (P > 0) & (P.T > 0)
        S = np.zeros(P.shape)
        S[both] = 1.0 / (P[both] * P.T[both])
        np.fill_diagonal(S, 0.0)
        return S


def _rank_positive(conf):
    """Competition rank (1 = largest) among the positive off-diagonal entries of each row."""
    n = conf.shape[0]
    ranks = np.zeros((n, n), dtype=int)
    for i in range(n):
        row = conf[i].copy()
        row[i] = -np.inf
        pos = row > 0
        vals = row[pos]
        # rank = 1 + number of strictly larger positive entries
        ranks[i, pos] = 1 + (vals[None, :] > vals[:, None]).sum(axis=1)
    return ranks


def similarity(i, j, table: ConfidenceTable) -> float:
    if i == j:
        raise ValueError("similarity needs two distinct instances")
    a, b = table.phi(i, j), table.phi(j, i)
    if a == 0 or b == 0:
        return 0.0
    return 1.0 / (a * b)


def d_delta(delta, p: DiscParams = DiscParams()):
    """Piecewise influence of one negative instance at distance ``delta``.

    ``-exp(-gamma1 (delta - 1))`` for delta >= 1, ``gamma2 ln(delta) - 1``
    below 1, and ``p.floor`` at exactly 0.
    """
    delta = np.asarray(delta, dtype=float)
    out = np.empty_like(delta)
    far = delta >= 1
    near = (delta > 0) & ~far
    out[far] = -np.exp(-p.gamma1 * (delta[far] - 1.0))
    out[near] = p.gamma2 * np.log(delta[near]) - 1.0
    out[delta <= 0] = p.floor
    return out


def discrimination_many(X, neg: NegativeIndex, p: DiscParams = DiscParams()):
    if neg.n_instances == 0:
        raise DataError("no negative instances")
    return d_delta(neg.distances(X), p).sum(axis=1) / (p.z * neg.n_instances)


def discrimination(x, neg: NegativeIndex, p: DiscParams = DiscParams()) -> float:
    return float(discrimination_many(np.atleast_2d(x), neg, p)[0])
