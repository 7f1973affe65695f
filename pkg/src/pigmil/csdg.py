"""Candidate graph over the pool, random-walk ranking and instance updating.

Vertices are the pool instances.  Two vertices are joined when their
similarity is positive; the edge weight is::

    max(0, S + alpha * C + beta * min(D_i, D_j))

Vertices are ranked by a personalized random walk whose restart vector is
the exemplar self-confidence.  The updating loop swaps the lowest-ranked
vertex for another member of its bag's working set whenever that raises the
sum of rank scores.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .affinity import ConfidenceTable, DiscParams, discrimination_many
from .cliques import consistency_matrix
from .core import DataError
from .density import NegativeIndex
from .svm import SolverConfig

NORMALIZATIONS = ("symmetric", "column")
# objective gains below this are float noise, not improvements
_IMPROVE_RTOL = 1e-12


@dataclass(frozen=True)
class RankParams:
    damping: float = 0.8
    max_iter: int = 10
    normalization: str = "symmetric"

    def __post_init__(self):
        if not 0 <= self.damping < 1:
            raise ValueError("damping must lie in [0, 1)")
        if self.max_iter < 1:
            raise ValueError("max_iter must be positive")
        if self.normalization not in NORMALIZATIONS:
            raise ValueError(f"normalization must be one of {NORMALIZATIONS}")


@dataclass(frozen=True)
class UpdateParams:
    max_updates: int = 20
    seed: int = 0


@dataclass(frozen=True)
class Csdg:
    vertices: tuple
    W: np.ndarray
    alpha: float
    beta: float
    S: np.ndarray = field(default=None, repr=False)
    C: np.ndarray = field(default=None, repr=False)
    D: np.ndarray = field(default=None, repr=False)

    @property
    def M(self):
        return len(self.vertices)

    def edges(self):
        iu, ju = np.nonzero(np.triu(self.W > 0, 1))
        return [(int(i), int(j), float(self.W[i, j])) for i, j in zip(iu, ju)]

    def dump(self, fh):
        """Write the vertex table then one ``i j weight`` line per edge."""
        fh.write(f"# vertices {self.M}: v index bag_id instance_index\n")
        for k, (bag_id, inst) in enumerate(self.vertices):
            fh.write(f"v {k} {bag_id} {inst}\n")
        fh.write(f"# edges alpha={self.alpha!r} beta={self.beta!r}\n")
        for i, j, w in self.edges():
            fh.write(f"{i} {j} {w!r}\n")


@dataclass(frozen=True)
class RankVector:
    scores: np.ndarray
    history: tuple = ()

    def order(self):
        """Vertex indices by increasing score, ties by index."""
        return np.lexsort((np.arange(self.scores.size), self.scores))


def balance_factors(S_mean, C_mean, D_mean):
    """``alpha = max(10, ln(C/S))``, ``beta = max(10, ln((alpha S + C) / |D|))``.

    Any undefined or non-finite logarithm collapses to 10.
    """
    def _log_or_floor(num, den):
        if not (den > 0 and num > 0) or not math.isfinite(num / den):
            return 10.0
        return max(10.0, math.log(num / den))

    alpha = _log_or_floor(C_mean, S_mean)
    if not S_mean > 0:
        return 10.0, 10.0
    beta = _log_or_floor(alpha * S_mean + C_mean, abs(D_mean))
    return alpha, beta


def edge_weights(S, C, D, alpha, beta):
    S = np.asarray(S, dtype=float)
    D = np.asarray(D, dtype=float)
    pair_d = np.minimum(D[:, None], D[None, :])
    W = np.maximum(0.0, S + alpha * np.asarray(C, dtype=float) + beta * pair_d)
    W[S <= 0] = 0.0
    np.fill_diagonal(W, 0.0)
    return W


def build_from_components(vertices, S, C, D, alpha, beta) -> Csdg:
    S = np.asarray(S, dtype=float)
    C = np.asarray(C, dtype=float)
    D = np.asarray(D, dtype=float)
    return Csdg(tuple(vertices), edge_weights(S, C, D, alpha, beta), alpha, beta, S, C, D)


def normalize(W, mode="symmetric"):
    W = np.asarray(W, dtype=float)
    M = W.shape[0]
    if mode == "column":
        col = W.sum(axis=0)
        E = np.divide(W, col, out=np.zeros_like(W), where=col > 0)
        E[:, col <= 0] = 1.0 / M
        return E
    if mode == "symmetric":
        deg = W.sum(axis=0)
        inv = np.zeros(M)
        inv[deg > 0] = 1.0 / np.sqrt(deg[deg > 0])
        return inv[:, None] * W * inv[None, :]
    raise ValueError(f"unknown normalization {mode!r}")


def personalization(conf_diag):
    p = np.maximum(np.asarray(conf_diag, dtype=float), 0.0)
    total = p.sum()
    if total <= 0:
        return np.full(p.size, 1.0 / p.size)
    return p / total


def initial_ranks(M, seed):
    r0 = np.random.default_rng(seed).uniform(0.0, 1.0, M)
    return r0 / r0.sum()


def rank(g, conf_diag, p: RankParams = RankParams(), seed=0, r0=None, keep_history=False) -> RankVector:
    """Run ``R <- (1 - d) * restart + d * E @ R`` exactly ``p.max_iter`` times.

    ``g`` is a :class:`Csdg` or a raw weight matrix.  ``R0`` is drawn
    uniformly from ``seed`` and scaled to sum 1 unless given.
    """
    W = g.W if isinstance(g, Csdg) else np.asarray(g, dtype=float)
    M = W.shape[0]
    if M == 0:
        raise DataError("cannot rank an empty graph")
    conf_diag = np.asarray(conf_diag, dtype=float)
    if conf_diag.shape != (M,):
        raise ValueError(f"need {M} self-confidence values, got {conf_diag.shape}")
    E = normalize(W, p.normalization)
    v = personalization(conf_diag)
    R = initial_ranks(M, seed) if r0 is None else np.asarray(r0, dtype=float).copy()
    history = [R.copy()] if keep_history else []
    for _ in range(p.max_iter):
        R = (1.0 - p.damping) * v + p.damping * (E @ R)
        if keep_history:
            history.append(R.copy())
    return RankVector(R, tuple(history))


def total_score(g, conf_diag, p: RankParams = RankParams(), seed=0, r0=None) -> float:
    return float(rank(g, conf_diag, p, seed, r0).scores.sum())


class CandidateScorer:
    """Similarity, consistency and discrimination over a fixed candidate universe.

    The universe is every working-set instance of every working bag.
    Similarity ranks and discrimination depend only on the universe, so they
    are computed once; consistency is recomputed for each vertex set.
    """

    def __init__(self, X, universe, neg: NegativeIndex, disc: DiscParams = DiscParams(),
                 solver_cfg: SolverConfig = SolverConfig(), gamma_q=0.9, table: ConfidenceTable = None):
        self.X = np.asarray(X, dtype=float)
        self.universe = list(universe)
        self.index = {ref: k for k, ref in enumerate(self.universe)}
        self.table = table if table is not None else ConfidenceTable.build(self.X, self.universe, neg, solver_cfg)
        self.S = self.table.similarity_matrix()
        self.D = discrimination_many(self.X, neg, disc)
        self.self_conf = self.table.self_confidence
        self.gamma_q = gamma_q

    def components(self, idx):
        idx = np.asarray(idx, dtype=int)
        S = self.S[np.ix_(idx, idx)]
        C = consistency_matrix(S > 0, self.gamma_q)
        return S, C, self.D[idx]

    def build(self, idx, alpha, beta) -> Csdg:
        S, C, D = self.components(idx)
        return build_from_components([self.universe[k] for k in idx], S, C, D, alpha, beta)

    def balance(self, idx):
        S, C, D = self.components(idx)
        iu = np.triu_indices(len(idx), 1)
        on = S[iu] > 0
        if not on.any():
            return 10.0, 10.0
        pair_d = np.minimum(D[:, None], D[None, :])[iu][on]
        return balance_factors(S[iu][on].mean(), C[iu][on].mean(), np.abs(pair_d).mean())

    def confidences(self, idx):
        return self.self_conf[np.asarray(idx, dtype=int)]


def build(pcp, scorer: CandidateScorer, alpha=None, beta=None) -> Csdg:
    """Graph over the pool entries; balance factors default to the pool's own."""
    idx = [scorer.index[ref] for ref in pcp]
    if alpha is None or beta is None:
        a, b = scorer.balance(idx)
        alpha = a if alpha is None else alpha
        beta = b if beta is None else beta
    return scorer.build(idx, alpha, beta)


@dataclass
class UpdateTrace:
    objective: list = field(default_factory=list)
    swaps: list = field(default_factory=list)
    ranks: list = field(default_factory=list)
    trials: int = 0


def update_instances(g: Csdg, working_sets, scorer: CandidateScorer, p: UpdateParams = UpdateParams(),
                     rp: RankParams = RankParams()):
    """Instance updating: repeatedly replace low-ranked vertices.

    ``working_sets`` maps a bag id to the instance indices of its working
    set.  The cursor starts at the lowest-ranked vertex.  Each member of the
    cursor's working set is tried in its place; the best strict improvement
    of the total rank score is committed and the cursor jumps to the
    lowest-ranked vertex (the second lowest if that is the new instance).
    Without an improvement the cursor moves one place up the rank order and
    the loop ends once it passes the top.  At most ``p.max_updates`` swaps
    are committed.

    Returns the updated graph and an :class:`UpdateTrace`.
    """
    idx = [scorer.index[v] for v in g.vertices]
    M = len(idx)
    for bag_id, _ in g.vertices:
        if not working_sets.get(bag_id):
            raise DataError(f"bag {bag_id!r} has an empty working set")
    alpha, beta = g.alpha, g.beta
    trace = UpdateTrace()

    def score(vertex_idx):
        graph = scorer.build(vertex_idx, alpha, beta)
        rv = rank(graph, scorer.confidences(vertex_idx), rp, p.seed)
        return graph, rv

    graph, rv = score(idx)
    current = float(rv.scores.sum())
    trace.objective.append(current)
    trace.ranks.append(rv.scores.copy())
    if p.max_updates <= 0:
        return g, trace
    cursor = int(rv.order()[0])
    n_update = 0
    while n_update < p.max_updates:
        bag_id = graph.vertices[cursor][0]
        best = None
        for k in working_sets[bag_id]:
            cand = scorer.index[(bag_id, int(k))]
            if cand == idx[cursor]:
                continue
            trial = idx.copy()
            trial[cursor] = cand
            t_graph, t_rv = score(trial)
            trace.trials += 1
            s = float(t_rv.scores.sum())
            if s > current + _IMPROVE_RTOL * max(1.0, abs(current)) and (best is None or s > best[0]):
                best = (s, trial, t_graph, t_rv)
        if best is None:
            order = rv.order().tolist()
            pos = order.index(cursor)
            if pos == M - 1:
                break
            cursor = order[pos + 1]
            continue
        s, trial, graph, rv = best
        trace.swaps.append({"vertex": cursor, "old": scorer.universe[idx[cursor]],
                            "new": scorer.universe[trial[cursor]], "before": current, "after": s})
        idx, current = trial, s
        trace.objective.append(current)
        trace.ranks.append(rv.scores.copy())
        n_update += 1
        order = rv.order().tolist()
        if order[0] == cursor:
            if M < 2:
                break
            cursor = order[1]
        else:
            cursor = order[0]
    return (graph if trace.swaps else g), trace
