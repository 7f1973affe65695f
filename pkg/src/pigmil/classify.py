"""Bag embedding, the bag classifier and the end-to-end pipeline."""

import time
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .affinity import DiscParams
from .core import Bag, DataError, Dataset, Scaler, apply_scaler, as_dataset, fit_scaler, pairwise_distances
from .csdg import CandidateScorer, RankParams, UpdateParams, build, update_instances
from .density import KdeParams, NegativeIndex
from .selection import Pcp, WorkingBagSet, build_working_set, init_pcp, select_working_bags
from .svm import LinearModel, SolverConfig, fit_linear_svm

BagModel = LinearModel


@dataclass(frozen=True)
class PigmilConfig:
    """Every tunable of the pipeline, with the reference defaults."""

    kde_gamma: float = 1.0
    kde_z: float = 1.0
    ws_fraction: float = 0.4
    t_threshold: float = 1.5
    disc_z: float = 1.0
    gamma1: float = 1.0
    gamma2: float = 1.0
    disc_floor: float = -1e6
    gamma_q: float = 0.9
    damping: float = 0.8
    max_iter: int = 10
    normalization: str = "symmetric"
    max_updates: int = 20
    gamma_d: float = 1.0
    C: float = 1.0
    solver_max_iter: int = 100_000
    solver_tol: float = 1e-6
    standardize: bool = True
    alpha: float = None
    beta: float = None

    @property
    def kde(self):
        return KdeParams(self.kde_gamma, self.kde_z)

    @property
    def disc(self):
        return DiscParams(self.disc_z, self.gamma1, self.gamma2, self.disc_floor)

    @property
    def rank(self):
        return RankParams(self.damping, self.max_iter, self.normalization)

    @property
    def solver(self):
        return SolverConfig(self.C, self.solver_max_iter, self.solver_tol)

    def updated(self, **kw):
        return replace(self, **kw)

    def as_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class Prototypes:
    instances: np.ndarray
    gamma_d: float = 1.0

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.instances, dtype=float))
        if X.shape[0] < 1:
            raise DataError("need at least one prototype")
        if not self.gamma_d > 0:
            raise ValueError("gamma_d must be positive")
        object.__setattr__(self, "instances", X)

    @property
    def M(self):
        return self.instances.shape[0]


def embed(bag, proto: Prototypes):
    """``z_i = max over instances of exp(-gamma_d * ||x - proto_i||^2)``.

    The norm is squared here, unlike the unsquared norms of the density and
    discrimination scores.
    """
    X = bag.instances if isinstance(bag, Bag) else np.atleast_2d(np.asarray(bag, dtype=float))
    if X.shape[1] != proto.instances.shape[1]:
        raise DataError(f"bag has dim {X.shape[1]}, prototypes have dim {proto.instances.shape[1]}")
    D2 = pairwise_distances(X, proto.instances) ** 2
    # exp of the smallest distance equals the max of the exps
    return np.exp(-proto.gamma_d * D2.min(axis=0))


def embed_all(bags, proto: Prototypes):
    return np.array([embed(b, proto) for b in bags])


def train_bag_classifier(embedded, labels=None, solver_cfg: SolverConfig = SolverConfig()) -> BagModel:
    """Linear SVM on embedded bags.

    Accepts either ``(Z, labels)`` or a list of ``(z, label)`` pairs.
    """
    if labels is None:
        Z = np.array([z for z, _ in embedded], dtype=float)
        labels = np.array([l for _, l in embedded])
    else:
        Z = np.asarray(embedded, dtype=float)
        labels = np.asarray(labels)
    if np.unique(labels).size < 2:
        raise DataError("bag classifier needs both classes")
    return fit_linear_svm(Z, labels, cfg=solver_cfg)


def predict(model: BagModel, z):
    z = np.asarray(z, dtype=float)
    single = z.ndim == 1
    Z = np.atleast_2d(z)
    if Z.shape[1] != model.weights.shape[0]:
        raise DataError(f"embedding has length {Z.shape[1]}, model expects {model.weights.shape[0]}")
    out = np.where(Z @ model.weights + model.bias >= 0, 1, -1)
    return int(out[0]) if single else out


@dataclass
class Detection:
    pcp: Pcp
    initial_pcp: Pcp
    working_sets: dict
    t_values: dict
    working_bags: tuple
    graph: object
    initial_graph: object
    trace: object
    timings: dict = field(default_factory=dict)

    def instances(self, d: Dataset):
        return np.array([d.bag(b).instances[k] for b, k in self.pcp])


def detect(d: Dataset, cfg: PigmilConfig = PigmilConfig(), seed=0) -> Detection:
    """Initialization and pool updating on an already standardized dataset.

    Ground-truth instance labels, when present, are never read.
    """
    d.check_trainable()
    t0 = time.perf_counter()
    neg = NegativeIndex.from_dataset(d)
    ws_list = [build_working_set(b, neg, cfg.ws_fraction, cfg.kde) for b in d.positive_bags]
    if len(ws_list) >= 2:
        wb = select_working_bags(ws_list, cfg.t_threshold)
    else:
        # the t-test needs two bags; a lone positive bag is kept as is
        wb = WorkingBagSet((ws_list[0].bag_id,), {ws_list[0].bag_id: 0.0})
    pcp0 = init_pcp(wb, ws_list)
    t1 = time.perf_counter()

    kept = set(wb.bag_ids)
    universe = [(w.bag_id, k) for w in ws_list if w.bag_id in kept for k in w.member_indices]
    X = np.array([d.bag(b).instances[k] for b, k in universe])
    scorer = CandidateScorer(X, universe, neg, cfg.disc, cfg.solver, cfg.gamma_q)
    g0 = build(pcp0, scorer, cfg.alpha, cfg.beta)
    working_sets = {w.bag_id: w.member_indices for w in ws_list if w.bag_id in kept}
    g, trace = update_instances(g0, working_sets, scorer, UpdateParams(cfg.max_updates, seed), cfg.rank)
    t2 = time.perf_counter()
    return Detection(
        pcp=Pcp(g.vertices),
        initial_pcp=pcp0,
        working_sets={w.bag_id: w for w in ws_list},
        t_values=wb.t_values,
        working_bags=wb.bag_ids,
        graph=g,
        initial_graph=g0,
        trace=trace,
        timings={"init": t1 - t0, "update": t2 - t1},
    )


def run_pigmil(train: Dataset, test: Dataset, cfg: PigmilConfig = PigmilConfig(), seed=0):
    """Initialization, pool updating and bag classification in order.

    Returns ``(test_labels, detected_pcp, diagnostics)``.
    """
    train.check_trainable()
    scaler = fit_scaler(train) if cfg.standardize else None
    tr = apply_scaler(scaler, train) if scaler else train
    te = apply_scaler(scaler, test) if scaler else test
    det = detect(tr, cfg, seed)
    proto = Prototypes(det.instances(tr), cfg.gamma_d)
    model = train_bag_classifier(embed_all(tr.bags, proto), tr.labels, cfg.solver)
    labels = predict(model, embed_all(te.bags, proto))
    diagnostics = {
        "detection": det,
        "scaler": scaler,
        "prototypes": proto,
        "model": model,
        "objective": list(det.trace.objective),
    }
    return labels, det.pcp, diagnostics


class PIGMIL(BaseEstimator, ClassifierMixin, TransformerMixin):
    """Multiple-instance classifier built on detected true positive instances.

    ``fit(bags, y)`` takes a list of ``(n_i, dim)`` arrays and bag labels
    (any two values; the larger is the positive class).  After fitting,
    ``pcp_`` holds the detected ``(bag_index, instance_index)`` pairs,
    ``transform`` returns the bag embeddings and ``predict`` bag labels.
    """

    def __init__(self, ws_fraction=0.4, t_threshold=1.5, kde_gamma=1.0, kde_z=1.0, disc_z=1.0,
                 gamma1=1.0, gamma2=1.0, gamma_q=0.9, damping=0.8, max_iter=10, normalization="symmetric",
                 max_updates=20, gamma_d=1.0, C=1.0, standardize=True, alpha=None, beta=None, random_state=0):
        self.ws_fraction = ws_fraction
        self.t_threshold = t_threshold
        self.kde_gamma = kde_gamma
        self.kde_z = kde_z
        self.disc_z = disc_z
        self.gamma1 = gamma1
        self.gamma2 = gamma2
        self.gamma_q = gamma_q
        self.damping = damping
        self.max_iter = max_iter
        self.normalization = normalization
        self.max_updates = max_updates
        self.gamma_d = gamma_d
        self.C = C
        self.standardize = standardize
        self.alpha = alpha
        self.beta = beta
        self.random_state = random_state

    def _config(self):
        params = self.get_params()
        params.pop("random_state")
        return PigmilConfig(**params)

    def fit(self, bags, y):
        y = np.asarray(y).ravel()
        self.classes_ = np.unique(y)
        if self.classes_.size != 2:
            raise ValueError(f"PIGMIL needs exactly two bag classes, got {self.classes_.size}")
        d = as_dataset(bags, np.where(y == self.classes_[1], 1, -1))
        cfg = self._config()
        self.scaler_ = fit_scaler(d) if cfg.standardize else None
        ds = apply_scaler(self.scaler_, d) if self.scaler_ else d
        self.detection_ = detect(ds, cfg, self.random_state or 0)
        self.pcp_ = list(self.detection_.pcp)
        self.prototypes_ = Prototypes(self.detection_.instances(ds), cfg.gamma_d)
        self.model_ = train_bag_classifier(embed_all(ds.bags, self.prototypes_), ds.labels, cfg.solver)
        self.n_features_in_ = d.dim
        return self

    def _scaled(self, bags):
        d = as_dataset(bags)
        if d.dim != self.n_features_in_:
            raise DataError(f"expected {self.n_features_in_} features, got {d.dim}")
        return apply_scaler(self.scaler_, d) if self.scaler_ else d

    def transform(self, bags):
        check_is_fitted(self, "model_")
        return embed_all(self._scaled(bags).bags, self.prototypes_)

    def decision_function(self, bags):
        return self.model_.decision_function(self.transform(bags))

    def predict(self, bags):
        signs = predict(self.model_, self.transform(bags))
        return np.where(signs == 1, self.classes_[1], self.classes_[0])


def dump_model(fh, model: BagModel, proto: Prototypes, scaler: Scaler = None):
    """Plain-text model: one ``key values...`` line each, floats in ``repr``."""
    def row(key, values):
        fh.write(key + " " + " ".join(repr(float(v)) for v in values) + "\n")

    fh.write("# pigmil bag model v1\n")
    row("gamma_d", [proto.gamma_d])
    row("bias", [model.bias])
    row("weights", model.weights)
    if scaler is not None:
        row("scaler_mean", scaler.mean)
        row("scaler_std", scaler.std)
    for p in proto.instances:
        row("prototype", p)


def load_model(fh):
    """Inverse of :func:`dump_model`: returns ``(model, prototypes, scaler_or_None)``."""
    fields = {"prototype": []}
    for line in fh:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, *vals = line.split()
        vals = np.array([float(v) for v in vals])
        if key == "prototype":
            fields["prototype"].append(vals)
        else:
            fields[key] = vals
    try:
        model = BagModel(fields["weights"], float(fields["bias"][0]))
        proto = Prototypes(np.array(fields["prototype"]), float(fields["gamma_d"][0]))
    except (KeyError, IndexError, ValueError) as exc:
        raise DataError(f"malformed model file: {exc}") from None
    scaler = Scaler(fields["scaler_mean"], fields["scaler_std"]) if "scaler_mean" in fields else None
    return model, proto, scaler
