"""Repeated cross-validation, TPI evaluation and sensitivity sweeps."""

import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np
from sklearn.model_selection import KFold, StratifiedKFold

from ..classify import PigmilConfig, detect, run_pigmil
from ..core import DataError, Dataset, apply_scaler, fit_scaler
from ..density import kde_tpi_baseline
from .synth import inject_noise, tpi_accuracy

METHODS = ("pigmil", "kde-min", "kde", "kde-max")
_KDE_VARIANT = {"kde-min": "min", "kde": "plain", "kde-max": "max"}


def standardized(d: Dataset, cfg: PigmilConfig):
    return apply_scaler(fit_scaler(d), d) if cfg.standardize else d


def detect_tpis(d: Dataset, method="pigmil", cfg: PigmilConfig = PigmilConfig(), seed=0):
    """Detected ``(bag_id, instance_index)`` pairs on the whole dataset."""
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}")
    ds = standardized(d.without_truth(), cfg)
    if method == "pigmil":
        return list(detect(ds, cfg, seed).pcp)
    return kde_tpi_baseline(_KDE_VARIANT[method], ds, cfg.kde)


def tpi_score(d: Dataset, method="pigmil", cfg: PigmilConfig = PigmilConfig(), seed=0):
    return tpi_accuracy(detect_tpis(d, method, cfg, seed), d)


@dataclass
class ExperimentReport:
    folds: list
    config: dict
    seed: int
    n_folds: int
    n_repeats: int
    seconds: float = 0.0
    accuracy_mean: float = field(init=False)
    accuracy_std: float = field(init=False)
    tpi_mean: float = field(init=False)

    def __post_init__(self):
        self.recompute()

    def recompute(self):
        acc = np.array([f["accuracy"] for f in self.folds], dtype=float)
        self.accuracy_mean = float(acc.mean()) if acc.size else math.nan
        self.accuracy_std = float(acc.std()) if acc.size else math.nan
        tpi = [f["tpi_accuracy"] for f in self.folds if f.get("tpi_accuracy") is not None]
        self.tpi_mean = float(np.mean(tpi)) if tpi else None
        return self

    def to_dict(self):
        return asdict(self)


def _splits(labels, folds, rng_seed):
    counts = np.bincount((labels > 0).astype(int), minlength=2)
    if folds < 2 or folds > labels.size:
        raise DataError(f"cannot make {folds} folds from {labels.size} bags")
    if counts.min() >= folds:
        cv = StratifiedKFold(folds, shuffle=True, random_state=rng_seed)
        return list(cv.split(np.zeros(labels.size), labels))
    # too few bags per class to stratify, e.g. leave-one-bag-out
    cv = KFold(folds, shuffle=True, random_state=rng_seed)
    return list(cv.split(np.zeros(labels.size)))


def _pigmil_fit_predict(train, test, cfg, seed):
    labels, pcp, _ = run_pigmil(train, test, cfg, seed)
    return labels, pcp


def cross_validate(d: Dataset, folds=10, repeats=5, cfg: PigmilConfig = PigmilConfig(), seed=0,
                   fit_predict=None) -> ExperimentReport:
    """Bag-level ``repeats x folds`` cross-validation.

    Folds are stratified by bag label whenever every class has at least
    ``folds`` bags.  Scaling is fit inside ``fit_predict`` on the training
    fold only.  ``fit_predict(train, test, cfg, seed)`` returns
    ``(test_labels, pcp_or_None)``; the default runs the full pipeline.
    """
    fit_predict = fit_predict or _pigmil_fit_predict
    labels = d.labels
    blind = d.without_truth()
    rows = []
    t_start = time.perf_counter()
    for r in range(repeats):
        for k, (tr_idx, te_idx) in enumerate(_splits(labels, folds, seed + r)):
            t0 = time.perf_counter()
            train, test = blind.subset(tr_idx), blind.subset(te_idx)
            pred, pcp = fit_predict(train, test, cfg, seed + r)
            pred = np.asarray(pred)
            tpi = tpi_accuracy(pcp, d) if (pcp and d.has_truth) else None
            rows.append({
                "repeat": r,
                "fold": k,
                "n_train": int(len(tr_idx)),
                "n_test": int(len(te_idx)),
                "accuracy": float(100.0 * np.mean(pred == labels[te_idx])),
                "tpi_accuracy": tpi,
                "seconds": time.perf_counter() - t0,
            })
    return ExperimentReport(rows, cfg.as_dict(), seed, folds, repeats, time.perf_counter() - t_start)


def sweep_noise(d: Dataset, levels=(0, 1, 2, 3, 4, 5), cfg: PigmilConfig = PigmilConfig(), seed=0):
    """TPI accuracy per noise level, measured against the flipped labels.

    Heavy noise can turn every negative bag positive; detection is then
    impossible and the row's accuracy is ``None``.
    """
    rows = []
    for level in levels:
        noisy = inject_noise(d, level, seed)
        n_neg = len(noisy.negative_bags)
        acc = tpi_score(noisy, "pigmil", cfg, seed) if n_neg and noisy.positive_bags else None
        rows.append({"level": level, "negative_bags": n_neg, "tpi_accuracy": acc})
    return rows


def sweep_ws_size(d: Dataset, fractions=(0.2, 0.4, 0.6, 0.8), cfg: PigmilConfig = PigmilConfig(), seed=0):
    return [{"fraction": f, "tpi_accuracy": tpi_score(d, "pigmil", cfg.updated(ws_fraction=f), seed)}
            for f in fractions]


def edge_magnitudes(d: Dataset, cfg: PigmilConfig = PigmilConfig(), seed=0):
    """Mean ``S + alpha C`` and mean ``|min(D_i, D_j)|`` over the initial graph's edges."""
    det = detect(standardized(d.without_truth(), cfg), cfg.updated(max_updates=0), seed)
    g = det.initial_graph
    iu = np.triu_indices(g.M, 1)
    on = g.S[iu] > 0
    if not on.any():
        return None
    pair_d = np.minimum(g.D[:, None], g.D[None, :])[iu][on]
    return float((g.S[iu][on] + g.alpha * g.C[iu][on]).mean()), float(np.abs(pair_d).mean()), g.alpha, g.beta


def beta_for_ratio(ratio, sc_mean, d_mean):
    """``beta`` putting ``beta * |D|`` at ``ratio`` times the decimal order of ``S + alpha C``."""
    return 10.0 ** (ratio * math.log10(sc_mean)) / d_mean


def ratio_for_beta(beta, sc_mean, d_mean):
    return math.log10(beta * d_mean) / math.log10(sc_mean)


def sweep_d_ratio(d: Dataset, ratios=(0.0, 0.5, 1.0, 1.5, 2.0), cfg: PigmilConfig = PigmilConfig(), seed=0):
    mags = edge_magnitudes(d, cfg, seed)
    rows = []
    for r in ratios:
        if mags is None:
            beta = None
        else:
            beta = beta_for_ratio(r, mags[0], mags[1])
        acc = tpi_score(d, "pigmil", cfg.updated(beta=beta), seed)
        rows.append({"ratio": r, "beta": beta, "tpi_accuracy": acc})
    return rows
