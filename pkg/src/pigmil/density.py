"""Kernel density of instances against the negative bags.

Three aggregations of ``exp(-gamma * ||x - x_ji||)`` over each negative bag
are averaged across negative bags and divided by ``z``:

* ``kde_min`` keeps the smallest kernel value of each bag,
* ``kde``     sums all kernel values of each bag,
* ``kde_max`` keeps the largest kernel value of each bag.
"""

from dataclasses import dataclass

import numpy as np

from .core import DataError, Dataset, pairwise_distances

VARIANTS = ("min", "plain", "max")


@dataclass(frozen=True)
class KdeParams:
    gamma: float = 1.0
    z: float = 1.0

    def __post_init__(self):
        if not (self.gamma > 0 and self.z > 0):
            raise ValueError("gamma and z must be positive")


class NegativeIndex:
    """Instances of the negative bags, stacked for vectorized evaluation."""

    def __init__(self, bags):
        bags = list(bags)
        if not bags:
            raise DataError("no negative bags")
        if any(b.label != -1 for b in bags):
            raise DataError("NegativeIndex accepts only bags labeled -1")
        self.bag_ids = [b.id for b in bags]
        self.X = np.vstack([b.instances for b in bags])
        sizes = np.array([len(b) for b in bags])
        self.offsets = np.concatenate([[0], np.cumsum(sizes)[:-1]])
        self.sizes = sizes

    @classmethod
    def from_dataset(cls, d: Dataset):
        return cls(d.negative_bags)

    @property
    def n_bags(self):
        return len(self.bag_ids)

    @property
    def n_instances(self):
        return self.X.shape[0]

    def distances(self, X):
        """``(n_queries, n_negative_instances)`` distance matrix."""
        return pairwise_distances(X, self.X)


def _density(X, neg, p, variant):
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
    X = np.atleast_2d(np.asarray(X, dtype=float))
    K = np.exp(-p.gamma * neg.distances(X))
    if variant == "min":
        per_bag = np.minimum.reduceat(K, neg.offsets, axis=1)
    elif variant == "max":
        per_bag = np.maximum.reduceat(K, neg.offsets, axis=1)
    else:
        per_bag = np.add.reduceat(K, neg.offsets, axis=1)
    return per_bag.sum(axis=1) / (p.z * neg.n_bags)


def density(X, neg: NegativeIndex, p: KdeParams = KdeParams(), variant="min"):
    """Vectorized density scores for the rows of ``X``."""
    return _density(X, neg, p, variant)


def kde_min(x, neg: NegativeIndex, p: KdeParams = KdeParams()) -> float:
    return float(_density(x, neg, p, "min")[0])


def kde(x, neg: NegativeIndex, p: KdeParams = KdeParams()) -> float:
    return float(_density(x, neg, p, "plain")[0])


def kde_max(x, neg: NegativeIndex, p: KdeParams = KdeParams()) -> float:
    return float(_density(x, neg, p, "max")[0])


def kde_tpi_baseline(variant, d: Dataset, p: KdeParams = KdeParams()):
    """Pick the lowest-density instance of every positive bag.

    Returns a list of ``(bag_id, instance_index)``.  ``np.argmin`` returns
    the first minimum, so ties go to the lowest index.
    """
    if not d.positive_bags:
        raise DataError("dataset has no positive bags")
    neg = NegativeIndex.from_dataset(d)
    picks = []
    for b in d.positive_bags:
        scores = _density(b.instances, neg, p, variant)
        picks.append((b.id, int(np.argmin(scores))))
    return picks
