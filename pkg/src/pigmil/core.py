"""Bags, datasets, feature standardization and the shared distance."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Hashable, Optional, Sequence

import numpy as np
from scipy.spatial.distance import cdist

_STD_FLOOR = 1e-12


class DataError(ValueError):
    """Malformed bags or datasets."""


@dataclass(frozen=True)
class Bag:
    """A labeled set of instances.

    ``instances`` is an ``(n, dim)`` float array.  ``truth`` carries the
    per-instance labels of synthetic data; learners never read it.
    """

    id: Hashable
    instances: np.ndarray
    label: int
    truth: Optional[np.ndarray] = None

    def __post_init__(self):
        X = np.array(self.instances, dtype=float, copy=True)
        if X.ndim == 1:
            X = X.reshape(1, -1)
        if X.ndim != 2 or X.shape[0] == 0:
            raise DataError(f"bag {self.id!r}: instances must be a non-empty 2-D array")
        if not np.all(np.isfinite(X)):
            raise DataError(f"bag {self.id!r}: non-finite feature values")
        if self.label not in (1, -1):
            raise DataError(f"bag {self.id!r}: label must be +1 or -1, got {self.label!r}")
        X.setflags(write=False)
        object.__setattr__(self, "instances", X)
        object.__setattr__(self, "label", int(self.label))
        if self.truth is not None:
            t = np.array(self.truth, dtype=int, copy=True).ravel()
            if t.shape[0] != X.shape[0]:
                raise DataError(f"bag {self.id!r}: truth has {t.shape[0]} entries for {X.shape[0]} instances")
            if not np.all(np.isin(t, (1, -1))):
                raise DataError(f"bag {self.id!r}: truth entries must be +1 or -1")
            if self.label == -1 and np.any(t == 1):
                raise DataError(f"bag {self.id!r}: negative bag holds a truth-positive instance")
            t.setflags(write=False)
            object.__setattr__(self, "truth", t)

    def __len__(self):
        return self.instances.shape[0]

    @property
    def dim(self):
        return self.instances.shape[1]


@dataclass(frozen=True)
class Dataset:
    bags: tuple
    dim: int = field(default=0)

    def __post_init__(self):
        bags = tuple(self.bags)
        if not bags:
            raise DataError("dataset has no bags")
        dim = self.dim or bags[0].dim
        for b in bags:
            if b.dim != dim:
                raise DataError(f"bag {b.id!r} has dim {b.dim}, expected {dim}")
        ids = [b.id for b in bags]
        if len(set(ids)) != len(ids):
            raise DataError("bag ids must be unique")
        object.__setattr__(self, "bags", bags)
        object.__setattr__(self, "dim", int(dim))

    def __len__(self):
        return len(self.bags)

    def __iter__(self):
        return iter(self.bags)

    @property
    def labels(self):
        return np.array([b.label for b in self.bags], dtype=int)

    @property
    def positive_bags(self):
        return [b for b in self.bags if b.label == 1]

    @property
    def negative_bags(self):
        return [b for b in self.bags if b.label == -1]

    @property
    def has_truth(self):
        return all(b.truth is not None for b in self.bags)

    def bag(self, bag_id):
        for b in self.bags:
            if b.id == bag_id:
                return b
        raise KeyError(bag_id)

    def subset(self, indices):
        return Dataset(tuple(self.bags[i] for i in indices), self.dim)

    def instance_matrix(self):
        return np.vstack([b.instances for b in self.bags])

    def without_truth(self):
        return Dataset(tuple(replace(b, truth=None) for b in self.bags), self.dim)

    def check_trainable(self):
        if not self.positive_bags or not self.negative_bags:
            raise DataError("training data needs at least one positive and one negative bag")
        return self


def as_dataset(bags, y=None, ids=None):
    """Coerce ``(bags, y)`` in the sklearn MIL convention into a :class:`Dataset`.

    ``bags`` is a sequence of 2-D arrays (or already a Dataset).  Labels in
    ``{0, 1}`` are mapped to ``{-1, +1}``.  Without ``y`` every bag is labeled
    -1; used for prediction-only inputs.
    """
    if isinstance(bags, Dataset):
        return bags
    bags = list(bags)
    if not bags:
        raise DataError("no bags given")
    if y is None:
        labels = [-1] * len(bags)
    else:
        labels = np.asarray(y).ravel()
        if labels.shape[0] != len(bags):
            raise DataError(f"got {len(bags)} bags but {labels.shape[0]} labels")
        labels = [1 if v > 0 else -1 for v in labels]
    ids = range(len(bags)) if ids is None else ids
    return Dataset(tuple(Bag(i, np.asarray(b, dtype=float), int(l)) for i, b, l in zip(ids, bags, labels)))


@dataclass(frozen=True)
class Scaler:
    mean: np.ndarray
    std: np.ndarray

    def transform(self, X):
        return (np.asarray(X, dtype=float) - self.mean) / self.std

    def inverse_transform(self, X):
        return np.asarray(X, dtype=float) * self.std + self.mean


def fit_scaler(train: Dataset) -> Scaler:
    """Per-feature mean and population std over all instances of ``train``.

    Near-constant features (std below 1e-12) get std 1.
    """
    X = train.instance_matrix() if isinstance(train, Dataset) else np.asarray(train, dtype=float)
    if X.ndim != 2 or X.shape[0] < 2:
        raise DataError("need at least two instances to fit a scaler")
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std = np.where(std < _STD_FLOOR, 1.0, std)
    return Scaler(mean, std)


def apply_scaler(s: Scaler, d: Dataset) -> Dataset:
    if s.mean.shape[0] != d.dim:
        raise DataError(f"scaler has dim {s.mean.shape[0]}, dataset has dim {d.dim}")
    return Dataset(tuple(replace(b, instances=s.transform(b.instances)) for b in d.bags), d.dim)


def distance(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DataError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(np.linalg.norm(a - b))


def pairwise_distances(A, B):
    """Euclidean distances between the rows of ``A`` and ``B``."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if A.shape[1] != B.shape[1]:
        raise DataError(f"dimension mismatch: {A.shape[1]} vs {B.shape[1]}")
    return cdist(A, B)


def instance_ref_list(bags: Sequence[Bag]):
    """Flat list of ``(bag_id, index)`` for every instance of ``bags``."""
    return [(b.id, k) for b in bags for k in range(len(b))]
