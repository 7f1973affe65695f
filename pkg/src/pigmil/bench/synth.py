"""Synthetic 2-D MIL datasets and label-noise injection.

All three kinds have 20 positive bags (4 positive + 4 negative instances)
and 20 negative bags (8 negative instances).

basic    positives ~ N((3, 3), 0.5^2 I); negatives of negative bags ~ U[-1, 1]^2;
         negatives of positive bags ~ U[0, 2]^2.  Linearly separable.
rhombus  positives from N((+-2, 0), 0.4^2 I); negatives uniform on the
         rectangles [-1, 1] x [0.5, 1.5] and [-1, 1] x [-1.5, -0.5];
         negatives of positive bags are drawn from the same negative pool.
ring     positives ~ N(0, 0.5^2 I) kept inside radius 2; negatives uniform
         (by area) on the annulus 2 <= r <= 3.
"""

from dataclasses import dataclass, replace

import numpy as np

from ..core import Bag, DataError, Dataset

KINDS = ("basic", "rhombus", "ring")


@dataclass(frozen=True)
class SynthSpec:
    kind: str = "basic"
    n_pos_bags: int = 20
    n_neg_bags: int = 20
    pos_per_bag: int = 4
    fpi_per_bag: int = 4
    neg_bag_size: int = 8
    seed: int = 0
    # basic
    basic_center: tuple = (3.0, 3.0)
    basic_std: float = 0.5
    # rhombus
    rhombus_offset: float = 2.0
    rhombus_std: float = 0.4
    rhombus_half_width: float = 1.0
    rhombus_y: tuple = (0.5, 1.5)
    # ring
    ring_std: float = 0.5
    ring_radii: tuple = (2.0, 3.0)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")


def _uniform_box(rng, n, lo, hi):
    return rng.uniform(lo, hi, size=(n, 2))


def _basic(spec, rng):
    pos = lambda n: rng.normal(spec.basic_center, spec.basic_std, size=(n, 2))
    fpi = lambda n: _uniform_box(rng, n, 0.0, 2.0)
    neg = lambda n: _uniform_box(rng, n, -1.0, 1.0)
    return pos, fpi, neg


def _rhombus(spec, rng):
    def pos(n):
        side = rng.choice([-1.0, 1.0], size=n)
        return np.c_[side * spec.rhombus_offset, np.zeros(n)] + rng.normal(0.0, spec.rhombus_std, size=(n, 2))

    def neg(n):
        lo, hi = spec.rhombus_y
        x = rng.uniform(-spec.rhombus_half_width, spec.rhombus_half_width, n)
        y = rng.uniform(lo, hi, n) * rng.choice([-1.0, 1.0], size=n)
        return np.c_[x, y]

    return pos, neg, neg


def _ring(spec, rng):
    r_in, r_out = spec.ring_radii

    def pos(n):
        out = np.empty((0, 2))
        while out.shape[0] < n:
            cand = rng.normal(0.0, spec.ring_std, size=(n, 2))
            out = np.vstack([out, cand[np.linalg.norm(cand, axis=1) < r_in]])
        return out[:n]

    def neg(n):
        r = np.sqrt(rng.uniform(r_in ** 2, r_out ** 2, n))
        t = rng.uniform(0.0, 2 * np.pi, n)
        return np.c_[r * np.cos(t), r * np.sin(t)]

    return pos, neg, neg


def generate(spec: SynthSpec) -> Dataset:
    rng = np.random.default_rng(spec.seed)
    pos, fpi, neg = {"basic": _basic, "rhombus": _rhombus, "ring": _ring}[spec.kind](spec, rng)
    bags = []
    for j in range(spec.n_pos_bags):
        X = np.vstack([pos(spec.pos_per_bag), fpi(spec.fpi_per_bag)])
        truth = np.r_[np.ones(spec.pos_per_bag, dtype=int), -np.ones(spec.fpi_per_bag, dtype=int)]
        perm = rng.permutation(X.shape[0])
        bags.append(Bag(f"pos{j:02d}", X[perm], 1, truth[perm]))
    for j in range(spec.n_neg_bags):
        X = neg(spec.neg_bag_size)
        bags.append(Bag(f"neg{j:02d}", X, -1, -np.ones(spec.neg_bag_size, dtype=int)))
    return Dataset(tuple(bags), 2)


def _round_half_up(x):
    return int(np.floor(x + 0.5))


def noise_fractions(level):
    """``(positive_fraction, negative_fraction)`` flipped at a noise level."""
    if not 0 <= level <= 5:
        raise ValueError("noise level must be in 0..5")
    if level == 0:
        return 0.0, 0.0
    return (level - 1) / 10.0, level / 10.0


def inject_noise(d: Dataset, level: int, seed=0) -> Dataset:
    """Flip instance labels, then relabel bags by the MIL rule.

    Level ``k >= 1`` flips ``(k-1) * 10%`` of the truth-positive instances to
    negative and ``k * 10%`` of the truth-negative instances to positive,
    chosen uniformly without replacement.  Level 0 returns ``d`` unchanged.
    """
    if not d.has_truth:
        raise DataError("noise injection needs ground-truth instance labels")
    if level == 0:
        return d
    fp, fn = noise_fractions(level)
    truth = np.concatenate([b.truth for b in d.bags])
    rng = np.random.default_rng(seed)
    pos_idx = np.flatnonzero(truth == 1)
    neg_idx = np.flatnonzero(truth == -1)
    flip_pos = rng.choice(pos_idx, _round_half_up(fp * pos_idx.size), replace=False)
    flip_neg = rng.choice(neg_idx, _round_half_up(fn * neg_idx.size), replace=False)
    new = truth.copy()
    new[flip_pos] = -1
    new[flip_neg] = 1
    bags, start = [], 0
    for b in d.bags:
        t = new[start: start + len(b)]
        start += len(b)
        bags.append(replace(b, truth=t, label=1 if (t == 1).any() else -1))
    return Dataset(tuple(bags), d.dim)


def tpi_accuracy(pcp, d: Dataset) -> float:
    """Percentage of pool entries whose ground-truth label is positive."""
    entries = list(pcp)
    if not entries:
        raise DataError("empty candidate pool")
    if not d.has_truth:
        raise DataError("TPI accuracy needs ground-truth instance labels")
    hits = sum(d.bag(b).truth[k] == 1 for b, k in entries)
    return 100.0 * hits / len(entries)
