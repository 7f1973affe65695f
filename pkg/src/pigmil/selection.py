"""Working sets, working-bag filtering and the initial candidate pool."""

import math
from dataclasses import dataclass

import numpy as np

from .core import Bag, DataError
from .density import KdeParams, NegativeIndex, density


@dataclass(frozen=True)
class WorkingSet:
    bag_id: object
    member_indices: tuple
    scores: tuple

    def __len__(self):
        return len(self.member_indices)


@dataclass(frozen=True)
class WorkingBagSet:
    bag_ids: tuple
    t_values: dict


@dataclass(frozen=True)
class Pcp:
    """Positive candidate pool: one ``(bag_id, instance_index)`` per working bag."""

    entries: tuple

    def __post_init__(self):
        entries = tuple((b, int(k)) for b, k in self.entries)
        if len({b for b, _ in entries}) != len(entries):
            raise DataError("a candidate pool holds at most one instance per bag")
        object.__setattr__(self, "entries", entries)

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


def build_working_set(bag: Bag, neg: NegativeIndex, fraction=0.4, p: KdeParams = KdeParams()) -> WorkingSet:
    """The ``ceil(fraction * n)`` instances of ``bag`` with the lowest kde_min."""
    if bag.label != 1:
        raise DataError(f"bag {bag.id!r} is not positive")
    if not 0 < fraction <= 1:
        raise ValueError(f"fraction must lie in (0, 1], got {fraction}")
    scores = density(bag.instances, neg, p, "min")
    # guard against 0.4 * 10 landing on 4.000000000000001
    quota = max(1, min(len(bag), math.ceil(round(fraction * len(bag), 9))))
    order = np.argsort(scores, kind="stable")[:quota]
    order = sorted(order.tolist(), key=lambda k: (scores[k], k))
    return WorkingSet(bag.id, tuple(order), tuple(float(scores[k]) for k in order))


def welch_t(a, b) -> float:
    """One-sided Welch statistic; positive when ``a`` has the larger mean."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    va = a.var(ddof=1) if a.size > 1 else 0.0
    vb = b.var(ddof=1) if b.size > 1 else 0.0
    diff = a.mean() - b.mean()
    se = math.sqrt(va / a.size + vb / b.size)
    if se == 0.0:
        if diff == 0.0:
            return 0.0
        return math.copysign(math.inf, diff)
    return float(diff / se)


def select_working_bags(ws, t_threshold=1.5) -> WorkingBagSet:
    """Drop positive bags whose working-set scores are significantly worse.

    "Worse" means a higher kde_min mean than the pooled scores of all other
    working sets.  A bag is rejected iff its t value exceeds ``t_threshold``;
    if every bag would go, the one with the smallest t is kept.
    """
    ws = list(ws)
    if len(ws) < 2:
        raise DataError("need at least two working sets")
    t_values = {}
    for j, w in enumerate(ws):
        rest = np.concatenate([ws[k].scores for k in range(len(ws)) if k != j])
        t_values[w.bag_id] = welch_t(w.scores, rest)
    kept = tuple(w.bag_id for w in ws if not t_values[w.bag_id] > t_threshold)
    if not kept:
        kept = (min(ws, key=lambda w: t_values[w.bag_id]).bag_id,)
    return WorkingBagSet(kept, t_values)


def init_pcp(wb: WorkingBagSet, ws) -> Pcp:
    """Lowest-scoring working-set member of every working bag."""
    if not wb.bag_ids:
        raise DataError("no working bags")
    by_bag = {w.bag_id: w for w in ws}
    entries = []
    for bag_id in wb.bag_ids:
        w = by_bag[bag_id]
        best = min(range(len(w)), key=lambda i: (w.scores[i], w.member_indices[i]))
        entries.append((bag_id, w.member_indices[best]))
    return Pcp(tuple(entries))
