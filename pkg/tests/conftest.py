import sys

import numpy as np
import pytest

from pigmil.core import Bag, Dataset
from pigmil.density import NegativeIndex


def neg_bags(*arrays):
    return [Bag(f"n{k}", np.atleast_2d(np.asarray(a, dtype=float)), -1) for k, a in enumerate(arrays)]


def neg_index(*arrays):
    return NegativeIndex(neg_bags(*arrays))


def toy_dataset(seed=0, n_pos=6, n_neg=6, dim=2):
    """Small separable MIL set: positives near (3, 3), negatives near the origin."""
    rng = np.random.default_rng(seed)
    bags = []
    for j in range(n_pos):
        X = np.vstack([rng.normal(3.0, 0.3, (2, dim)), rng.uniform(-1, 1, (3, dim))])
        bags.append(Bag(f"p{j}", X, 1, [1, 1, -1, -1, -1]))
    for j in range(n_neg):
        bags.append(Bag(f"n{j}", rng.uniform(-1, 1, (4, dim)), -1, [-1] * 4))
    return Dataset(tuple(bags), dim)


@pytest.fixture
def toy():
    return toy_dataset()


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "REPORT_LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda l: int(l.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
