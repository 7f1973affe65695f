"""Bag-CSV reading and writing.

One row per instance::

    bag_id,bag_label,truth,f0,f1,...,f{dim-1}

``bag_label`` is ``1`` or ``-1``; ``truth`` is ``1``, ``-1`` or ``NA``.  Rows
of one bag must be contiguous.  Floats are written with ``repr`` so a write
followed by a read reproduces the dataset exactly.
"""

import csv

import numpy as np

from .core import Bag, DataError, Dataset


def write_bags(d: Dataset, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["bag_id", "bag_label", "truth"] + [f"f{k}" for k in range(d.dim)])
        for b in d.bags:
            for k, x in enumerate(b.instances):
                t = "NA" if b.truth is None else str(int(b.truth[k]))
                w.writerow([b.id, b.label, t] + [repr(float(v)) for v in x])


def _parse_int_label(text, what, line):
    try:
        v = int(text)
    except ValueError:
        raise DataError(f"line {line}: bad {what} {text!r}") from None
    if v not in (1, -1):
        raise DataError(f"line {line}: {what} must be 1 or -1, got {v}")
    return v


def read_bags(path) -> Dataset:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DataError(f"{path}: empty file")
    header = rows[0]
    if header[:3] != ["bag_id", "bag_label", "truth"] or len(header) < 4:
        raise DataError(f"{path}: header must start with bag_id,bag_label,truth and name at least one feature")
    dim = len(header) - 3
    if header[3:] != [f"f{k}" for k in range(dim)]:
        raise DataError(f"{path}: feature columns must be named f0..f{dim - 1}")

    order, groups = [], {}
    prev = None
    for line, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != dim + 3:
            raise DataError(f"line {line}: expected {dim + 3} fields, got {len(row)}")
        bag_id, label, truth = row[0], _parse_int_label(row[1], "bag_label", line), row[2]
        if bag_id != prev and bag_id in groups:
            raise DataError(f"line {line}: rows of bag {bag_id!r} are not contiguous")
        prev = bag_id
        try:
            feats = [float(v) for v in row[3:]]
        except ValueError:
            raise DataError(f"line {line}: non-numeric feature") from None
        t = None if truth == "NA" else _parse_int_label(truth, "truth", line)
        if bag_id not in groups:
            order.append(bag_id)
        g = groups.setdefault(bag_id, {"label": label, "X": [], "truth": []})
        if g["label"] != label:
            raise DataError(f"line {line}: bag {bag_id!r} has inconsistent labels")
        g["X"].append(feats)
        g["truth"].append(t)

    bags = []
    for bag_id in order:
        g = groups[bag_id]
        truths = g["truth"]
        if all(t is None for t in truths):
            truth = None
        elif any(t is None for t in truths):
            raise DataError(f"bag {bag_id!r}: truth must be given for all instances or none")
        else:
            truth = np.array(truths, dtype=int)
        bags.append(Bag(bag_id, np.array(g["X"], dtype=float), g["label"], truth))
    if not bags:
        raise DataError(f"{path}: no instances")
    return Dataset(tuple(bags), dim)
