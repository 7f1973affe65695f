import numpy as np
import pytest

from conftest import toy_dataset
from pigmil.bench.experiments import (ExperimentReport, beta_for_ratio, cross_validate, detect_tpis,
                                      edge_magnitudes, ratio_for_beta, sweep_d_ratio, sweep_noise, sweep_ws_size,
                                      tpi_score)
from pigmil.bench.synth import SynthSpec, generate, inject_noise, noise_fractions, tpi_accuracy
from pigmil.classify import PigmilConfig
from pigmil.core import DataError


def mil_consistent(d):
    return all((b.label == 1) == bool(np.any(b.truth == 1)) for b in d.bags)


@pytest.mark.parametrize("kind", ["basic", "rhombus", "ring"])
def test_generate_counts_and_determinism(kind):
    d = generate(SynthSpec(kind, seed=7))
    assert len(d) == 40 and d.dim == 2
    assert len(d.positive_bags) == 20
    for b in d.positive_bags:
        assert len(b) == 8 and int((b.truth == 1).sum()) == 4
    for b in d.negative_bags:
        assert len(b) == 8 and np.all(b.truth == -1)
    assert mil_consistent(d)
    again = generate(SynthSpec(kind, seed=7))
    for a, b in zip(d.bags, again.bags):
        assert np.array_equal(a.instances, b.instances) and np.array_equal(a.truth, b.truth)
    other = generate(SynthSpec(kind, seed=8))
    assert not np.array_equal(d.bags[0].instances, other.bags[0].instances)


def split_by_truth(d):
    X = d.instance_matrix()
    t = np.concatenate([b.truth for b in d.bags])
    return X[t == 1], X[t == -1]


def test_ring_geometry():
    spec = SynthSpec("ring", seed=1)
    pos, neg = split_by_truth(generate(spec))
    assert np.all(np.linalg.norm(pos, axis=1) < spec.ring_radii[0])
    r = np.linalg.norm(neg, axis=1)
    assert np.all((r >= spec.ring_radii[0]) & (r <= spec.ring_radii[1]))


def test_basic_and_rhombus_geometry():
    d = generate(SynthSpec("basic", seed=1))
    for b in d.negative_bags:
        assert np.all(np.abs(b.instances) <= 1)
    for b in d.positive_bags:
        fpi = b.instances[b.truth == -1]
        assert np.all((fpi >= 0) & (fpi <= 2))
    spec = SynthSpec("rhombus", seed=1)
    _, neg = split_by_truth(generate(spec))
    assert np.all(np.abs(neg[:, 0]) <= spec.rhombus_half_width)
    assert np.all((np.abs(neg[:, 1]) >= 0.5) & (np.abs(neg[:, 1]) <= 1.5))
    with pytest.raises(ValueError):
        SynthSpec("spiral")


def test_noise_levels():
    d = generate(SynthSpec("basic", seed=0))
    assert inject_noise(d, 0, seed=1) is d
    assert noise_fractions(3) == (0.2, 0.3)
    with pytest.raises(ValueError):
        noise_fractions(6)
    noisy = inject_noise(d, 3, seed=1)
    old = np.concatenate([b.truth for b in d.bags])
    new = np.concatenate([b.truth for b in noisy.bags])
    assert int(((old == 1) & (new == -1)).sum()) == 16
    assert int(((old == -1) & (new == 1)).sum()) == 72
    assert mil_consistent(noisy)
    again = inject_noise(d, 3, seed=1)
    assert np.array_equal(new, np.concatenate([b.truth for b in again.bags]))
    with pytest.raises(DataError):
        inject_noise(d.without_truth(), 2)


def test_noise_rounding_half_up():
    # level 1 flips no positives and 10% of negatives, rounded half up
    d = toy_dataset(n_pos=5, n_neg=5)
    noisy = inject_noise(d, 1, seed=0)
    old = np.concatenate([b.truth for b in d.bags])
    new = np.concatenate([b.truth for b in noisy.bags])
    n_neg = int((old == -1).sum())
    assert int(((old == -1) & (new == 1)).sum()) == int(np.floor(0.1 * n_neg + 0.5))
    assert int(((old == 1) & (new == -1)).sum()) == 0


def test_tpi_accuracy():
    d = toy_dataset()
    pos = [(b.id, int(np.flatnonzero(b.truth == 1)[0])) for b in d.positive_bags]
    negs = [(b.id, int(np.flatnonzero(b.truth == -1)[0])) for b in d.positive_bags]
    assert tpi_accuracy(pos, d) == 100.0
    assert tpi_accuracy(pos[:3] + negs[3:], d) == 50.0
    with pytest.raises(DataError):
        tpi_accuracy([], d)
    with pytest.raises(DataError):
        tpi_accuracy(pos, d.without_truth())


def constant_positive(train, test, cfg, seed):
    return np.ones(len(test), dtype=int), None


def test_cv_constant_classifier_hits_prior():
    d = generate(SynthSpec("basic", seed=0))
    rep = cross_validate(d, folds=10, repeats=2, seed=3, fit_predict=constant_positive)
    assert rep.accuracy_mean == pytest.approx(50.0)
    assert rep.tpi_mean is None and len(rep.folds) == 20


def test_cv_partitions_and_leave_one_out():
    d = toy_dataset()
    seen = []

    def record(train, test, cfg, seed):
        tr, te = {b.id for b in train}, {b.id for b in test}
        assert not tr & te and len(tr | te) == len(d)
        assert not test.has_truth and not train.has_truth
        seen.extend(te)
        return np.ones(len(test), dtype=int), None

    rep = cross_validate(d, folds=len(d), repeats=1, fit_predict=record)
    assert sorted(seen) == sorted(b.id for b in d)
    assert all(f["n_test"] == 1 for f in rep.folds)
    with pytest.raises(DataError):
        cross_validate(d, folds=len(d) + 1, fit_predict=record)
    with pytest.raises(DataError):
        cross_validate(d, folds=1, fit_predict=record)


def test_report_aggregates_recompute():
    d = toy_dataset()
    rep = cross_validate(d, folds=3, repeats=2, seed=1)
    acc = [f["accuracy"] for f in rep.folds]
    assert rep.accuracy_mean == pytest.approx(np.mean(acc))
    assert rep.accuracy_std == pytest.approx(np.std(acc))
    copy = ExperimentReport(rep.folds, rep.config, rep.seed, rep.n_folds, rep.n_repeats)
    assert copy.accuracy_mean == rep.accuracy_mean and copy.tpi_mean == rep.tpi_mean
    assert set(rep.to_dict()) >= {"folds", "config", "accuracy_mean", "accuracy_std", "tpi_mean", "seconds"}


def test_cv_reproducible():
    d = toy_dataset()
    a = cross_validate(d, folds=3, repeats=1, seed=5)
    b = cross_validate(d, folds=3, repeats=1, seed=5)
    assert [f["accuracy"] for f in a.folds] == [f["accuracy"] for f in b.folds]


def test_detect_tpis_methods():
    d = generate(SynthSpec("basic", seed=0))
    for m in ("pigmil", "kde-min", "kde", "kde-max"):
        entries = detect_tpis(d, m)
        assert entries and all(isinstance(k, int) for _, k in entries)
    with pytest.raises(ValueError):
        detect_tpis(d, "knn")


def test_sweep_shapes():
    d = generate(SynthSpec("basic", seed=0))
    assert [r["level"] for r in sweep_noise(d, (0, 2))] == [0, 2]
    rows = sweep_ws_size(d, (0.4, 1.0))
    assert [r["fraction"] for r in rows] == [0.4, 1.0]
    assert len(sweep_d_ratio(d, (0.0, 1.0, 2.0))) == 3


def test_full_fraction_includes_everything():
    from pigmil.classify import detect
    from pigmil.bench.experiments import standardized
    d = generate(SynthSpec("basic", seed=0))
    cfg = PigmilConfig(ws_fraction=1.0)
    det = detect(standardized(d.without_truth(), cfg), cfg)
    assert all(len(w) == 8 for w in det.working_sets.values())


def test_d_ratio_identity_and_conversions():
    d = generate(SynthSpec("rhombus", seed=0))
    sc, dm, alpha, beta = edge_magnitudes(d)
    r = ratio_for_beta(beta, sc, dm)
    assert beta_for_ratio(r, sc, dm) == pytest.approx(beta)
    row = sweep_d_ratio(d, (r,))[0]
    assert row["beta"] == pytest.approx(beta)
    assert row["tpi_accuracy"] == tpi_score(d)


def test_d_ratio_trend_on_basic():
    d = generate(SynthSpec("basic", seed=0))
    rows = sweep_d_ratio(d, (0.0, 2.0))
    assert rows[-1]["tpi_accuracy"] >= rows[0]["tpi_accuracy"]
