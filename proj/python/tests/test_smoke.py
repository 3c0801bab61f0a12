import math

import pytest

import trusthmd as th


def small_taxonomy(regime=th.SyntheticRegime.ood, seed=1):
    spec = th.SyntheticSpec()
    spec.regime = regime
    spec.n_train = 300
    spec.n_test = 100
    spec.n_unknown = 50
    spec.dim = 4
    spec.seed = seed
    if regime == th.SyntheticRegime.overlap:
        spec.class_separation = 0.5
    return th.generate_synthetic(spec)


def test_entropy_and_metrics():
    assert th.entropy_of([0.5, 0.5]) == pytest.approx(1.0)
    assert th.entropy_of([1 / 3] * 3, th.LogBase.e) == pytest.approx(math.log(3))
    m = th.compute_metrics([1, 1, 0, 0], [1, 0, 0, 0])
    assert (m.tp, m.fp, m.fn) == (1, 1, 0)
    assert m.f1 == pytest.approx(2 / 3)
    with pytest.raises(ValueError):
        th.entropy_of([0.7, 0.7])


def test_fit_predict_gate_roundtrip():
    tax = small_taxonomy()
    cfg = th.EnsembleConfig()
    cfg.m = 9
    cfg.master_seed = 4
    model = th.fit(cfg, tax.train, workers=2)
    assert model.size == 9
    x = tax.test_known.features[0]
    p = model.predict(x)
    assert sum(p.vote_distribution) == pytest.approx(1.0)
    assert len(p.per_learner_labels) == 9
    v = model.gate(x, 1.0)
    assert not v.rejected
    assert v.accepted_label == p.label
    again = th.EnsembleModel.loads(model.dumps())
    assert again.predict(x).vote_distribution == p.vote_distribution
    assert again.dumps() == model.dumps()


def test_unknowns_are_rejected_in_ood_regime():
    tax = small_taxonomy()
    cfg = th.EnsembleConfig()
    model = th.fit(cfg, tax.train)
    report = th.threshold_sweep(model, tax)
    assert report["schema"] == "trusthmd.threshold_sweep"
    assert len(report["points"]) == 50
    assert report["n_unknown"] == 50


def test_stability_and_dataset_construction():
    tax = small_taxonomy(th.SyntheticRegime.overlap)
    cfg = th.EnsembleConfig()
    report = th.stability_sweep(cfg, tax.train, tax.test_known, [1, 4])
    assert report["points"][0]["mean_entropy"] == 0.0
    assert report["points"][1]["mean_entropy"] > 0.0

    rows = [[float(i)] for i in range(10)]
    d = th.Dataset(rows, [i % 2 for i in range(8)] + [None, None], ["k"] * 8 + ["u", "u"])
    assert len(d) == 10 and d.dim == 1
    split = th.split_taxonomy(d, {"u"}, 0.5, 0)
    assert (len(split.train), len(split.test_known), len(split.unknown)) == (4, 4, 2)
    assert split.unknown.labels == [None, None]
    with pytest.raises(ValueError):
        th.Dataset([[0.0]], [5], ["a"])
