import numpy as np
import pytest

import overlay_phase as op

G_L = np.array([
    [0.9878, 0.0023, 0.0401, 0.0116],
    [0.0029, 0.9325, 0.3666, 0.0787],
    [0.0089, 0.0645, 0.5880, 0.1829],
    [0.0005, 0.0007, 0.0052, 0.7269],
])


def test_version():
    assert op.__version__ == op.version()
    assert "limewire" in op.profile_names()


def test_region_equilibrium():
    h = op.region_equilibrium(G_L)
    assert np.allclose(h, [0.3955, 0.5107, 0.0901, 0.0037], atol=2e-3)


def test_leaf_queue():
    leaf, ultra = op.limewire_model()
    floor, probs = op.ctdm_equilibrium(leaf)
    assert floor == 0 and probs.shape == (31,)
    assert probs.sum() == pytest.approx(1.0)
    assert op.blocking_probability(leaf) == pytest.approx(0.375, abs=1e-3)
    assert op.estimate_lambda(0.36, 5.8) == pytest.approx(9.0625)
    assert ultra.k == 20 and ultra.m == 12


def test_bdtm_columns_are_stochastic():
    leaf, _ = op.limewire_model()
    t = op.bdtm_transfer(leaf)
    assert np.allclose(t.sum(axis=0), 1.0)
    floor, probs = op.bdtm_equilibrium(leaf)
    assert floor == 0 and probs.sum() == pytest.approx(1.0)


def test_errors_carry_kind():
    with pytest.raises(op.Error) as info:
        op.QueueParams(1.0, -1.0, 5)
    assert info.value.args[1] == "model"
    assert isinstance(info.value, ValueError)


def test_classify():
    assert op.classify([(0, 2)] * 10) == "stable-leaf"
    assert op.classify([(30, 32)] * 10) == "stable-ultra"
    assert op.region_of(30, 32) == "USR"


def test_generate_is_deterministic():
    leaf, ultra = op.limewire_model()
    a = op.generate("bdtm", leaf, ultra, (30, 32), 500, seed=3)
    b = op.generate("bdtm", leaf, ultra, (30, 32), 500, seed=3)
    assert a.shape == (501, 2)
    assert np.array_equal(a, b)
    assert a[:, 0].max() <= 30 and a[:, 1].min() >= 20


def test_simulate_and_model_report(tmp_path):
    records = op.simulate(peers=30, hours=2.0, seed=5)
    assert records and all(r[2] in ("leaf", "ultra") for r in records)
    report = op.model_report(out_dir=tmp_path)
    assert report["results"]["leaf"]["blocking"] == pytest.approx(0.375, abs=1e-3)
