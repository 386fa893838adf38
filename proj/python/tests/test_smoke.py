import math

import numpy as np
import pytest

import castguard as cg


@pytest.fixture(scope="module")
def synth():
    data = cg.gen_synth(n_per_class=60, dim=8, separation=8.0, sigma=1.0, seed=3)
    return cg.split_dataset(data, 0.75, seed=3)


def test_fmx_roundtrip(tmp_path):
    x = np.array([[1, 2, 3], [4, 5, 6]], dtype=np.float32)
    ds = cg.FeatureDataset(x, np.array([1, 0], dtype=np.uint8))
    path = tmp_path / "a.fmx"
    cg.write_fmx(ds, path)
    assert path.stat().st_size == cg.fmx_file_size(2, 3, True, 0) == 42
    back = cg.read_fmx(path)
    assert back == ds
    assert cg.read_fmx_header(path)["rows"] == 2


def test_fmx_rejects_bad_magic(tmp_path):
    path = tmp_path / "bad.fmx"
    path.write_bytes(b"XXXX" + bytes(40))
    with pytest.raises(cg.DataError, match="not an FMX file"):
        cg.read_fmx(path)


def test_nan_is_a_validation_error():
    with pytest.raises(cg.ValidationError):
        cg.FeatureDataset(np.array([[np.nan]], dtype=np.float32), np.array([1], dtype=np.uint8))


@pytest.mark.parametrize("kind", ["knn", "gaussian_nb", "linear_svm", "random_forest", "adaboost"])
def test_classifiers_fit_and_roundtrip(synth, kind):
    train, test = synth
    model = cg.fit(kind, train, seed=1)
    pred = model.predict(test.features)
    assert cg.binary_metrics(pred, test.labels)["accuracy"] >= 0.95
    clone = cg.load_model(model.to_bytes())
    np.testing.assert_array_equal(clone.score(test.features), model.score(test.features))


def test_metrics():
    assert cg.auc(np.array([0.1, 0.4, 0.35, 0.8]), np.array([0, 0, 1, 1], dtype=np.uint8)) == 0.75
    s = cg.aggregate_runs(np.array([0.0, 1.0]))
    assert s["mean"] == 0.5
    assert s["std"] == pytest.approx(math.sqrt(0.5))
    m = cg.binary_metrics(np.ones(5, dtype=np.uint8), np.ones(5, dtype=np.uint8))
    assert m["specificity"] is None


def test_entropy_and_uncertainty_accuracy():
    assert cg.predictive_entropy(np.array([0.5, 0.5])) == 1.0
    assert cg.predictive_entropy(np.array([0.7, 0.3])) == pytest.approx(0.8813, abs=1e-4)
    assert cg.uncertainty_accuracy(96, 2, 1, 1) == pytest.approx(0.98)


def test_ensemble(synth):
    train, test = synth
    cfg = cg.EnsembleConfig()
    cfg.n_members = 2
    cfg.width_ranges = [(16, 32), (8, 16), (4, 8)]
    cfg.epochs = 40
    cfg.learning_rate = 0.01
    ens = cg.ensemble_train(cfg, train)
    assert ens.n_members == 2
    mean = ens.mean(test.features)
    np.testing.assert_allclose(mean.sum(axis=1), 1.0, atol=1e-12)
    result = cg.assess(ens, test, 0.4)
    c = result["confusion"]
    assert c["tc"] + c["tu"] + c["fu"] + c["fc"] == len(test)
    assert result["uncertainty_accuracy"] >= 0.9
    sweep = cg.threshold_sweep(result["entropy"], list(result["correct"]))
    assert len(sweep) == 9
    again = cg.load_ensemble(ens.to_bytes())
    np.testing.assert_array_equal(again.mean(test.features), mean)


def test_pca_rank_one():
    rng = np.random.default_rng(0)
    direction = np.array([1.0, 2.0, -2.0]) / 3.0
    data = np.outer(rng.normal(size=50), direction) + np.array([1.0, 0.0, 5.0])
    model = cg.pca_fit(data, 1)
    assert abs(model.components[0] @ direction) > 1 - 1e-6
    coords = model.transform(data)
    np.testing.assert_allclose(model.reconstruct(coords), data, atol=1e-9)
