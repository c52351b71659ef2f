"""Model/PCA artifact round-trips and byte determinism."""

import numpy as np
import pytest

from freqprint import (
    KnnClassifier,
    LinearSvmClassifier,
    RandomForestClassifier,
    fit_windowed_pca,
    apply_pca,
)
from freqprint.artifacts import (
    load_bundle,
    load_classifier,
    load_pca,
    read_artifact,
    save_bundle,
    save_classifier,
    save_pca,
    write_artifact,
)
from freqprint.errors import ParseError
from freqprint.model import LabelCodec
from freqprint.pipeline import DvfsFeatureParams
from freqprint.spectral import FeatureLayout
from test_classifiers import gaussian_blobs


def test_container_roundtrip(tmp_path):
    path = tmp_path / "blob.fpa"
    arrays = {
        "a": np.arange(6, dtype=np.float64).reshape(2, 3),
        "b": np.array([1, 2, 3], dtype=np.int64),
    }
    write_artifact(path, {"kind": "test", "note": "x"}, arrays)
    meta, back = read_artifact(path)
    assert meta == {"kind": "test", "note": "x"}
    assert np.array_equal(back["a"], arrays["a"])
    assert np.array_equal(back["b"], arrays["b"])


def test_container_bytes_deterministic(tmp_path):
    arrays = {"w": np.linspace(0, 1, 7)}
    write_artifact(tmp_path / "one", {"k": 1}, arrays)
    write_artifact(tmp_path / "two", {"k": 1}, arrays)
    assert (tmp_path / "one").read_bytes() == (tmp_path / "two").read_bytes()


def test_container_rejects_garbage(tmp_path):
    path = tmp_path / "bad"
    path.write_bytes(b"not an artifact at all")
    with pytest.raises(ParseError):
        read_artifact(path)


def test_pca_roundtrip(tmp_path):
    rng = np.random.default_rng(0)
    X = rng.standard_normal((20, 12))
    layout = FeatureLayout.tiled(2, 3, 2)
    model = fit_windowed_pca(X, layout, budget=6, per_window_max=2)
    save_pca(model, tmp_path / "pca.fpa")
    back = load_pca(tmp_path / "pca.fpa")
    assert back.layout == model.layout
    assert back.kept_per_window == model.kept_per_window
    assert np.array_equal(apply_pca(back, X), apply_pca(model, X))


@pytest.mark.parametrize(
    "make",
    [
        lambda: KnnClassifier(k=3),
        lambda: LinearSvmClassifier(epochs=8, seed=1),
        lambda: RandomForestClassifier(n_estimators=4, seed=2),
    ],
)
def test_classifier_roundtrip(tmp_path, make):
    X, y = gaussian_blobs(15, [(-2, 0), (2, 0), (0, 3)], spread=1.2, seed=3)
    model = make().fit(X, y)
    save_classifier(model, tmp_path / "clf.fpa")
    back = load_classifier(tmp_path / "clf.fpa")
    rng = np.random.default_rng(4)
    queries = rng.standard_normal((10, 2)) * 2
    assert np.allclose(model.predict_proba(queries), back.predict_proba(queries), atol=1e-12)
    assert np.array_equal(model.classes_, back.classes_)


def test_bundle_roundtrip(tmp_path):
    X, y = gaussian_blobs(12, [(-3, 0, 0, 0), (3, 0, 0, 0)], spread=0.8, seed=5)
    layout = FeatureLayout.tiled(1, 2, 2)
    pca = fit_windowed_pca(X, layout, budget=4, per_window_max=2)
    clf = KnnClassifier(k=3).fit(apply_pca(pca, X), y)
    codec = LabelCodec(("alpha", "beta"))
    params = DvfsFeatureParams(dt_us=500, duration_s=2.0, n_windows=2)
    save_bundle(tmp_path / "bundle.fpm", "dvfs-freq", params, codec, pca, clf)
    back = load_bundle(tmp_path / "bundle.fpm")
    assert back["pipeline"] == "dvfs-freq"
    assert back["feature_params"] == params
    assert back["codec"].classes == ("alpha", "beta")
    projected = apply_pca(back["pca"], X)
    assert np.array_equal(back["classifier"].predict(projected), clf.predict(apply_pca(pca, X)))
