"""KNN / SVM / RF behavior against brute-force oracles."""

import numpy as np
import pytest

from freqprint import (
    FeatureKind,
    FeatureMatrix,
    KnnClassifier,
    LinearSvmClassifier,
    RandomForestClassifier,
    evaluate,
    evaluate_runs,
)
from freqprint.classifiers import softmax
from freqprint.errors import (
    KTooLargeError,
    SingleClassError,
    UnknownLabelError,
    WidthMismatchError,
)
from oracles import brute_knn_proba, exhaustive_best_split_1d, tree_walk_proba


def gaussian_blobs(n_per_class, centers, spread=1.0, seed=0):
    rng = np.random.default_rng(seed)
    rows, labels = [], []
    for label, center in enumerate(centers):
        rows.append(rng.standard_normal((n_per_class, len(center))) * spread + center)
        labels.append(np.full(n_per_class, label))
    return np.vstack(rows), np.concatenate(labels)


# ---------------------------------------------------------------- KNN


def test_knn_training_row_is_its_own_nearest_neighbor():
    X, y = gaussian_blobs(10, [(0, 0), (6, 6)], seed=1)
    model = KnnClassifier(k=1).fit(X, y)
    probs = model.predict_proba(X)
    assert np.array_equal(model.predict(X), y)
    assert np.allclose(probs.max(axis=1), 1.0)


def test_knn_vote_fractions():
    # query equidistant from three stored points labeled A, A, B
    X = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]])
    y = np.array([0, 0, 1])
    model = KnnClassifier(k=3).fit(X, y)
    probs = model.predict_proba(np.array([[0.0, 0.0]]))
    assert probs[0].tolist() == pytest.approx([2 / 3, 1 / 3])


def test_knn_matches_bruteforce_oracle_over_k():
    X, y = gaussian_blobs(100, [(0, 0), (3, 3)], spread=1.5, seed=2)
    rng = np.random.default_rng(3)
    queries = rng.standard_normal((40, 2)) * 2 + 1.5
    for k in (1, 3, 5, 20):
        model = KnnClassifier(k=k).fit(X, y)
        ours = model.predict_proba(queries)
        oracle = brute_knn_proba(X, y, queries, k, model.classes_.tolist())
        assert np.allclose(ours, oracle, atol=1e-12)


def test_knn_permutation_invariance():
    X, y = gaussian_blobs(30, [(0, 0), (4, 4), (0, 4)], seed=4)
    rng = np.random.default_rng(5)
    queries = rng.standard_normal((10, 2)) * 3
    base = KnnClassifier(k=7).fit(X, y).predict_proba(queries)
    for seed in range(3):
        perm = np.random.default_rng(seed).permutation(len(X))
        shuffled = KnnClassifier(k=7).fit(X[perm], y[perm]).predict_proba(queries)
        assert np.allclose(base, shuffled, atol=1e-12)


def test_knn_k_bounds():
    X, y = gaussian_blobs(3, [(0, 0), (5, 5)])
    with pytest.raises(KTooLargeError):
        KnnClassifier(k=7).fit(X, y)
    with pytest.raises(ValueError):
        KnnClassifier(k=0).fit(X, y)


def test_knn_all_neighbors_same_class_is_one_hot():
    X = np.vstack([np.zeros((5, 2)), np.full((5, 2), 10.0)])
    y = np.array([0] * 5 + [1] * 5)
    model = KnnClassifier(k=5).fit(X, y)
    probs = model.predict_proba(np.array([[0.2, -0.1]]))
    assert probs[0].tolist() == [1.0, 0.0]


# ---------------------------------------------------------------- SVM


def test_svm_separable_blobs_reach_full_training_accuracy():
    X, y = gaussian_blobs(40, [(-4, 0), (4, 0)], spread=0.8, seed=6)
    model = LinearSvmClassifier(c=1.0, epochs=30, seed=0).fit(X, y)
    assert np.mean(model.predict(X) == y) == 1.0


def test_svm_weight_geometry_follows_separating_axis():
    # classes split along axis 0 only: |w[0]| must dominate |w[1]|
    X, y = gaussian_blobs(60, [(-5, 0), (5, 0)], spread=0.5, seed=7)
    model = LinearSvmClassifier(c=1.0, epochs=40, seed=0).fit(X, y)
    for w in model.weights_:
        assert abs(w[0]) >= 5 * abs(w[1])


def test_svm_feature_scaling_keeps_argmax_on_separable_data():
    X, y = gaussian_blobs(30, [(-3, 1), (3, -1), (0, 4)], spread=0.5, seed=8)
    queries = np.array([[-2.0, 1.0], [2.5, -0.5], [0.5, 3.5]])
    a = LinearSvmClassifier(c=1.0, epochs=40, seed=0).fit(X, y)
    b = LinearSvmClassifier(c=1.0, epochs=40, seed=0).fit(2.0 * X, y)
    assert np.array_equal(a.predict(queries), b.predict(2.0 * queries))


def test_svm_softmax_shift_invariance():
    rng = np.random.default_rng(9)
    margins = rng.standard_normal((6, 4))
    assert np.allclose(softmax(margins), softmax(margins + 123.4), atol=1e-12)


def test_svm_rejects_single_class():
    X = np.zeros((4, 2))
    y = np.zeros(4, dtype=int)
    with pytest.raises(SingleClassError):
        LinearSvmClassifier().fit(X, y)


def test_svm_deterministic():
    X, y = gaussian_blobs(25, [(-2, 0), (2, 0), (0, 3)], seed=10)
    a = LinearSvmClassifier(epochs=10, seed=3).fit(X, y)
    b = LinearSvmClassifier(epochs=10, seed=3).fit(X, y)
    assert np.array_equal(a.weights_, b.weights_)
    assert np.array_equal(a.biases_, b.biases_)


# ---------------------------------------------------------------- RF


def test_single_unbagged_tree_memorizes_pure_data():
    X, y = gaussian_blobs(20, [(-3, -3), (3, 3)], spread=0.6, seed=11)
    model = RandomForestClassifier(n_estimators=1, seed=0, bootstrap=False).fit(X, y)
    assert np.mean(model.predict(X) == y) == 1.0


def test_root_split_lies_between_class_extremes():
    """Single-feature threshold-separable data: the root threshold falls in
    the gap, and matches an exhaustive scan."""
    rng = np.random.default_rng(12)
    left = rng.uniform(0.0, 1.0, 20)
    right = rng.uniform(2.0, 3.0, 20)
    X = np.concatenate([left, right])[:, None]
    y = np.array([0] * 20 + [1] * 20)
    model = RandomForestClassifier(n_estimators=1, seed=0, bootstrap=False).fit(X, y)
    tree = model.trees_[0]
    root_threshold = tree.threshold[0]
    assert left.max() < root_threshold < right.min()
    assert root_threshold == pytest.approx(exhaustive_best_split_1d(X[:, 0], y))


def test_rf_probabilities_are_mean_of_tree_votes():
    X, y = gaussian_blobs(25, [(-2, 0), (2, 0), (0, 3)], spread=1.2, seed=13)
    model = RandomForestClassifier(n_estimators=7, seed=1).fit(X, y)
    rng = np.random.default_rng(14)
    queries = rng.standard_normal((15, 2)) * 2
    ours = model.predict_proba(queries)
    for r, row in enumerate(queries):
        votes = np.zeros(model.classes_.size)
        for tree in model.trees_:
            votes += tree_walk_proba(tree, row)
        assert np.allclose(ours[r], votes / len(model.trees_), atol=1e-12)


def test_rf_deterministic_per_seed():
    X, y = gaussian_blobs(20, [(-2, 0), (2, 0)], seed=15)
    a = RandomForestClassifier(n_estimators=5, seed=9).fit(X, y)
    b = RandomForestClassifier(n_estimators=5, seed=9).fit(X, y)
    queries = X[:10] + 0.1
    assert np.array_equal(a.predict_proba(queries), b.predict_proba(queries))
    for ta, tb in zip(a.trees_, b.trees_):
        assert np.array_equal(ta.threshold, tb.threshold)
    c = RandomForestClassifier(n_estimators=5, seed=10).fit(X, y)
    thresholds = lambda model: np.concatenate([t.threshold for t in model.trees_])
    assert not np.array_equal(thresholds(a), thresholds(c))


def test_rf_multi_seed_average_reporting():
    X, y = gaussian_blobs(30, [(-2, -2), (2, 2)], spread=1.8, seed=16)
    Xt, yt = gaussian_blobs(10, [(-2, -2), (2, 2)], spread=1.8, seed=17)
    train = FeatureMatrix(X, y, FeatureKind.TIME_DOMAIN)
    test = FeatureMatrix(Xt, yt, FeatureKind.TIME_DOMAIN)
    mean, std, accs = evaluate_runs(
        lambda seed: RandomForestClassifier(n_estimators=10, seed=seed),
        train,
        test,
        n_runs=10,
    )
    assert len(accs) == 10
    assert mean == pytest.approx(np.mean(accs))
    assert std == pytest.approx(np.std(accs))


# ------------------------------------------------------- shared contract


@pytest.mark.parametrize(
    "make",
    [
        lambda: KnnClassifier(k=5),
        lambda: LinearSvmClassifier(epochs=10, seed=0),
        lambda: RandomForestClassifier(n_estimators=5, seed=0),
    ],
)
def test_probability_rows_sum_to_one(make):
    X, y = gaussian_blobs(20, [(-2, 0), (2, 0), (0, 3)], spread=1.5, seed=18)
    rng = np.random.default_rng(19)
    queries = rng.standard_normal((25, 2)) * 3
    model = make().fit(X, y)
    probs = model.predict_proba(queries)
    assert probs.shape == (25, 3)
    assert np.all((probs >= 0) & (probs <= 1))
    assert np.allclose(probs.sum(axis=1), 1.0, atol=1e-9)


@pytest.mark.parametrize(
    "make",
    [
        lambda: KnnClassifier(k=3),
        lambda: LinearSvmClassifier(epochs=5, seed=0),
        lambda: RandomForestClassifier(n_estimators=3, seed=0),
    ],
)
def test_width_mismatch_rejected(make):
    X, y = gaussian_blobs(10, [(-2, 0), (2, 0)], seed=20)
    model = make().fit(X, y)
    with pytest.raises(WidthMismatchError):
        model.predict_proba(np.zeros((2, 5)))


def test_sklearn_get_params_contract():
    from sklearn.base import clone

    model = RandomForestClassifier(n_estimators=12, seed=4, bootstrap=False)
    params = model.get_params()
    assert params["n_estimators"] == 12 and params["bootstrap"] is False
    cloned = clone(model)
    assert cloned.get_params() == params


# ---------------------------------------------------------------- evaluate


def test_evaluate_perfect_and_all_wrong():
    X, y = gaussian_blobs(10, [(-5, 0), (5, 0)], spread=0.3, seed=21)
    test = FeatureMatrix(X, y, FeatureKind.TIME_DOMAIN)
    model = KnnClassifier(k=1).fit(X, y)
    result = evaluate(model, test)
    assert result.accuracy == 1.0
    assert np.array_equal(np.diag(result.confusion), [10, 10])
    assert result.confusion.sum() == 20

    flipped = FeatureMatrix(X, 1 - y, FeatureKind.TIME_DOMAIN)
    result = evaluate(model, flipped)
    assert result.accuracy == 0.0
    assert np.trace(result.confusion) == 0


def test_evaluate_accuracy_equals_trace_over_sum():
    X, y = gaussian_blobs(15, [(-1, 0), (1, 0), (0, 2)], spread=1.5, seed=22)
    model = KnnClassifier(k=3).fit(X, y)
    rng = np.random.default_rng(23)
    Xq = rng.standard_normal((30, 2)) * 2
    yq = rng.integers(0, 3, size=30)
    result = evaluate(model, FeatureMatrix(Xq, yq, FeatureKind.TIME_DOMAIN))
    assert result.accuracy == pytest.approx(
        np.trace(result.confusion) / result.confusion.sum()
    )


def test_evaluate_rejects_foreign_labels():
    X, y = gaussian_blobs(5, [(-1, 0), (1, 0)], seed=24)
    model = KnnClassifier(k=1).fit(X, y)
    bad = FeatureMatrix(X, y + 10, FeatureKind.TIME_DOMAIN)
    with pytest.raises(UnknownLabelError):
        evaluate(model, bad)
