"""K-nearest-neighbors, linear SVM, and random forest with one probability
contract, implemented on plain numpy.

All three are deterministic given (data, hyper-parameters, seed):
- KNN breaks neighbor ties at equal distance toward the lower class id, so
  predictions cannot depend on the storage order of training rows.
- SVM is trained by seeded subgradient descent on the primal hinge
  objective; probabilities are a softmax over the per-class margins.
- Random forest ties break toward the lowest feature index, then the lowest
  threshold, and class ties toward the lowest class id.
"""

import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from .errors import KTooLargeError, SingleClassError, UnknownLabelError
from .model import FeatureMatrix
from .validation import as_float_matrix, as_label_vector, check_fitted, check_width

_KNN_CHUNK = 16  # rows per distance block, bounds peak memory


class KnnClassifier(BaseEstimator, ClassifierMixin):
    """Euclidean k-nearest-neighbors; stores the training rows verbatim."""

    def __init__(self, k=5):
        self.k = k

    def fit(self, X, y):
        X = as_float_matrix(X)
        y = as_label_vector(y, X.shape[0])
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.k > X.shape[0]:
            raise KTooLargeError(f"k={self.k} exceeds {X.shape[0]} training rows")
        self.train_rows_ = X
        self.train_labels_ = y
        self.classes_ = np.unique(y)
        self._encoded = np.searchsorted(self.classes_, y)
        self.n_features_in_ = X.shape[1]
        return self

    def predict_proba(self, X):
        check_fitted(self, "train_rows_")
        X = as_float_matrix(X)
        check_width(X, self.n_features_in_)
        train = self.train_rows_
        train_sq = np.einsum("ij,ij->i", train, train)
        probs = np.zeros((X.shape[0], self.classes_.size))
        for lo in range(0, X.shape[0], _KNN_CHUNK):
            chunk = X[lo : lo + _KNN_CHUNK]
            d2 = np.maximum(
                np.einsum("ij,ij->i", chunk, chunk)[:, None]
                + train_sq[None, :]
                - 2.0 * chunk @ train.T,
                0.0,
            )
            for r in range(chunk.shape[0]):
                nearest = np.lexsort((self.train_labels_, d2[r]))[: self.k]
                votes = np.bincount(
                    self._encoded[nearest], minlength=self.classes_.size
                )
                probs[lo + r] = votes / self.k
        return probs

    def predict(self, X):
        return self.classes_[np.argmax(self.predict_proba(X), axis=1)]


def softmax(margins: np.ndarray) -> np.ndarray:
    """Row-wise softmax, shifted for stability (shift-invariant by design)."""
    shifted = margins - margins.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


class LinearSvmClassifier(BaseEstimator, ClassifierMixin):
    """One-vs-rest linear SVM trained by seeded primal subgradient descent.

    Minimizes hinge loss plus an L2 penalty of strength 1/C with the
    classic 1/(lambda*t) step schedule. The bias rides along as an
    augmented constant feature, so it is regularized like the weights.

    Subgradient steps are scale-sensitive, so training happens on rows
    divided by the largest training-row norm (one global scalar, no
    per-feature normalization); the scalar is folded back into the stored
    weights, and predictions read raw features.
    """

    def __init__(self, c=1.0, epochs=30, seed=0):
        self.c = c
        self.epochs = epochs
        self.seed = seed

    def fit(self, X, y):
        X = as_float_matrix(X)
        y = as_label_vector(y, X.shape[0])
        if self.c <= 0:
            raise ValueError("C must be positive")
        self.classes_ = np.unique(y)
        if self.classes_.size < 2:
            raise SingleClassError("SVM needs at least two classes")
        n, d = X.shape
        scale = float(np.max(np.linalg.norm(X, axis=1)))
        if scale <= 0.0:
            scale = 1.0
        aug = np.hstack([X / scale, np.ones((n, 1))])
        signs = np.where(y[:, None] == self.classes_[None, :], 1.0, -1.0)
        lam = 1.0 / (self.c * n)
        weights = np.zeros((self.classes_.size, d + 1))
        rng = np.random.default_rng(self.seed)
        t = 1
        for _ in range(self.epochs):
            for i in rng.permutation(n):
                step = 1.0 / (lam * t)
                weights *= 1.0 - 1.0 / t  # == (1 - step*lam)
                viol = signs[i] * (weights @ aug[i]) < 1.0
                if np.any(viol):
                    weights[viol] += step * signs[i][viol, None] * aug[i]
                t += 1
        self.weights_ = weights[:, :d] / scale
        self.biases_ = weights[:, d]
        self.n_features_in_ = d
        return self

    def decision_function(self, X):
        check_fitted(self, "weights_")
        X = as_float_matrix(X)
        check_width(X, self.n_features_in_)
        return X @ self.weights_.T + self.biases_

    def predict_proba(self, X):
        return softmax(self.decision_function(X))

    def predict(self, X):
        return self.classes_[np.argmax(self.decision_function(X), axis=1)]


@dataclass(frozen=True)
class _Tree:
    """Flat node arrays; feature == -1 marks a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    dist: np.ndarray  # (n_nodes, n_classes) leaf class distributions

    def proba(self, X: np.ndarray) -> np.ndarray:
        at = np.zeros(X.shape[0], dtype=np.intp)
        active = np.flatnonzero(self.feature[at] >= 0)
        while active.size:
            node = at[active]
            go_left = X[active, self.feature[node]] <= self.threshold[node]
            at[active] = np.where(go_left, self.left[node], self.right[node])
            active = active[self.feature[at[active]] >= 0]
        return self.dist[at]


def _best_split(Xc: np.ndarray, y_enc: np.ndarray, n_classes: int):
    """Lowest-Gini split over candidate columns; returns (col, threshold).

    Columns must be passed in ascending feature order: scanning keeps the
    first strict improvement, which realizes the lowest-feature tie rule;
    within a column np.argmin keeps the lowest threshold.
    """
    n = Xc.shape[0]
    order = np.argsort(Xc, axis=0, kind="stable")
    sorted_x = np.take_along_axis(Xc, order, axis=0)
    onehot = np.zeros((n, n_classes))
    onehot[np.arange(n), y_enc] = 1.0
    cum = np.cumsum(onehot[order], axis=0)  # (n, m, C)
    left_counts = cum[:-1]  # split after sorted position 0..n-2
    right_counts = cum[-1] - left_counts
    nl = np.arange(1, n, dtype=np.float64)[:, None]
    nr = n - nl
    gini_left = 1.0 - np.sum((left_counts / nl[..., None]) ** 2, axis=2)
    gini_right = 1.0 - np.sum((right_counts / nr[..., None]) ** 2, axis=2)
    score = (nl * gini_left + nr * gini_right) / n
    score[sorted_x[1:] <= sorted_x[:-1]] = np.inf  # only between distinct values
    best_col, best_score, best_thr = -1, np.inf, 0.0
    for col in range(Xc.shape[1]):
        pos = int(np.argmin(score[:, col]))
        s = score[pos, col]
        if s < best_score:  # strict: earlier columns win ties
            lo, hi = sorted_x[pos, col], sorted_x[pos + 1, col]
            thr = 0.5 * (lo + hi)
            if thr >= hi:  # midpoint rounded onto hi; keep the split real
                thr = lo
            best_col = col
            best_score = s
            best_thr = thr
    if not np.isfinite(best_score):
        return None
    return best_col, best_thr


def _grow_tree(X, y_enc, n_classes, rng, n_candidates):
    feature, threshold, left, right, dist = [], [], [], [], []

    def new_node():
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        dist.append(None)
        return len(feature) - 1

    root = new_node()
    stack = [(np.arange(X.shape[0]), root)]
    while stack:
        rows, nid = stack.pop()
        labels = y_enc[rows]
        counts = np.bincount(labels, minlength=n_classes)
        split = None
        if rows.size >= 2 and np.max(counts) < rows.size:  # impure, splittable
            cand = np.sort(rng.choice(X.shape[1], size=n_candidates, replace=False))
            found = _best_split(X[np.ix_(rows, cand)], labels, n_classes)
            if found is not None:
                split = (int(cand[found[0]]), found[1])
        if split is None:
            dist[nid] = counts / rows.size
            continue
        feature[nid], threshold[nid] = split
        go_left = X[rows, split[0]] <= split[1]
        left[nid] = new_node()
        right[nid] = new_node()
        stack.append((rows[~go_left], right[nid]))
        stack.append((rows[go_left], left[nid]))

    dist_arr = np.zeros((len(feature), n_classes))
    for i, d in enumerate(dist):
        if d is not None:
            dist_arr[i] = d
    return _Tree(
        feature=np.array(feature, dtype=np.intp),
        threshold=np.array(threshold, dtype=np.float64),
        left=np.array(left, dtype=np.intp),
        right=np.array(right, dtype=np.intp),
        dist=dist_arr,
    )


class RandomForestClassifier(BaseEstimator, ClassifierMixin):
    """Bagged Gini decision trees grown to purity with sqrt(d) candidate
    features per split; probabilities are the mean of per-tree leaf
    class distributions."""

    def __init__(self, n_estimators=40, seed=0, bootstrap=True, max_features="sqrt"):
        self.n_estimators = n_estimators
        self.seed = seed
        self.bootstrap = bootstrap
        self.max_features = max_features

    def _n_candidates(self, d: int) -> int:
        if self.max_features == "sqrt":
            return max(1, int(math.sqrt(d)))
        if self.max_features == "all":
            return d
        raise ValueError(f"unknown max_features {self.max_features!r}")

    def fit(self, X, y):
        X = as_float_matrix(X)
        y = as_label_vector(y, X.shape[0])
        if self.n_estimators < 1:
            raise ValueError("n_estimators must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        self.classes_ = np.unique(y)
        y_enc = np.searchsorted(self.classes_, y)
        n_cand = self._n_candidates(X.shape[1])
        self.trees_ = []
        for t in range(self.n_estimators):
            rng = np.random.default_rng(np.random.SeedSequence([self.seed, t]))
            if self.bootstrap:
                rows = rng.integers(0, X.shape[0], size=X.shape[0])
            else:
                rows = np.arange(X.shape[0])
            self.trees_.append(
                _grow_tree(X[rows], y_enc[rows], self.classes_.size, rng, n_cand)
            )
        self.n_features_in_ = X.shape[1]
        return self

    def predict_proba(self, X):
        check_fitted(self, "trees_")
        X = as_float_matrix(X)
        check_width(X, self.n_features_in_)
        acc = np.zeros((X.shape[0], self.classes_.size))
        for tree in self.trees_:
            acc += tree.proba(X)
        return acc / len(self.trees_)

    def predict(self, X):
        return self.classes_[np.argmax(self.predict_proba(X), axis=1)]


@dataclass(frozen=True)
class EvalResult:
    accuracy: float
    confusion: np.ndarray  # rows true, columns predicted
    class_ids: np.ndarray


def evaluate(model, test: FeatureMatrix) -> EvalResult:
    """Accuracy plus confusion matrix over the model's class set."""
    class_ids = np.asarray(model.classes_)
    if np.any(~np.isin(test.labels, class_ids)):
        raise UnknownLabelError("test labels outside the trained class set")
    predicted = model.predict(test.rows)
    true_pos = np.searchsorted(class_ids, test.labels)
    pred_pos = np.searchsorted(class_ids, predicted)
    confusion = np.zeros((class_ids.size, class_ids.size), dtype=np.int64)
    np.add.at(confusion, (true_pos, pred_pos), 1)
    accuracy = float(np.trace(confusion) / confusion.sum())
    return EvalResult(accuracy=accuracy, confusion=confusion, class_ids=class_ids)


def evaluate_runs(make_model, train: FeatureMatrix, test: FeatureMatrix, n_runs: int, base_seed: int = 0):
    """Mean/std accuracy across reseeded runs (for randomized models)."""
    accs = []
    for run in range(n_runs):
        model = make_model(base_seed + run)
        model.fit(train.rows, train.labels)
        accs.append(evaluate(model, test).accuracy)
    accs = np.array(accs)
    return float(accs.mean()), float(accs.std()), accs
