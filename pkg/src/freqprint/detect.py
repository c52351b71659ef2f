"""Window-incremental detection latency and open-set rejection metrics.

Detection latency replays training with growing window prefixes: for each
prefix the windowed PCA and the classifier are refit from scratch and the
per-application test accuracy recorded. An application's detection time is
the first prefix (in window multiples) reaching the accuracy threshold;
applications that never reach it get the sentinel maximum time.

Open-set evaluation rejects a row as unknown when its best class
probability falls below a decision threshold, and sweeps that threshold.
"""

import json
from dataclasses import dataclass

import numpy as np

from .errors import UnknownLabelError
from .model import UNKNOWN_ID, FeatureMatrix
from .pca import apply_pca, fit_windowed_pca
from .spectral import FeatureLayout
from .util import atomic_write_text, pmap


def classify_with_rejection(model, rows, threshold: float) -> np.ndarray:
    """Argmax class when its probability reaches the threshold, else -1."""
    if not 0.0 <= threshold <= 1.0:
        raise ValueError("threshold must be within [0, 1]")
    probs = model.predict_proba(rows)
    labels = np.asarray(model.classes_)[np.argmax(probs, axis=1)]
    labels[probs.max(axis=1) < threshold] = UNKNOWN_ID
    return labels


@dataclass(frozen=True)
class OpenSetReport:
    """Known/unknown metrics at one decision threshold.

    Precision and recall score the binary known-vs-unknown decision with
    "known" as the positive class; a rejected known row counts against
    known accuracy (a false negative).
    """

    decision_threshold: float
    known_accuracy: float
    unknown_accuracy: float
    known_retention: float  # fraction of known rows not rejected
    precision: float
    recall: float


def open_set_eval(model, known_test: FeatureMatrix, unknown_test: FeatureMatrix, thresholds) -> list[OpenSetReport]:
    """Sweep rejection thresholds against held-out known and unknown rows."""
    if np.any(unknown_test.labels != UNKNOWN_ID):
        raise UnknownLabelError("unknown_test rows must all carry the unknown id")
    known_probs = model.predict_proba(known_test.rows)
    unknown_probs = model.predict_proba(unknown_test.rows)
    known_pred = np.asarray(model.classes_)[np.argmax(known_probs, axis=1)]
    known_max = known_probs.max(axis=1)
    unknown_max = unknown_probs.max(axis=1)
    n_known = known_test.n_signatures
    n_unknown = unknown_test.n_signatures

    reports = []
    for threshold in thresholds:
        if not 0.0 <= threshold <= 1.0:
            raise ValueError("thresholds must be within [0, 1]")
        keep_known = known_max >= threshold
        keep_unknown = unknown_max >= threshold
        correct = keep_known & (known_pred == known_test.labels)
        tp = int(np.sum(keep_known))
        fp = int(np.sum(keep_unknown))
        fn = n_known - tp
        reports.append(
            OpenSetReport(
                decision_threshold=float(threshold),
                known_accuracy=float(np.sum(correct) / n_known),
                unknown_accuracy=float(np.sum(~keep_unknown) / n_unknown),
                known_retention=float(tp / n_known),
                precision=float(tp / (tp + fp)) if tp + fp else 0.0,
                recall=float(tp / (tp + fn)) if tp + fn else 0.0,
            )
        )
    return reports


@dataclass(frozen=True)
class DetectionReport:
    """Per-application detection latency plus the accuracy-vs-window curves."""

    window_ms: float
    max_time_s: float
    accuracy_threshold: float
    app_ids: np.ndarray
    detection_time_s: np.ndarray  # aligned with app_ids
    per_app_accuracy: np.ndarray  # (n_windows, n_apps)
    overall_accuracy: np.ndarray  # (n_windows,)

    @property
    def n_windows(self) -> int:
        return int(self.per_app_accuracy.shape[0])

    def detection_time_of(self, app_id: int) -> float:
        pos = int(np.flatnonzero(self.app_ids == app_id)[0])
        return float(self.detection_time_s[pos])


def detection_latency(
    train: FeatureMatrix,
    test: FeatureMatrix,
    layout: FeatureLayout,
    make_model,
    window_ms: float,
    *,
    budget: int = 660,
    per_window_max: int = 17,
    evar_threshold: float = 0.99,
    accuracy_threshold: float = 0.8,
    max_time_s: float = 10.0,
) -> DetectionReport:
    """Refit the pipeline on every window prefix and time the detections.

    ``make_model`` must return a fresh, identically seeded classifier on
    every call; prefix evaluations are independent and run in parallel.
    """
    if not 0.0 <= accuracy_threshold <= 1.0:
        raise ValueError("accuracy_threshold must be within [0, 1]")
    if window_ms <= 0:
        raise ValueError("window_ms must be positive")
    n_windows = layout.n_windows
    app_ids = np.unique(test.labels)

    def eval_prefix(w: int):
        sub_layout, cols = layout.prefix(w)
        pca = fit_windowed_pca(
            train.rows[:, cols], sub_layout, budget, per_window_max, evar_threshold
        )
        model = make_model()
        model.fit(apply_pca(pca, train.rows[:, cols]), train.labels)
        predicted = model.predict(apply_pca(pca, test.rows[:, cols]))
        correct = predicted == test.labels
        per_app = np.array(
            [np.mean(correct[test.labels == app]) for app in app_ids]
        )
        return per_app, float(np.mean(correct))

    results = pmap(eval_prefix, range(1, n_windows + 1))
    per_app_accuracy = np.vstack([r[0] for r in results])
    overall = np.array([r[1] for r in results])

    detection = np.full(app_ids.size, max_time_s)
    for col in range(app_ids.size):
        hits = np.flatnonzero(per_app_accuracy[:, col] >= accuracy_threshold)
        if hits.size:
            detection[col] = (hits[0] + 1) * window_ms / 1000.0
    return DetectionReport(
        window_ms=window_ms,
        max_time_s=max_time_s,
        accuracy_threshold=accuracy_threshold,
        app_ids=app_ids,
        detection_time_s=detection,
        per_app_accuracy=per_app_accuracy,
        overall_accuracy=overall,
    )


def write_detection_csv(report: DetectionReport, path, codec=None) -> None:
    """One row per application: label, detection seconds, reached flag."""
    lines = ["app,detection_time_s,reached\n"]
    for app, t in zip(report.app_ids, report.detection_time_s):
        name = codec.name_of(int(app)) if codec is not None else str(int(app))
        hit = bool(t < report.max_time_s)
        lines.append(f"{name},{float(t)!r},{int(hit)}\n")
    atomic_write_text(path, "".join(lines))


def write_accuracy_curve_csv(report: DetectionReport, path, codec=None) -> None:
    """Plot-ready curve: window index, elapsed seconds, per-app + overall."""
    names = [
        codec.name_of(int(a)) if codec is not None else str(int(a))
        for a in report.app_ids
    ]
    lines = ["window,elapsed_s," + ",".join(names) + ",overall\n"]
    for w in range(report.n_windows):
        elapsed = (w + 1) * report.window_ms / 1000.0
        row = [str(w + 1), repr(elapsed)]
        row += [repr(float(v)) for v in report.per_app_accuracy[w]]
        row.append(repr(float(report.overall_accuracy[w])))
        lines.append(",".join(row) + "\n")
    atomic_write_text(path, "".join(lines))


def write_openset_csv(reports: list[OpenSetReport], path) -> None:
    lines = [
        "decision_threshold,known_accuracy,unknown_accuracy,"
        "known_retention,precision,recall\n"
    ]
    for r in reports:
        lines.append(
            f"{r.decision_threshold!r},{r.known_accuracy!r},"
            f"{r.unknown_accuracy!r},{r.known_retention!r},"
            f"{r.precision!r},{r.recall!r}\n"
        )
    atomic_write_text(path, "".join(lines))


def openset_summary(reports: list[OpenSetReport]) -> str:
    return json.dumps(
        [
            {
                "decision_threshold": r.decision_threshold,
                "known_accuracy": r.known_accuracy,
                "unknown_accuracy": r.unknown_accuracy,
                "known_retention": r.known_retention,
                "precision": r.precision,
                "recall": r.recall,
            }
            for r in reports
        ],
        indent=1,
        sort_keys=True,
    ) + "\n"
