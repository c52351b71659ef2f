"""Core domain types for side-channel application fingerprinting.

Frequencies are discrete per-cluster levels (kHz). Downstream features work
on level *indexes* rather than raw kHz values, which keeps feature
magnitudes small and removes any need for normalization. Timestamps are
integer microseconds throughout. All types here are immutable after
construction and safe to share across workers.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import (
    BadClusterError,
    EmptyTraceError,
    NonMonotonicTimeError,
    UnknownFrequencyError,
    UnknownLabelError,
)

UNKNOWN_ID = -1
UNKNOWN_LABEL = "unknown"


def _frozen(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class FrequencyTable:
    """Ordered set of frequency levels (kHz) for one CPU cluster."""

    cluster_id: int
    levels: np.ndarray

    def __post_init__(self):
        levels = _frozen(self.levels, np.int64)
        if levels.ndim != 1 or levels.size == 0:
            raise ValueError("frequency table needs at least one level")
        if np.any(levels <= 0):
            raise ValueError("frequency levels must be positive")
        if np.any(np.diff(levels) <= 0):
            raise ValueError("frequency levels must be strictly increasing")
        object.__setattr__(self, "levels", levels)

    @property
    def size(self) -> int:
        return int(self.levels.size)


def default_tables() -> tuple[FrequencyTable, ...]:
    """Shipped dual-cluster default: 16 evenly spaced low-cluster levels
    (307200-1593600 kHz) and 18 high-cluster levels (307200-2150400 kHz).

    Real OPP tables differ per SoC and are rarely evenly spaced; the
    pipeline only depends on index membership, so this stand-in is fine.
    """
    low = np.rint(np.linspace(307_200, 1_593_600, 16)).astype(np.int64)
    high = np.rint(np.linspace(307_200, 2_150_400, 18)).astype(np.int64)
    return (FrequencyTable(0, low), FrequencyTable(1, high))


def freq_to_index(table: FrequencyTable, freq_khz: int) -> int:
    """0-based position of freq_khz in the table's level list."""
    pos = int(np.searchsorted(table.levels, freq_khz))
    if pos >= table.size or table.levels[pos] != freq_khz:
        raise UnknownFrequencyError(
            f"{freq_khz} kHz is not a level of cluster {table.cluster_id}"
        )
    return pos


def freqs_to_indexes(table: FrequencyTable, freq_khz: np.ndarray) -> np.ndarray:
    """Vectorized freq_to_index over an array of kHz values."""
    freq_khz = np.asarray(freq_khz, dtype=np.int64)
    pos = np.searchsorted(table.levels, freq_khz)
    pos = np.minimum(pos, table.size - 1)
    bad = table.levels[pos] != freq_khz
    if np.any(bad):
        first = freq_khz[bad][0]
        raise UnknownFrequencyError(
            f"{int(first)} kHz is not a level of cluster {table.cluster_id}"
        )
    return pos


def table_offsets(tables) -> np.ndarray:
    """Start of each cluster's block in the combined index space."""
    sizes = [t.size for t in tables]
    return np.concatenate(([0], np.cumsum(sizes)[:-1])).astype(np.int64)


def total_levels(tables) -> int:
    return int(sum(t.size for t in tables))


def global_index(cluster_id: int, local_index: int, tables) -> int:
    """Map a (cluster, local level) pair onto the combined index space.

    Cluster c's levels occupy the contiguous block starting after all levels
    of lower-numbered clusters.
    """
    if not 0 <= cluster_id < len(tables):
        raise BadClusterError(f"cluster {cluster_id} not in [0, {len(tables)})")
    table = tables[cluster_id]
    if not 0 <= local_index < table.size:
        raise BadClusterError(
            f"level index {local_index} not valid for cluster {cluster_id} "
            f"({table.size} levels)"
        )
    return int(table_offsets(tables)[cluster_id]) + local_index


@dataclass(frozen=True)
class ClusterSamples:
    """Polled (start_us, end_us, freq_khz) records for one cluster."""

    start_us: np.ndarray
    end_us: np.ndarray
    freq_khz: np.ndarray

    def __post_init__(self):
        start = _frozen(self.start_us, np.int64)
        end = _frozen(self.end_us, np.int64)
        freq = _frozen(self.freq_khz, np.int64)
        if start.size == 0:
            raise EmptyTraceError("cluster has no samples")
        if not (start.shape == end.shape == freq.shape):
            raise ValueError("sample arrays must have equal length")
        if np.any(np.diff(start) < 0):
            raise NonMonotonicTimeError("start times go backwards")
        if np.any(end < start):
            raise NonMonotonicTimeError("a sample ends before it starts")
        object.__setattr__(self, "start_us", start)
        object.__setattr__(self, "end_us", end)
        object.__setattr__(self, "freq_khz", freq)

    def __len__(self) -> int:
        return int(self.start_us.size)


@dataclass(frozen=True)
class DvfsTrace:
    """One capture of frequency-state samples across all clusters."""

    app_label: str | None
    clusters: tuple[ClusterSamples, ...]
    duration_us: int

    def __post_init__(self):
        object.__setattr__(self, "clusters", tuple(self.clusters))
        if len(self.clusters) < 1:
            raise ValueError("trace needs at least one cluster")
        if self.duration_us <= 0:
            raise ValueError("duration must be positive")

    @property
    def n_clusters(self) -> int:
        return len(self.clusters)


def validate_trace_frequencies(trace: DvfsTrace, tables) -> None:
    """Check every sampled kHz value against its cluster's table."""
    if trace.n_clusters != len(tables):
        raise BadClusterError(
            f"trace has {trace.n_clusters} clusters, expected {len(tables)}"
        )
    for samples, table in zip(trace.clusters, tables):
        freqs_to_indexes(table, samples.freq_khz)


@dataclass(frozen=True)
class EmTrace:
    """Uniformly sampled scalar emission signal."""

    app_label: str | None
    samples: np.ndarray
    sample_rate_hz: float
    duration_s: float

    def __post_init__(self):
        if self.sample_rate_hz <= 0:
            raise ValueError("sample rate must be positive")
        samples = _frozen(self.samples, np.float32)
        expected = round(self.sample_rate_hz * self.duration_s)
        if abs(samples.size - expected) > 1:
            raise ValueError(
                f"{samples.size} samples inconsistent with "
                f"{self.sample_rate_hz} Hz x {self.duration_s} s"
            )
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return int(self.samples.size)


@dataclass(frozen=True)
class UniformSeries:
    """Evenly sampled values (level indexes or EM amplitudes)."""

    values: np.ndarray
    dt_us: float
    origin_us: int = 0

    def __post_init__(self):
        if self.dt_us <= 0:
            raise ValueError("dt must be positive")
        values = _frozen(self.values, np.float64)
        if values.size == 0:
            raise ValueError("series must be non-empty")
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return int(self.values.size)


class FeatureKind(Enum):
    TIME_DOMAIN = "time"
    FREQ_DOMAIN = "freq"


@dataclass(frozen=True)
class FeatureMatrix:
    """Signatures as rows, features as columns, with integer class ids."""

    rows: np.ndarray
    labels: np.ndarray
    kind: FeatureKind

    def __post_init__(self):
        rows = _frozen(self.rows, np.float64)
        labels = _frozen(self.labels, np.int64)
        if rows.ndim != 2:
            raise ValueError("rows must be 2-D")
        if labels.ndim != 1 or labels.size != rows.shape[0]:
            raise ValueError("labels must align with rows")
        if rows.size and not np.all(np.isfinite(rows)):
            raise ValueError("feature matrix contains NaN or Inf")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "labels", labels)

    @property
    def n_signatures(self) -> int:
        return int(self.rows.shape[0])

    @property
    def n_features(self) -> int:
        return int(self.rows.shape[1])

    def class_ids(self) -> np.ndarray:
        return np.unique(self.labels)

    def select(self, idx) -> "FeatureMatrix":
        return FeatureMatrix(self.rows[idx], self.labels[idx], self.kind)


@dataclass(frozen=True)
class DatasetSplit:
    """Stratified train/test partition of a feature matrix."""

    train: FeatureMatrix
    test: FeatureMatrix
    split_ratio: float
    seed: int
    train_idx: np.ndarray
    test_idx: np.ndarray


@dataclass(frozen=True)
class LabelCodec:
    """String labels at the boundary, dense integer ids inside.

    Ids are assigned in sorted label order; -1 is reserved for unknown.
    """

    classes: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.classes)) != len(self.classes):
            raise ValueError("duplicate class labels")
        if UNKNOWN_LABEL in self.classes:
            raise ValueError(f"{UNKNOWN_LABEL!r} is reserved for the open set")

    @classmethod
    def from_labels(cls, labels) -> "LabelCodec":
        names = sorted(set(labels))
        if any(name is None for name in names):
            raise UnknownLabelError("unlabeled trace in a labeled corpus")
        return cls(tuple(names))

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    def id_of(self, label: str | None) -> int:
        if label is None or label == UNKNOWN_LABEL:
            return UNKNOWN_ID
        try:
            return self.classes.index(label)
        except ValueError:
            raise UnknownLabelError(f"label {label!r} not in codec") from None

    def encode(self, labels) -> np.ndarray:
        return np.array([self.id_of(lab) for lab in labels], dtype=np.int64)

    def name_of(self, class_id: int) -> str:
        if class_id == UNKNOWN_ID:
            return UNKNOWN_LABEL
        if not 0 <= class_id < self.n_classes:
            raise UnknownLabelError(f"class id {class_id} not in codec")
        return self.classes[class_id]

    def decode(self, ids) -> list[str]:
        return [self.name_of(int(i)) for i in ids]
