"""Raw traces to fixed-length uniform series, plus the stratified split.

Interpolation is zero-order hold anchored at each sample's start time: DVFS
states are discrete, intermediate frequencies do not exist physically, and
the start timestamp marks when the state was observed (the end timestamp
includes read latency). Short traces hold their final state to full length;
long traces are truncated — classifiers need fixed-width rows.
"""

import numpy as np

from .errors import ClassTooSmallError, EmptyTraceError, LengthMismatchError
from .model import (
    ClusterSamples,
    DatasetSplit,
    FeatureMatrix,
    FrequencyTable,
    UniformSeries,
    freqs_to_indexes,
)


def interpolate_dvfs(
    samples: ClusterSamples,
    table: FrequencyTable,
    dt_us: int,
    duration_us: int,
    index_offset: int = 0,
) -> UniformSeries:
    """Zero-order-hold resample of one cluster's log onto a uniform grid.

    Grid point t takes the level index of the last sample starting at or
    before t; points before the first sample hold the first value.
    ``index_offset`` shifts local level indexes into the combined index
    space (pass the cluster's block offset).
    """
    if len(samples) == 0:
        raise EmptyTraceError("cannot interpolate an empty cluster")
    if dt_us <= 0:
        raise ValueError("dt must be positive")
    n = int(round(duration_us / dt_us))
    if n < 1:
        raise ValueError("duration shorter than one grid step")
    grid = np.arange(n, dtype=np.int64) * int(dt_us)
    at = np.searchsorted(samples.start_us, grid, side="right") - 1
    at = np.clip(at, 0, len(samples) - 1)
    indexes = freqs_to_indexes(table, samples.freq_khz) + index_offset
    return UniformSeries(indexes[at].astype(np.float64), float(dt_us), 0)


def append_clusters(series_per_cluster) -> np.ndarray:
    """Concatenate per-cluster series values, cluster order preserved."""
    series_per_cluster = list(series_per_cluster)
    if not series_per_cluster:
        raise LengthMismatchError("no series to append")
    first = series_per_cluster[0]
    for s in series_per_cluster[1:]:
        if len(s) != len(first) or s.dt_us != first.dt_us:
            raise LengthMismatchError(
                "per-cluster series must share length and sampling step"
            )
    return np.concatenate([s.values for s in series_per_cluster])


def resample_em(trace, target_len: int) -> UniformSeries:
    """Truncate or zero-pad an EM trace to the canonical sample count."""
    if target_len <= 0:
        raise ValueError("target length must be positive")
    values = np.zeros(target_len, dtype=np.float64)
    keep = min(len(trace), target_len)
    values[:keep] = trace.samples[:keep]
    return UniformSeries(values, 1e6 / trace.sample_rate_hz, 0)


def _class_train_counts(labels: np.ndarray, ratio: float) -> dict[int, int]:
    """Largest-remainder apportionment of round(ratio*N) across classes.

    Keeps each class within one signature of its proportional share while
    the total matches the global rounding exactly.
    """
    ids, counts = np.unique(labels, return_counts=True)
    target_total = round(ratio * labels.size)
    shares = ratio * counts
    base = np.floor(shares).astype(int)
    remainder = target_total - int(base.sum())
    if remainder > 0:
        order = np.lexsort((ids, -(shares - base)))  # largest fraction first
        for pos in order[:remainder]:
            base[pos] += 1
    elif remainder < 0:
        order = np.lexsort((ids, shares - base))  # smallest fraction first
        for pos in order[: -remainder]:
            base[pos] -= 1
    return dict(zip(ids.tolist(), base.tolist()))


def split_dataset(matrix: FeatureMatrix, ratio: float, seed: int) -> DatasetSplit:
    """Seeded stratified shuffle split; train gets round(ratio * N) rows."""
    if not 0.0 < ratio < 1.0:
        raise ValueError("split ratio must be within (0, 1)")
    ids, counts = np.unique(matrix.labels, return_counts=True)
    too_small = ids[counts < 2]
    if too_small.size:
        raise ClassTooSmallError(
            f"class {int(too_small[0])} has fewer than 2 signatures"
        )
    take = _class_train_counts(matrix.labels, ratio)
    rng = np.random.default_rng(seed)
    train_parts, test_parts = [], []
    for class_id in ids:  # ascending id order keeps the shuffle reproducible
        members = np.flatnonzero(matrix.labels == class_id)
        members = members[rng.permutation(members.size)]
        k = take[int(class_id)]
        train_parts.append(members[:k])
        test_parts.append(members[k:])
    train_idx = np.sort(np.concatenate(train_parts))
    test_idx = np.sort(np.concatenate(test_parts))
    return DatasetSplit(
        train=matrix.select(train_idx),
        test=matrix.select(test_idx),
        split_ratio=ratio,
        seed=seed,
        train_idx=train_idx,
        test_idx=test_idx,
    )
