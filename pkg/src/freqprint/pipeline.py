"""Corpus-to-feature assembly for the three classification pipelines.

``dvfs-time`` feeds interpolated level-index series straight into windowed
PCA; ``dvfs-freq`` and ``em-freq`` insert the windowed magnitude spectrum
first. Every path produces a FeatureMatrix plus the FeatureLayout that
windowed PCA and the detection-latency replay need.
"""

from dataclasses import dataclass

import numpy as np

from .errors import LengthMismatchError
from .model import (
    FeatureKind,
    FeatureMatrix,
    LabelCodec,
    UniformSeries,
    table_offsets,
)
from .preprocess import interpolate_dvfs, resample_em
from .spectral import FeatureLayout, WindowPlan, windowed_spectrum_rows
from .util import pmap

PIPELINES = ("dvfs-time", "dvfs-freq", "em-freq")


@dataclass(frozen=True)
class DvfsFeatureParams:
    """Canonical DVFS grid: 0.5 ms steps over a 10 s capture, 100 windows."""

    dt_us: int = 500
    duration_s: float = 10.0
    n_windows: int = 100
    taper: str = "rect"


@dataclass(frozen=True)
class EmFeatureParams:
    duration_s: float = 10.0
    n_windows: int = 100
    taper: str = "rect"


@dataclass(frozen=True)
class FeatureSet:
    """A built feature matrix together with its window geometry."""

    matrix: FeatureMatrix
    layout: FeatureLayout
    window_ms: float
    codec: LabelCodec


def dvfs_index_series(trace, tables, params: DvfsFeatureParams) -> list[UniformSeries]:
    """Per-cluster uniform series in the combined (global) index space."""
    duration_us = int(round(params.duration_s * 1e6))
    offsets = table_offsets(tables)
    return [
        interpolate_dvfs(samples, table, params.dt_us, duration_us, int(offsets[c]))
        for c, (samples, table) in enumerate(zip(trace.clusters, tables))
    ]


def _encode_labels(traces, codec):
    if codec is None:
        codec = LabelCodec.from_labels([t.app_label for t in traces])
    labels = codec.encode([t.app_label for t in traces])
    return codec, labels


def build_dvfs_features(
    traces, tables, params: DvfsFeatureParams, kind: FeatureKind, codec=None
) -> FeatureSet:
    """Interpolate, index-map and (for FREQ_DOMAIN) transform a DVFS corpus."""
    if not traces:
        raise LengthMismatchError("empty corpus")
    codec, labels = _encode_labels(traces, codec)
    per_trace = pmap(lambda tr: dvfs_index_series(tr, tables, params), traces)
    n_samples = len(per_trace[0][0])
    plan = WindowPlan.from_series(n_samples, params.dt_us, params.n_windows)

    # one (n_traces, n_samples) block per cluster, cluster-major like the layout
    blocks = [
        np.vstack([series[c].values for series in per_trace])
        for c in range(len(tables))
    ]
    if kind is FeatureKind.TIME_DOMAIN:
        rows = np.hstack([b[:, : plan.covered_samples] for b in blocks])
        layout = FeatureLayout.tiled(len(tables), plan.n_windows, plan.samples_per_window)
    else:
        rows = np.hstack([windowed_spectrum_rows(b, plan, params.taper) for b in blocks])
        layout = FeatureLayout.tiled(len(tables), plan.n_windows, plan.n_bins)
    matrix = FeatureMatrix(rows, labels, kind)
    return FeatureSet(matrix, layout, plan.window_ms, codec)


def build_em_features(em_traces, params: EmFeatureParams, codec=None) -> FeatureSet:
    """Windowed spectra of EM traces; all traces must share one sample rate."""
    if not em_traces:
        raise LengthMismatchError("empty corpus")
    rate = em_traces[0].sample_rate_hz
    if any(t.sample_rate_hz != rate for t in em_traces):
        raise LengthMismatchError("EM corpus mixes sample rates")
    codec, labels = _encode_labels(em_traces, codec)
    target_len = int(round(rate * params.duration_s))
    dt_us = 1e6 / rate
    series = pmap(lambda tr: resample_em(tr, target_len), em_traces)
    plan = WindowPlan.from_series(target_len, dt_us, params.n_windows)
    rows = windowed_spectrum_rows(
        np.vstack([s.values for s in series]), plan, params.taper
    )
    layout = FeatureLayout.tiled(1, plan.n_windows, plan.n_bins)
    matrix = FeatureMatrix(rows, labels, FeatureKind.FREQ_DOMAIN)
    return FeatureSet(matrix, layout, plan.window_ms, codec)


def build_features(pipeline: str, dvfs_traces, em_traces, tables, dvfs_params, em_params, codec=None) -> FeatureSet:
    """Dispatch one of the three pipelines by name."""
    if pipeline == "dvfs-time":
        return build_dvfs_features(dvfs_traces, tables, dvfs_params, FeatureKind.TIME_DOMAIN, codec)
    if pipeline == "dvfs-freq":
        return build_dvfs_features(dvfs_traces, tables, dvfs_params, FeatureKind.FREQ_DOMAIN, codec)
    if pipeline == "em-freq":
        loaded = [t for t in em_traces if t is not None]
        if len(loaded) != len(em_traces):
            raise LengthMismatchError("corpus has entries without EM traces")
        return build_em_features(loaded, em_params, codec)
    raise ValueError(f"unknown pipeline {pipeline!r} (expected one of {PIPELINES})")
