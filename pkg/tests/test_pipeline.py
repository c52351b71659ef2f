"""End-to-end feature assembly for the three pipelines."""

import numpy as np
import pytest

from freqprint import (
    FeatureKind,
    GovernorConfig,
    default_profiles,
    default_tables,
    generate_corpus,
    synthesize_em,
)
from freqprint.errors import LengthMismatchError
from freqprint.model import total_levels
from freqprint.pipeline import (
    DvfsFeatureParams,
    EmFeatureParams,
    build_dvfs_features,
    build_em_features,
    build_features,
    dvfs_index_series,
)
from freqprint.preprocess import append_clusters
from freqprint.spectral import time_domain_features

TABLES = default_tables()
PARAMS = DvfsFeatureParams(dt_us=500, duration_s=1.0, n_windows=10)


def _corpus(n_apps=3, n_traces=2):
    return generate_corpus(
        default_profiles()[:n_apps], GovernorConfig(), TABLES, n_traces, 1.0, 17
    )


def test_time_domain_matrix_shape_and_values():
    traces = _corpus()
    fs = build_dvfs_features(traces, TABLES, PARAMS, FeatureKind.TIME_DOMAIN)
    # 2000 samples per cluster, 10 windows of 200, 2 clusters appended
    assert fs.matrix.rows.shape == (6, 4000)
    assert fs.layout.total_width == 4000
    assert fs.window_ms == pytest.approx(100.0)
    assert fs.matrix.kind is FeatureKind.TIME_DOMAIN
    values = fs.matrix.rows
    assert values.min() >= 0
    assert values.max() < total_levels(TABLES)
    # labels follow the codec's sorted order
    decoded = fs.codec.decode(fs.matrix.labels)
    assert decoded == [t.app_label for t in traces]


def test_time_domain_rows_equal_appended_series():
    traces = _corpus(n_apps=1, n_traces=1)
    fs = build_dvfs_features(traces, TABLES, PARAMS, FeatureKind.TIME_DOMAIN)
    series = dvfs_index_series(traces[0], TABLES, PARAMS)
    appended = append_clusters(series)
    assert np.array_equal(fs.matrix.rows[0], appended[: fs.layout.total_width])


def test_time_domain_features_passthrough_contract():
    traces = _corpus(n_apps=2, n_traces=1)
    per_sig = [dvfs_index_series(t, TABLES, PARAMS) for t in traces]
    matrix = time_domain_features(per_sig, [0, 1])
    assert matrix.rows.shape == (2, 4000)
    twice = time_domain_features([per_sig[0], per_sig[0]], [0, 0])
    assert np.array_equal(twice.rows[0], twice.rows[1])


def test_freq_domain_matrix_shape():
    traces = _corpus()
    fs = build_dvfs_features(traces, TABLES, PARAMS, FeatureKind.FREQ_DOMAIN)
    # 200-sample windows pad to 256 -> 129 bins; 10 windows x 2 clusters
    assert fs.matrix.rows.shape == (6, 2 * 10 * 129)
    assert fs.layout.total_width == 2580
    assert len(fs.layout.slices) == 20
    assert fs.matrix.kind is FeatureKind.FREQ_DOMAIN


def test_em_pipeline_shape():
    traces = _corpus(n_apps=2, n_traces=1)
    ems = [synthesize_em(t, TABLES, 16000.0, 0.01, i) for i, t in enumerate(traces)]
    fs = build_em_features(ems, EmFeatureParams(duration_s=1.0, n_windows=8))
    # 16000 samples, 8 windows of 2000 -> nfft 2048 -> 1025 bins
    assert fs.matrix.rows.shape == (2, 8 * 1025)
    assert fs.window_ms == pytest.approx(125.0)


def test_build_features_dispatch_and_em_requirement():
    traces = _corpus(n_apps=2, n_traces=1)
    fs = build_features("dvfs-time", traces, [None, None], TABLES, PARAMS, EmFeatureParams())
    assert fs.matrix.kind is FeatureKind.TIME_DOMAIN
    with pytest.raises(LengthMismatchError):
        build_features("em-freq", traces, [None, None], TABLES, PARAMS, EmFeatureParams())
    with pytest.raises(ValueError):
        build_features("nope", traces, [None, None], TABLES, PARAMS, EmFeatureParams())


def test_feature_determinism_bit_identical():
    traces = _corpus()
    a = build_dvfs_features(traces, TABLES, PARAMS, FeatureKind.FREQ_DOMAIN)
    b = build_dvfs_features(traces, TABLES, PARAMS, FeatureKind.FREQ_DOMAIN)
    assert np.array_equal(a.matrix.rows, b.matrix.rows)
