"""Synthetic labeled corpora: a utilization-driven frequency governor plus a
toy EM emitter keyed to the governor's level schedule.

The governor models an ondemand-style policy: sampled utilization above
``up_threshold`` jumps a cluster straight to its top level, anything lower
selects the smallest level whose capacity covers utilization divided by
``down_scale_factor``. Decisions happen once per sampling interval; a
separate simulated polling loop (one read every ~0.5 ms) produces the
records a cpufreq monitoring script would log.

Workload schedules cycle for the whole capture and each trace enters the
cycle at a seed-derived phase: real captures are not aligned with an
application's internal phase, and fixed alignment would leak artificial
timing structure into the corpus.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    AliasedCarrierError,
    BadClusterError,
    BadDurationError,
    EmptyProfileListError,
)
from .model import ClusterSamples, DvfsTrace, EmTrace, freqs_to_indexes, table_offsets, total_levels
from .util import pmap

# Polling-loop timing (microseconds). The base step matches the 0.5 ms
# per-acquisition delay of a busy polling script; reads land inside the step.
POLL_BASE_US = 500
POLL_JITTER_US = 50
READ_BASE_US = 150
READ_JITTER_US = 100


@dataclass(frozen=True)
class Segment:
    """One stretch of workload: duration plus mean utilization and noise."""

    duration_ms: float
    mean_utilization: float
    jitter_std: float = 0.0

    def __post_init__(self):
        if self.duration_ms <= 0:
            raise ValueError("segment duration must be positive")
        if not 0.0 <= self.mean_utilization <= 1.0:
            raise ValueError("utilization must be within [0, 1]")
        if self.jitter_std < 0:
            raise ValueError("jitter_std must be >= 0")


@dataclass(frozen=True)
class WorkloadProfile:
    """Cyclic utilization schedule for one application.

    ``affinity`` gives relative per-cluster load shares (one weight per
    cluster, weights in [0, 1] summing to 1). The dominant cluster sees the
    segment utilization in full; others see it scaled by weight ratio.
    """

    app_label: str
    segments: tuple[Segment, ...]
    affinity: tuple[float, ...] = (0.5, 0.5)

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        object.__setattr__(self, "affinity", tuple(float(w) for w in self.affinity))
        if not self.app_label:
            raise ValueError("profile needs a label")
        if not self.segments:
            raise ValueError("profile needs at least one segment")
        if not self.affinity:
            raise ValueError("profile needs at least one affinity weight")
        if any(w < 0 or w > 1 for w in self.affinity):
            raise ValueError("affinity weights must be within [0, 1]")
        if abs(sum(self.affinity) - 1.0) > 1e-9:
            raise ValueError("affinity weights must sum to 1")

    @property
    def cycle_ms(self) -> float:
        return float(sum(seg.duration_ms for seg in self.segments))


@dataclass(frozen=True)
class GovernorConfig:
    """Ondemand-style policy parameters.

    The default sampling interval sits inside the 20-80 ms range typical of
    built-in governors; custom values are allowed for experiments.
    """

    sampling_interval_ms: float = 50.0
    up_threshold: float = 0.8
    down_scale_factor: float = 0.85
    initial_level: int = 0

    def __post_init__(self):
        if self.sampling_interval_ms <= 0:
            raise ValueError("sampling interval must be positive")
        if not 0.0 < self.up_threshold < 1.0:
            raise ValueError("up_threshold must be within (0, 1)")
        if not 0.0 < self.down_scale_factor <= 1.0:
            raise ValueError("down_scale_factor must be within (0, 1]")
        if self.initial_level < 0:
            raise ValueError("initial_level must be >= 0")


def _as_seedseq(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def _segment_lookup(profile: WorkloadProfile, t_ms: np.ndarray):
    """Mean utilization and jitter std of the segment covering each time."""
    cum = np.cumsum([seg.duration_ms for seg in profile.segments])
    idx = np.searchsorted(cum, t_ms, side="right")
    idx = np.minimum(idx, len(profile.segments) - 1)
    means = np.array([seg.mean_utilization for seg in profile.segments])
    stds = np.array([seg.jitter_std for seg in profile.segments])
    return means[idx], stds[idx]


def _decide_levels(util: np.ndarray, table, config: GovernorConfig) -> np.ndarray:
    """Per-tick level decisions for one cluster."""
    cap = table.levels.astype(np.float64) / float(table.levels[-1])
    target = np.searchsorted(cap, util / config.down_scale_factor, side="left")
    target = np.minimum(target, table.size - 1)
    return np.where(util > config.up_threshold, table.size - 1, target)


def _poll(level_t_us, level_idx, table, duration_us, seedseq) -> ClusterSamples:
    """Simulated cpufreq polling loop over a level step function."""
    rng = np.random.default_rng(seedseq)
    n_max = duration_us // POLL_BASE_US + 1
    gaps = POLL_BASE_US + rng.integers(0, POLL_JITTER_US + 1, size=n_max)
    starts = np.concatenate(([0], np.cumsum(gaps)))
    starts = starts[starts < duration_us]
    reads = READ_BASE_US + rng.integers(0, READ_JITTER_US + 1, size=starts.size)
    at = np.searchsorted(level_t_us, starts, side="right") - 1
    freqs = table.levels[level_idx[at]]
    return ClusterSamples(starts, starts + reads, freqs)


def simulate_governor(profile, config, tables, duration_s, seed) -> DvfsTrace:
    """Run the governor over a workload profile and log it via polling.

    Utilization is sampled at the midpoint of each governor interval with
    Gaussian jitter (clipped to [0, 1]); the decision takes effect at the
    interval's end. Identical inputs and seed give a bit-identical trace.
    """
    if duration_s <= 0:
        raise BadDurationError(f"duration must be positive, got {duration_s}")
    if len(profile.affinity) != len(tables):
        raise BadClusterError(
            f"profile has {len(profile.affinity)} affinity weights for "
            f"{len(tables)} clusters"
        )
    if any(config.initial_level >= t.size for t in tables):
        raise BadClusterError("initial_level outside a cluster's table")

    duration_us = int(round(duration_s * 1e6))
    phase_ss, util_ss, poll_ss = _as_seedseq(seed).spawn(3)

    cycle_ms = profile.cycle_ms
    phase_ms = float(np.random.default_rng(phase_ss).uniform(0.0, cycle_ms))

    interval_us = config.sampling_interval_ms * 1000.0
    n_ticks = max(1, math.ceil(duration_us / interval_us))
    mid_ms = (np.arange(n_ticks) + 0.5) * config.sampling_interval_ms
    seg_mean, seg_std = _segment_lookup(profile, (mid_ms + phase_ms) % cycle_ms)

    weights = np.asarray(profile.affinity, dtype=np.float64)
    share = weights / weights.max() if weights.max() > 0 else weights
    noise = np.random.default_rng(util_ss).standard_normal((n_ticks, len(tables)))
    util = np.clip(
        seg_mean[:, None] * share[None, :] + seg_std[:, None] * noise, 0.0, 1.0
    )

    decision_t = np.rint((np.arange(n_ticks) + 1) * interval_us).astype(np.int64)
    level_t = np.concatenate(([0], decision_t))
    poll_children = poll_ss.spawn(len(tables))
    clusters = []
    for c, table in enumerate(tables):
        level_idx = np.concatenate(
            ([config.initial_level], _decide_levels(util[:, c], table, config))
        )
        clusters.append(_poll(level_t, level_idx, table, duration_us, poll_children[c]))
    return DvfsTrace(profile.app_label, tuple(clusters), duration_us)


def trace_seed(seed: int, profile_index: int, trace_index: int) -> np.random.SeedSequence:
    """Derived per-trace seed; distinct per (profile, trace) pair."""
    if seed < 0:
        raise ValueError("corpus seed must be non-negative")
    return np.random.SeedSequence([seed, profile_index, trace_index])


def generate_corpus(profiles, config, tables, n_traces_per_app, duration_s, seed):
    """n_traces_per_app labeled traces per profile, each from a derived seed."""
    profiles = list(profiles)
    if not profiles:
        raise EmptyProfileListError("no workload profiles given")
    if n_traces_per_app < 1:
        raise ValueError("n_traces_per_app must be >= 1")
    jobs = [
        (prof, trace_seed(seed, i, j))
        for i, prof in enumerate(profiles)
        for j in range(n_traces_per_app)
    ]
    return pmap(
        lambda job: simulate_governor(job[0], config, tables, duration_s, job[1]),
        jobs,
    )


# (label, affinity, [(ms, utilization, jitter), ...]) for the shipped app
# archetypes. Periods, duty cycles, levels and cluster affinities differ per
# app so classes are separable; jitter models background activity.
_DEFAULT_APPS = [
    ("idle_baseline", (0.5, 0.5), [(1000, 0.02, 0.01)]),
    ("music_player", (0.6, 0.4), [(1000, 0.12, 0.03)]),
    ("ebook_reader", (0.5, 0.5), [(1000, 0.22, 0.03)]),
    ("podcast_app", (0.7, 0.3), [(900, 0.18, 0.03), (600, 0.42, 0.03)]),
    ("photo_editor", (0.4, 0.6), [(1000, 0.45, 0.04)]),
    ("video_player", (0.35, 0.65), [(1000, 0.58, 0.04)]),
    ("nav_app", (0.5, 0.5), [(1000, 0.72, 0.04)]),
    ("compiler", (0.3, 0.7), [(1000, 0.96, 0.02)]),
    ("game_casual", (0.5, 0.5), [(160, 0.68, 0.05), (140, 0.2, 0.05)]),
    ("game_3d", (0.25, 0.75), [(120, 0.9, 0.04), (80, 0.4, 0.04)]),
    ("social_feed", (0.55, 0.45), [(210, 0.78, 0.05), (590, 0.1, 0.04)]),
    ("web_browser", (0.5, 0.5), [(420, 0.84, 0.05), (780, 0.16, 0.04)]),
    ("camera_app", (0.45, 0.55), [(260, 0.64, 0.04), (260, 0.34, 0.04)]),
    ("video_call", (0.5, 0.5), [(310, 0.55, 0.04), (110, 0.88, 0.04)]),
    ("installer", (0.6, 0.4), [(520, 0.9, 0.04), (1480, 0.3, 0.04)]),
    ("file_sync", (0.65, 0.35), [(980, 0.5, 0.05), (510, 0.94, 0.03), (1510, 0.1, 0.04)]),
    (
        "benchmark_suite",
        (0.4, 0.6),
        [(620, 0.1, 0.03), (620, 0.32, 0.03), (620, 0.52, 0.03), (620, 0.72, 0.03), (620, 0.92, 0.03)],
    ),
    ("ml_inference", (0.3, 0.7), [(110, 0.98, 0.02), (610, 0.26, 0.04)]),
    ("bg_service", (0.9, 0.1), [(1000, 0.36, 0.04)]),
    ("render_engine", (0.1, 0.9), [(1000, 0.8, 0.04)]),
    ("emulator", (0.2, 0.8), [(330, 0.88, 0.04), (290, 0.3, 0.04)]),
    ("crypto_wallet", (0.8, 0.2), [(140, 0.96, 0.02), (860, 0.08, 0.03)]),
]


def default_profiles(jitter_scale: float = 1.0) -> tuple[WorkloadProfile, ...]:
    """The shipped 22-application battery.

    ``jitter_scale`` scales every segment's utilization noise; 0 gives a
    clean corpus, 1 the moderate default.
    """
    profiles = []
    for label, affinity, segments in _DEFAULT_APPS:
        profiles.append(
            WorkloadProfile(
                app_label=label,
                segments=tuple(
                    Segment(ms, util, jitter * jitter_scale)
                    for ms, util, jitter in segments
                ),
                affinity=affinity,
            )
        )
    return tuple(profiles)


def synthesize_em(
    trace: DvfsTrace,
    tables,
    sample_rate_hz: float,
    noise_std: float,
    seed,
    *,
    base_hz: float = 1000.0,
    hz_per_index: float = 150.0,
    amplitude: float = 1.0,
    amplitude_per_index: float = 0.02,
) -> EmTrace:
    """Toy EM signal: a carrier whose instantaneous frequency and amplitude
    track the trace's combined level index, plus white Gaussian noise.

    This is not a physical model; it exists to give the spectral pipeline a
    signal whose frequency content is keyed to DVFS activity.
    """
    top = base_hz + hz_per_index * (total_levels(tables) - 1)
    if sample_rate_hz < 2.0 * top:
        raise AliasedCarrierError(
            f"sample rate {sample_rate_hz} Hz below Nyquist for a "
            f"{top} Hz carrier"
        )
    duration_s = trace.duration_us / 1e6
    n = int(round(sample_rate_hz * duration_s))
    t_us = np.arange(n) * (1e6 / sample_rate_hz)

    offsets = table_offsets(tables)
    combined = np.zeros(n)
    for c, (samples, table) in enumerate(zip(trace.clusters, tables)):
        at = np.searchsorted(samples.start_us, t_us, side="right") - 1
        at = np.clip(at, 0, len(samples) - 1)
        combined += offsets[c] + freqs_to_indexes(table, samples.freq_khz[at])
    combined /= trace.n_clusters

    phase = 2.0 * np.pi * np.cumsum(base_hz + hz_per_index * combined) / sample_rate_hz
    signal = (amplitude + amplitude_per_index * combined) * np.sin(phase)
    if noise_std > 0:
        rng = np.random.default_rng(_as_seedseq(seed))
        signal = signal + noise_std * rng.standard_normal(n)
    return EmTrace(trace.app_label, signal.astype(np.float32), sample_rate_hz, duration_s)
