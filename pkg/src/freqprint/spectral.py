"""Windowed magnitude spectra via an in-house batched radix-2 FFT.

A series is tiled into consecutive non-overlapping windows; each window is
zero-padded to the next power of two and reduced to its one-sided magnitude
spectrum (DC through Nyquist). No taper is applied by default; a Hann taper
is available as an option.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import LengthMismatchError, TooShortError
from .model import FeatureKind, FeatureMatrix, UniformSeries
from .preprocess import append_clusters


def next_pow2(n: int) -> int:
    if n < 1:
        raise ValueError("need a positive length")
    return 1 << (n - 1).bit_length()


@lru_cache(maxsize=None)
def _bit_reversal(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.intp)
    for _ in range(bits):
        rev = (rev << 1) | (idx & 1)
        idx >>= 1
    rev.setflags(write=False)
    return rev


@lru_cache(maxsize=None)
def _twiddles(m: int) -> np.ndarray:
    tw = np.exp(-2j * np.pi * np.arange(m // 2) / m)
    tw.setflags(write=False)
    return tw


def fft_radix2(x) -> np.ndarray:
    """Iterative decimation-in-time FFT along the last axis.

    The transform length must be a power of two; leading axes are batched.
    """
    x = np.asarray(x)
    n = x.shape[-1]
    if n < 1 or n & (n - 1):
        raise ValueError(f"FFT length must be a power of two, got {n}")
    y = np.ascontiguousarray(x[..., _bit_reversal(n)], dtype=np.complex128)
    m = 2
    while m <= n:
        half = m // 2
        blocks = y.reshape(*y.shape[:-1], n // m, m)
        t = blocks[..., half:] * _twiddles(m)
        blocks[..., half:] = blocks[..., :half] - t
        blocks[..., :half] += t
        m *= 2
    return y


@dataclass(frozen=True)
class WindowPlan:
    """Fixed tiling of a uniform series into consecutive windows."""

    window_ms: float
    n_windows: int
    samples_per_window: int

    def __post_init__(self):
        if self.n_windows < 1:
            raise ValueError("need at least one window")
        if self.samples_per_window < 2:
            raise ValueError("windows need at least 2 samples")
        if self.window_ms <= 0:
            raise ValueError("window duration must be positive")

    @classmethod
    def from_series(cls, n_samples: int, dt_us: float, n_windows: int) -> "WindowPlan":
        """Tile n_samples into n_windows equal windows (remainder dropped)."""
        spw = n_samples // n_windows
        return cls(window_ms=spw * dt_us / 1000.0, n_windows=n_windows,
                   samples_per_window=spw)

    @property
    def nfft(self) -> int:
        return next_pow2(self.samples_per_window)

    @property
    def n_bins(self) -> int:
        return self.nfft // 2 + 1

    @property
    def covered_samples(self) -> int:
        return self.n_windows * self.samples_per_window


def _taper(samples_per_window: int, name: str) -> np.ndarray:
    if name == "rect":
        return np.ones(samples_per_window)
    if name == "hann":
        return np.hanning(samples_per_window)
    raise ValueError(f"unknown taper {name!r} (expected 'rect' or 'hann')")


def windowed_spectrum_rows(rows, plan: WindowPlan, taper: str = "rect") -> np.ndarray:
    """Per-window one-sided magnitude spectra for a batch of series rows.

    Output shape is (n_rows, n_windows * n_bins), windows in time order.
    """
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim != 2:
        raise ValueError("expected a 2-D batch of series rows")
    if rows.shape[1] < plan.covered_samples:
        raise TooShortError(
            f"series of {rows.shape[1]} samples cannot fill "
            f"{plan.n_windows} windows of {plan.samples_per_window}"
        )
    w = rows[:, : plan.covered_samples].reshape(
        rows.shape[0], plan.n_windows, plan.samples_per_window
    )
    w = w * _taper(plan.samples_per_window, taper)
    if plan.nfft > plan.samples_per_window:
        pad = np.zeros((rows.shape[0], plan.n_windows, plan.nfft - plan.samples_per_window))
        w = np.concatenate([w, pad], axis=-1)
    spectra = np.abs(fft_radix2(w))[..., : plan.n_bins]
    return spectra.reshape(rows.shape[0], plan.n_windows * plan.n_bins)


def windowed_spectrum(series: UniformSeries, plan: WindowPlan, taper: str = "rect") -> np.ndarray:
    """Windowed magnitude spectrum of a single series, flattened."""
    return windowed_spectrum_rows(series.values[None, :], plan, taper)[0]


@dataclass(frozen=True)
class SliceSpec:
    """One window's columns: [start, stop) within a feature row."""

    start: int
    stop: int
    window: int
    block: int


@dataclass(frozen=True)
class FeatureLayout:
    """Column geometry of windowed features.

    ``block`` distinguishes appended per-cluster sections (cluster id for
    DVFS features, always 0 for EM). Slices are stored in column order.
    """

    slices: tuple[SliceSpec, ...]

    def __post_init__(self):
        object.__setattr__(self, "slices", tuple(self.slices))
        if not self.slices:
            raise ValueError("layout needs at least one slice")
        pos = 0
        for s in self.slices:
            if s.start != pos or s.stop <= s.start:
                raise ValueError("layout slices must be contiguous and non-empty")
            pos = s.stop

    @classmethod
    def tiled(cls, n_blocks: int, n_windows: int, width: int) -> "FeatureLayout":
        """Block-major tiling: all windows of block 0, then block 1, ..."""
        slices = []
        pos = 0
        for block in range(n_blocks):
            for window in range(n_windows):
                slices.append(SliceSpec(pos, pos + width, window, block))
                pos += width
        return cls(tuple(slices))

    @property
    def total_width(self) -> int:
        return self.slices[-1].stop

    @property
    def n_windows(self) -> int:
        return max(s.window for s in self.slices) + 1

    def prefix(self, n_windows: int):
        """Restrict to the first n_windows windows of every block.

        Returns (layout, columns): the re-based layout of the kept slices
        and the source column indices to gather, in kept-slice order.
        """
        if not 1 <= n_windows <= self.n_windows:
            raise ValueError(f"prefix must be within [1, {self.n_windows}]")
        kept = [s for s in self.slices if s.window < n_windows]
        cols = np.concatenate([np.arange(s.start, s.stop) for s in kept])
        rebased = []
        pos = 0
        for s in kept:
            width = s.stop - s.start
            rebased.append(SliceSpec(pos, pos + width, s.window, s.block))
            pos += width
        return FeatureLayout(tuple(rebased)), cols


def time_domain_features(series_per_signature, labels) -> FeatureMatrix:
    """Passthrough features: appended per-cluster index series as rows."""
    rows = [append_clusters(series_list) for series_list in series_per_signature]
    if not rows:
        raise LengthMismatchError("no signatures given")
    width = rows[0].size
    if any(r.size != width for r in rows):
        raise LengthMismatchError("signatures produce rows of different widths")
    return FeatureMatrix(np.vstack(rows), np.asarray(labels), FeatureKind.TIME_DOMAIN)
