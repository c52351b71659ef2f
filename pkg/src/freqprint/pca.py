"""Per-window principal components under a global retention budget.

Each window slice of the feature row gets its own centered PCA. A window
keeps the components needed to reach the explained-variance threshold,
clamped per window, and the global budget is granted greedily to the
next-best component variance across windows, so high-variance windows end
up with more components than flat ones.
"""

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .errors import LayoutMismatchError
from .spectral import FeatureLayout
from .util import pmap
from .validation import as_float_matrix, check_fitted


@dataclass(frozen=True)
class PcaModel:
    """Fitted per-window projections.

    ``components[i]`` has orthonormal rows (k_i x width_i);
    ``explained_variance`` holds the matching eigenvalues (n-1 denominator)
    and ``explained_fraction`` their share of the window's total variance.
    """

    layout: FeatureLayout
    means: tuple[np.ndarray, ...]
    components: tuple[np.ndarray, ...]
    explained_variance: tuple[np.ndarray, ...]
    explained_fraction: tuple[np.ndarray, ...]

    @property
    def kept_per_window(self) -> list[int]:
        return [c.shape[0] for c in self.components]

    @property
    def total_components(self) -> int:
        return int(sum(self.kept_per_window))


def _fit_slice(values: np.ndarray):
    """Centered SVD of one window slice; rank-truncated, signs fixed."""
    n = values.shape[0]
    mean = values.mean(axis=0)
    centered = values - mean
    _, sv, vt = np.linalg.svd(centered, full_matrices=False)
    if sv.size == 0 or sv[0] <= 0.0:
        rank = 0
    else:
        tol = sv[0] * max(centered.shape) * np.finfo(np.float64).eps
        rank = int(np.sum(sv > tol))
    variance = (sv[:rank] ** 2) / (n - 1)
    fraction = variance / variance.sum() if rank else variance
    comps = vt[:rank]
    if rank:
        lead = np.argmax(np.abs(comps), axis=1)
        flip = comps[np.arange(rank), lead] < 0
        comps = np.where(flip[:, None], -comps, comps)
    return mean, comps, variance, fraction


def _grant_budget(desired, variances, budget: int):
    """Greedy allocation: grant one component at a time to the window whose
    next unkept component carries the most absolute variance (ties to the
    lower window index). Within a window eigenvalues are non-increasing, so
    grants are always window prefixes."""
    candidates = []
    for w, want in enumerate(desired):
        for j in range(want):
            candidates.append((-variances[w][j], w, j))
    candidates.sort()
    kept = [0] * len(desired)
    for _, w, _ in candidates[:budget]:
        kept[w] += 1
    return kept


def fit_windowed_pca(
    X,
    layout: FeatureLayout,
    budget: int = 660,
    per_window_max: int = 17,
    evar_threshold: float = 0.99,
) -> PcaModel:
    """Fit one PCA per layout slice on the training rows.

    A window with no variance keeps zero components (never NaN). The sum of
    kept components never exceeds ``budget`` and no window exceeds
    ``per_window_max``.
    """
    X = as_float_matrix(X)
    if X.shape[0] < 2:
        raise ValueError("windowed PCA needs at least 2 training rows")
    if X.shape[1] != layout.total_width:
        raise LayoutMismatchError(
            f"matrix width {X.shape[1]} does not match layout width "
            f"{layout.total_width}"
        )
    n_slices = len(layout.slices)
    if budget < n_slices:
        raise ValueError(f"budget {budget} smaller than the window count {n_slices}")
    if per_window_max < 1:
        raise ValueError("per_window_max must be >= 1")
    if not 0.0 < evar_threshold <= 1.0:
        raise ValueError("evar_threshold must be within (0, 1]")

    fits = pmap(lambda s: _fit_slice(X[:, s.start : s.stop]), layout.slices)
    desired = []
    for _, comps, _, fraction in fits:
        rank = comps.shape[0]
        if rank == 0:
            desired.append(0)
            continue
        want = int(np.searchsorted(np.cumsum(fraction), evar_threshold)) + 1
        desired.append(min(want, rank, per_window_max))
    kept = _grant_budget(desired, [f[2] for f in fits], budget)
    return PcaModel(
        layout=layout,
        means=tuple(f[0] for f in fits),
        components=tuple(f[1][: kept[w]] for w, f in enumerate(fits)),
        explained_variance=tuple(f[2][: kept[w]] for w, f in enumerate(fits)),
        explained_fraction=tuple(f[3][: kept[w]] for w, f in enumerate(fits)),
    )


def apply_pca(model: PcaModel, X) -> np.ndarray:
    """Project rows through every window's retained components, concatenated."""
    X = as_float_matrix(X)
    if X.shape[1] != model.layout.total_width:
        raise LayoutMismatchError(
            f"matrix width {X.shape[1]} does not match fitted layout width "
            f"{model.layout.total_width}"
        )
    parts = []
    for s, mean, comps in zip(model.layout.slices, model.means, model.components):
        if comps.shape[0] == 0:
            continue
        parts.append((X[:, s.start : s.stop] - mean) @ comps.T)
    if not parts:
        return np.zeros((X.shape[0], 0))
    return np.hstack(parts)


class WindowedPca(BaseEstimator, TransformerMixin):
    """Estimator-style wrapper so the projection composes in pipelines."""

    def __init__(self, layout=None, budget=660, per_window_max=17, evar_threshold=0.99):
        self.layout = layout
        self.budget = budget
        self.per_window_max = per_window_max
        self.evar_threshold = evar_threshold

    def fit(self, X, y=None):
        if self.layout is None:
            raise ValueError("WindowedPca needs a layout before fitting")
        self.model_ = fit_windowed_pca(
            X, self.layout, self.budget, self.per_window_max, self.evar_threshold
        )
        return self

    def transform(self, X):
        check_fitted(self, "model_")
        return apply_pca(self.model_, X)
