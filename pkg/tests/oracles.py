"""Independent brute-force oracles used to cross-check the fast paths.

Everything here is deliberately naive (linear scans, O(N^2) transforms,
dense eigendecompositions) and shares no code with the implementations it
checks.
"""

import numpy as np


def naive_dft(x):
    """Direct O(N^2) complex DFT of a 1-D signal."""
    x = np.asarray(x, dtype=np.complex128)
    n = x.size
    out = np.zeros(n, dtype=np.complex128)
    for k in range(n):
        for t in range(n):
            out[k] += x[t] * np.exp(-2j * np.pi * k * t / n)
    return out


def brute_interpolate(start_us, freq_khz, levels, dt_us, duration_us, offset=0):
    """Per-grid-point linear scan: value of the last sample starting <= t."""
    n = round(duration_us / dt_us)
    out = np.zeros(n)
    level_list = list(levels)
    for j in range(n):
        t = j * dt_us
        chosen = 0
        for i, s in enumerate(start_us):
            if s <= t:
                chosen = i
            else:
                break
        out[j] = level_list.index(freq_khz[chosen]) + offset
    return out


def brute_knn_proba(train_x, train_y, test_x, k, classes):
    """All-pairs Euclidean KNN with (distance, label) tie ordering."""
    train_x = np.asarray(train_x, dtype=float)
    test_x = np.asarray(test_x, dtype=float)
    probs = np.zeros((len(test_x), len(classes)))
    class_pos = {c: i for i, c in enumerate(classes)}
    for r, row in enumerate(test_x):
        scored = []
        for i in range(len(train_x)):
            d = 0.0
            for a, b in zip(row, train_x[i]):
                d += (a - b) ** 2
            scored.append((d, train_y[i]))
        scored.sort()
        for _, label in scored[:k]:
            probs[r, class_pos[label]] += 1.0 / k
    return probs


def cov_eig_pca(X):
    """PCA via explicit covariance + dense symmetric eigendecomposition.

    Returns (mean, eigenvalues desc, components rows desc) with the same
    sign convention as the implementation (largest |entry| positive).
    """
    X = np.asarray(X, dtype=float)
    mean = X.mean(axis=0)
    cov = np.cov(X - mean, rowvar=False, ddof=1)
    cov = np.atleast_2d(cov)
    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(evals)[::-1]
    evals = evals[order]
    comps = evecs[:, order].T
    for i in range(comps.shape[0]):
        lead = np.argmax(np.abs(comps[i]))
        if comps[i, lead] < 0:
            comps[i] = -comps[i]
    return mean, evals, comps


def tree_walk_proba(tree, row):
    """Recursive single-row traversal of a flat tree, independent of the
    vectorized descent."""
    node = 0
    while tree.feature[node] >= 0:
        if row[tree.feature[node]] <= tree.threshold[node]:
            node = tree.left[node]
        else:
            node = tree.right[node]
    return tree.dist[node]


def exhaustive_best_split_1d(values, labels):
    """All midpoints of one feature, weighted Gini, first best kept."""
    values = np.asarray(values, dtype=float)
    labels = np.asarray(labels)
    order = np.argsort(values, kind="stable")
    sv, sl = values[order], labels[order]
    classes = np.unique(labels)
    best = (np.inf, None)
    n = len(values)
    for p in range(n - 1):
        if sv[p + 1] <= sv[p]:
            continue
        left, right = sl[: p + 1], sl[p + 1 :]
        score = 0.0
        for part in (left, right):
            gini = 1.0 - sum((np.sum(part == c) / part.size) ** 2 for c in classes)
            score += part.size / n * gini
        if score < best[0]:
            best = (score, 0.5 * (sv[p] + sv[p + 1]))
    return best[1]
