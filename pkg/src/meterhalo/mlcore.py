"""Self-contained numerical primitives used by the experiments.

k-means with careful (D^2) seeding, the adjusted Rand index, PCA with biplot
loadings, and a one-vs-one soft-margin SVM with a degree-3 polynomial kernel
solved by deterministic pairwise dual updates. Everything is seeded
explicitly; nothing here keeps global state.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from itertools import combinations

import numpy as np

__all__ = [
    "ClusterAssignment",
    "PCAResult",
    "PointMatrix",
    "SVMModel",
    "adjusted_rand_index",
    "kmeans",
    "pca_biplot",
    "polynomial_kernel",
    "svm_predict",
    "svm_train",
]


@dataclass(frozen=True)
class PointMatrix:
    """A dense n x d float matrix with optional row id tags."""

    values: np.ndarray
    ids: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise ValueError(f"points must be 2-D, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("points must be finite")
        if self.ids is not None and len(self.ids) != values.shape[0]:
            raise ValueError("row ids length must equal the row count")
        object.__setattr__(self, "values", values)


def _as_matrix(points) -> np.ndarray:
    if isinstance(points, PointMatrix):
        return points.values
    values = np.asarray(points, dtype=np.float64)
    if values.ndim != 2:
        raise ValueError(f"points must be 2-D, got shape {values.shape}")
    if not np.all(np.isfinite(values)):
        raise ValueError("points must be finite")
    return values


# ---------------------------------------------------------------------------
# k-means


@dataclass(frozen=True)
class ClusterAssignment:
    """Per-row cluster indices in 0..k-1 plus the fitted centers and WCSS."""

    labels: np.ndarray
    k: int
    centers: np.ndarray
    wcss: float


def _careful_seed(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """D^2 sampling: each next center drawn proportionally to squared
    distance from the nearest already-chosen center."""
    n = x.shape[0]
    centers = np.empty((k, x.shape[1]))
    centers[0] = x[int(rng.integers(n))]
    d2 = ((x - centers[0]) ** 2).sum(axis=1)
    for c in range(1, k):
        total = float(d2.sum())
        if total <= 0.0:
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=d2 / total))
        centers[c] = x[idx]
        d2 = np.minimum(d2, ((x - centers[c]) ** 2).sum(axis=1))
    return centers


def _lloyd(
    x: np.ndarray, centers: np.ndarray, max_iter: int, tol: float
) -> tuple[np.ndarray, np.ndarray, float]:
    n = x.shape[0]
    k = centers.shape[0]
    prev_wcss = math.inf
    labels = np.zeros(n, dtype=np.int64)
    for _ in range(max_iter):
        d2 = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        labels = d2.argmin(axis=1)
        wcss = float(d2[np.arange(n), labels].sum())
        # Lloyd steps never increase the objective; moving an empty center
        # does not change it either, so this holds unconditionally.
        if wcss > prev_wcss + 1e-9 * max(1.0, abs(prev_wcss)):
            raise AssertionError(
                f"WCSS increased across Lloyd iterations: {prev_wcss} -> {wcss}"
            )
        prev_wcss = wcss
        new_centers = centers.copy()
        for c in range(k):
            members = labels == c
            if members.any():
                new_centers[c] = x[members].mean(axis=0)
            else:
                # re-seat an empty cluster on the point farthest from its
                # current center (first such point on ties)
                far = int(d2[np.arange(n), labels].argmax())
                new_centers[c] = x[far]
        shift = float(np.abs(new_centers - centers).max())
        centers = new_centers
        if shift < tol:
            break
    d2 = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    labels = d2.argmin(axis=1)
    wcss = float(d2[np.arange(n), labels].sum())
    return labels, centers, wcss


def kmeans(
    points,
    k: int,
    seed: int = 0,
    restarts: int = 10,
    max_iter: int = 300,
    tol: float = 1e-6,
) -> ClusterAssignment:
    """k-means: D^2 seeding, Lloyd iterations, best of ``restarts`` by WCSS.

    Deterministic for a fixed seed; restart r uses the generator seeded with
    (seed, r), and ties between restarts keep the earlier one.
    """
    x = _as_matrix(points)
    n = x.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    if seed < 0:
        raise ValueError("seed must be non-negative")
    best: tuple[np.ndarray, np.ndarray, float] | None = None
    for restart in range(restarts):
        rng = np.random.default_rng([seed, restart])
        centers = _careful_seed(x, k, rng)
        labels, centers, wcss = _lloyd(x, centers, max_iter, tol)
        if best is None or wcss < best[2]:
            best = (labels, centers, wcss)
    assert best is not None
    return ClusterAssignment(labels=best[0], k=k, centers=best[1], wcss=best[2])


# ---------------------------------------------------------------------------
# adjusted Rand index


def adjusted_rand_index(labels_a, labels_b) -> float:
    """Contingency-table ARI between two labelings of the same items.

    When both partitions are trivial (both one cluster, or both all
    singletons) the adjustment denominator vanishes; those pairs are
    identical partitions and score 1.0 by convention.
    """
    a = list(labels_a)
    b = list(labels_b)
    if len(a) != len(b):
        raise ValueError(f"label lengths differ: {len(a)} vs {len(b)}")
    n = len(a)
    if n < 2:
        raise ValueError("need at least 2 items")
    pair = math.comb
    sum_ij = sum(pair(c, 2) for c in Counter(zip(a, b)).values())
    sum_a = sum(pair(c, 2) for c in Counter(a).values())
    sum_b = sum(pair(c, 2) for c in Counter(b).values())
    total = pair(n, 2)
    expected = sum_a * sum_b / total
    maximum = (sum_a + sum_b) / 2
    if maximum == expected:
        return 1.0
    return (sum_ij - expected) / (maximum - expected)


# ---------------------------------------------------------------------------
# PCA biplot


@dataclass(frozen=True)
class PCAResult:
    """Projected coordinates, feature loadings, explained-variance fractions,
    and the features contributing most to the retained components."""

    coordinates: np.ndarray
    loadings: np.ndarray
    explained_variance: np.ndarray
    top_features: tuple[int, ...]


def pca_biplot(points, components: int = 2, top_features: int = 5) -> PCAResult:
    """Mean-centered SVD projection onto the leading components.

    Loadings are the right singular vectors (columns per component); the top
    features are ranked by the Euclidean norm of their loading rows, ties by
    feature index.
    """
    x = _as_matrix(points)
    n, d = x.shape
    if n < 2 or d < 2:
        raise ValueError(f"need at least 2 rows and 2 columns, got {x.shape}")
    if components < 1 or components > min(n, d):
        raise ValueError(f"components must be in [1, {min(n, d)}]")
    centered = x - x.mean(axis=0)
    if not np.any(np.abs(centered) > 0.0):
        raise ValueError("zero-variance input: all rows identical")
    _, s, vt = np.linalg.svd(centered, full_matrices=False)
    loadings = vt[:components].T
    coordinates = centered @ loadings
    explained = (s**2 / float((s**2).sum()))[:components]
    contribution = np.sqrt((loadings**2).sum(axis=1))
    order = np.lexsort((np.arange(d), -contribution))
    top = tuple(int(i) for i in order[: min(top_features, d)])
    return PCAResult(
        coordinates=coordinates,
        loadings=loadings,
        explained_variance=explained,
        top_features=top,
    )


# ---------------------------------------------------------------------------
# polynomial-kernel SVM (one-vs-one)


def polynomial_kernel(x, y, gamma: float, degree: int = 3) -> np.ndarray:
    """(gamma * <x, y> + 1) ** degree, rowwise between two point sets."""
    return (gamma * (_as_matrix(x) @ _as_matrix(y).T) + 1.0) ** degree


@dataclass(frozen=True)
class _BinaryMachine:
    positive: object
    negative: object
    vectors: np.ndarray
    dual: np.ndarray  # alpha_i * y_i for the retained support vectors
    bias: float


@dataclass(frozen=True)
class SVMModel:
    classes: tuple
    machines: tuple[_BinaryMachine, ...]
    gamma: float
    degree: int
    c: float


def _smo(
    gram: np.ndarray, y: np.ndarray, c: float, tol: float, max_sweeps: int = 200
) -> tuple[np.ndarray, float]:
    """Pairwise dual updates until a full sweep changes nothing.

    The pair partner j is the deterministic argmax of |E_i - E_j|, so runs
    are exactly reproducible for a fixed input order.
    """
    n = y.shape[0]
    alpha = np.zeros(n)
    b = 0.0
    for _ in range(max_sweeps):
        changed = False
        for i in range(n):
            coeff = alpha * y
            f = gram @ coeff + b
            e_i = f[i] - y[i]
            r_i = e_i * y[i]
            if not ((r_i < -tol and alpha[i] < c) or (r_i > tol and alpha[i] > 0)):
                continue
            gaps = np.abs((f - y) - e_i)
            gaps[i] = -1.0
            j = int(gaps.argmax())
            e_j = f[j] - y[j]
            a_i, a_j = alpha[i], alpha[j]
            if y[i] != y[j]:
                low, high = max(0.0, a_j - a_i), min(c, c + a_j - a_i)
            else:
                low, high = max(0.0, a_i + a_j - c), min(c, a_i + a_j)
            if high - low < 1e-12:
                continue
            eta = 2.0 * gram[i, j] - gram[i, i] - gram[j, j]
            if eta >= -1e-12:
                continue
            new_j = np.clip(a_j - y[j] * (e_i - e_j) / eta, low, high)
            if abs(new_j - a_j) < 1e-8:
                continue
            new_i = a_i + y[i] * y[j] * (a_j - new_j)
            alpha[i], alpha[j] = new_i, new_j
            b1 = b - e_i - y[i] * (new_i - a_i) * gram[i, i] - y[j] * (new_j - a_j) * gram[i, j]
            b2 = b - e_j - y[i] * (new_i - a_i) * gram[i, j] - y[j] * (new_j - a_j) * gram[j, j]
            if 0.0 < new_i < c:
                b = b1
            elif 0.0 < new_j < c:
                b = b2
            else:
                b = (b1 + b2) / 2.0
            changed = True
        if not changed:
            break
    return alpha, float(b)


def svm_train(points, labels, c: float = 1.0, degree: int = 3, tol: float = 1e-4) -> SVMModel:
    """One-vs-one soft-margin SVM with kernel (``1/d * <x,y>`` + 1)^degree.

    Classes are ordered by first appearance in ``labels``; that order also
    breaks prediction ties.
    """
    x = _as_matrix(points)
    label_list = list(labels)
    if len(label_list) != x.shape[0]:
        raise ValueError("labels length must equal the row count")
    classes: list = []
    for lab in label_list:
        if lab not in classes:
            classes.append(lab)
    if len(classes) < 2:
        raise ValueError("need at least 2 classes")
    gamma = 1.0 / x.shape[1]
    machines = []
    for pos, neg in combinations(classes, 2):
        idx = [t for t, lab in enumerate(label_list) if lab == pos or lab == neg]
        xp = x[idx]
        y = np.array([1.0 if label_list[t] == pos else -1.0 for t in idx])
        gram = polynomial_kernel(xp, xp, gamma, degree)
        alpha, bias = _smo(gram, y, c, tol)
        keep = alpha > 1e-12
        if not keep.any():
            # degenerate but legal: fall back to keeping everything so the
            # machine still produces the plain-bias decision
            keep = np.ones_like(keep)
        machines.append(
            _BinaryMachine(
                positive=pos,
                negative=neg,
                vectors=xp[keep].copy(),
                dual=(alpha * y)[keep].copy(),
                bias=bias,
            )
        )
    return SVMModel(
        classes=tuple(classes),
        machines=tuple(machines),
        gamma=gamma,
        degree=degree,
        c=c,
    )


def svm_predict(model: SVMModel, points) -> list:
    """Majority vote over the pairwise machines; ties resolve to the class
    seen first at training time."""
    x = _as_matrix(points)
    votes = np.zeros((x.shape[0], len(model.classes)), dtype=np.int64)
    class_index = {lab: i for i, lab in enumerate(model.classes)}
    for machine in model.machines:
        kernel = polynomial_kernel(x, machine.vectors, model.gamma, model.degree)
        decision = kernel @ machine.dual + machine.bias
        pos_col = class_index[machine.positive]
        neg_col = class_index[machine.negative]
        for row, value in enumerate(decision):
            votes[row, pos_col if value >= 0.0 else neg_col] += 1
    return [model.classes[int(row.argmax())] for row in votes]
