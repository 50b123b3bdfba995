"""Spectral clustering with eigengap speaker-count estimation, plus k-means and AHC."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
import scipy.cluster.hierarchy

from .affinity import DEFAULT_P_PERCENTILE, AffinityMatrix, refine_affinity
from .core import SpeakerLabeling
from .errors import (
    ClusteringError,
    DegenerateInputError,
    InvalidInputError,
    InvalidParameterError,
)
from .propagation import RefinedAffinity, normalize_affinity
from .seeding import derive_rng, derive_seed

_KMEANS_MAX_ITER = 300


@dataclass(frozen=True)
class ClusterConfig:
    """Knobs for the spectral clustering stage.

    max_speakers caps the eigengap search; n_repetitions controls how many
    independently seeded clusterings feed metric averaging; p_percentile is
    the row-thresholding level applied before eigendecomposition.
    """

    max_speakers: int = 10
    kmeans_restarts: int = 10
    n_repetitions: int = 10
    seed: int = 0
    p_percentile: float = DEFAULT_P_PERCENTILE

    def __post_init__(self) -> None:
        if self.max_speakers < 1:
            raise InvalidParameterError("max_speakers must be at least 1")
        if self.n_repetitions < 1:
            raise InvalidParameterError("n_repetitions must be at least 1")
        if self.kmeans_restarts < 1:
            raise InvalidParameterError("kmeans_restarts must be at least 1")


def estimate_k(eigenvalues: Sequence[float], max_k: int) -> int:
    """Speaker count from the largest gap between consecutive sorted eigenvalues.

    `eigenvalues` must be sorted descending; only positions 1..max_k-1 are
    considered. Ties resolve to the smallest count. Returns 1 when fewer than
    two eigenvalues are available.
    """
    ev = np.asarray(eigenvalues, dtype=float)
    if max_k < 1:
        raise InvalidParameterError("max_k must be at least 1")
    limit = min(max_k, ev.size - 1)
    if limit < 1:
        return 1
    gaps = ev[:limit] - ev[1 : limit + 1]
    return int(np.argmax(gaps)) + 1


def _kmeanspp_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    centers = np.empty((k, points.shape[1]))
    centers[0] = points[rng.integers(n)]
    d2 = np.sum((points - centers[0]) ** 2, axis=1)
    for c in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=d2 / total))
        centers[c] = points[idx]
        d2 = np.minimum(d2, np.sum((points - centers[c]) ** 2, axis=1))
    return centers


def _kmeans_once(
    points: np.ndarray, k: int, rng: np.random.Generator
) -> tuple[np.ndarray, float, list[float]]:
    """One Lloyd run. Returns (labels, final inertia, inertia after each assignment)."""
    centers = _kmeanspp_init(points, k, rng)
    labels = np.full(points.shape[0], -1, dtype=int)
    history: list[float] = []
    for _ in range(_KMEANS_MAX_ITER):
        d2 = (
            np.sum(points**2, axis=1)[:, None]
            - 2.0 * points @ centers.T
            + np.sum(centers**2, axis=1)[None, :]
        )
        np.clip(d2, 0.0, None, out=d2)
        new_labels = np.argmin(d2, axis=1)
        min_d2 = d2[np.arange(points.shape[0]), new_labels]
        for empty in range(k):
            if not np.any(new_labels == empty):
                farthest = int(np.argmax(min_d2))
                new_labels[farthest] = empty
                min_d2[farthest] = 0.0
        history.append(float(min_d2.sum()))
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for c in range(k):
            centers[c] = points[labels == c].mean(axis=0)
    return labels, history[-1], history


def kmeans(points: np.ndarray, k: int, restarts: int = 10, seed: int = 0) -> np.ndarray:
    """Best-inertia k-means labeling over `restarts` k-means++ seedings.

    Deterministic for a fixed seed; restart r uses an independent generator
    derived from (seed, r) and ties in inertia keep the earliest restart.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[0] < 1:
        raise InvalidInputError("points must be a nonempty 2-D matrix")
    if k < 1 or k > points.shape[0]:
        raise InvalidParameterError(f"k={k} is invalid for {points.shape[0]} points")
    best_labels = None
    best_inertia = np.inf
    for r in range(restarts):
        labels, inertia, _ = _kmeans_once(points, k, derive_rng(seed, r))
        if inertia < best_inertia:
            best_inertia = inertia
            best_labels = labels
    return best_labels


def _canonical_labels(labels: np.ndarray) -> np.ndarray:
    """Relabel clusters to 0..k-1 in order of first appearance."""
    mapping: dict[int, int] = {}
    out = np.empty_like(labels)
    for idx, lab in enumerate(labels):
        if lab not in mapping:
            mapping[lab] = len(mapping)
        out[idx] = mapping[lab]
    return out


def spectral_cluster(
    affinity: AffinityMatrix | RefinedAffinity,
    cfg: ClusterConfig = ClusterConfig(),
    k: int | None = None,
) -> SpeakerLabeling:
    """Cluster embedding windows from their (refined) affinity matrix.

    Applies row-wise thresholding at cfg.p_percentile, eigendecomposes the
    normalized affinity, picks k by eigengap unless given, embeds rows into
    the top-k eigenvectors (row-normalized), and runs k-means.

    Parameters
    ----------
    affinity : AffinityMatrix or RefinedAffinity
    cfg : ClusterConfig
    k : int, optional
        Known speaker count; skips eigengap estimation.

    Returns
    -------
    SpeakerLabeling
    """
    values = affinity.values
    n = values.shape[0]
    if n == 1:
        return SpeakerLabeling(np.zeros(1, dtype=int))
    if isinstance(affinity, RefinedAffinity):
        affinity = AffinityMatrix(values)
    try:
        pruned = refine_affinity(affinity, cfg.p_percentile)
        normalized = normalize_affinity(pruned)
    except DegenerateInputError as exc:
        raise ClusteringError(f"affinity is degenerate: {exc}") from exc
    eigenvalues, eigenvectors = np.linalg.eigh(normalized)
    eigenvalues = eigenvalues[::-1]
    eigenvectors = eigenvectors[:, ::-1]
    if k is None:
        k = estimate_k(eigenvalues, min(cfg.max_speakers, n))
    if not 1 <= k <= n:
        raise InvalidParameterError(f"k={k} is invalid for {n} windows")
    embedding = eigenvectors[:, :k].copy()
    norms = np.linalg.norm(embedding, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    embedding /= norms
    labels = kmeans(embedding, k, cfg.kmeans_restarts, cfg.seed)
    return SpeakerLabeling(_canonical_labels(labels))


def repeated_labelings(
    affinity: AffinityMatrix | RefinedAffinity,
    cfg: ClusterConfig = ClusterConfig(),
    k: int | None = None,
) -> list[SpeakerLabeling]:
    """One labeling per repetition, with independently derived k-means seeds.

    Repetition 0 uses cfg.seed itself, so its labels match a direct
    spectral_cluster call with the same config.
    """
    out = []
    for rep in range(cfg.n_repetitions):
        seed = cfg.seed if rep == 0 else derive_seed(cfg.seed, rep)
        out.append(spectral_cluster(affinity, replace(cfg, seed=seed), k))
    return out


def ahc(vectors: np.ndarray, distance_threshold: float) -> np.ndarray:
    """Average-linkage agglomeration on cosine distance.

    Merging stops once the minimum linkage distance exceeds the threshold;
    labels are numbered by first appearance.
    """
    vectors = np.asarray(vectors, dtype=float)
    if vectors.ndim != 2 or vectors.shape[0] < 1:
        raise InvalidInputError("vectors must be a nonempty 2-D matrix")
    if np.any(np.linalg.norm(vectors, axis=1) == 0.0):
        raise InvalidInputError("cosine distance is undefined for zero-norm vectors")
    if vectors.shape[0] == 1:
        return np.zeros(1, dtype=int)
    linkage = scipy.cluster.hierarchy.linkage(vectors, method="average", metric="cosine")
    labels = scipy.cluster.hierarchy.fcluster(linkage, t=distance_threshold, criterion="distance")
    return _canonical_labels(labels - 1)
