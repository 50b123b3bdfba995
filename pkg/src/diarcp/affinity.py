"""Acoustic affinity construction and the row-wise refinement used before spectral clustering."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import EmbeddingSequence
from .errors import InvalidInputError, InvalidParameterError

_SYM_TOL = 1e-9
DEFAULT_P_PERCENTILE = 0.982


@dataclass(frozen=True)
class AffinityMatrix:
    """N x N symmetric similarity matrix with entries in [0, 1] and unit diagonal."""

    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if values.ndim != 2 or values.shape[0] != values.shape[1] or values.shape[0] < 1:
            raise InvalidInputError("affinity must be a nonempty square matrix")
        if not np.all(np.isfinite(values)):
            raise InvalidInputError("affinity entries must be finite")
        if np.abs(values - values.T).max() > _SYM_TOL:
            raise InvalidInputError("affinity must be symmetric within 1e-9")
        if values.min() < -_SYM_TOL or values.max() > 1.0 + _SYM_TOL:
            raise InvalidInputError("affinity entries must lie in [0, 1]")
        if np.abs(np.diag(values) - 1.0).max() > _SYM_TOL:
            raise InvalidInputError("affinity diagonal must equal 1")

    @property
    def n(self) -> int:
        return self.values.shape[0]


def pair_similarity(e_i: np.ndarray, e_j: np.ndarray) -> float:
    """Similarity of two embeddings: cosine mapped to [0, 1] via (c + 1) / 2."""
    e_i = np.asarray(e_i, dtype=float)
    e_j = np.asarray(e_j, dtype=float)
    ni = np.linalg.norm(e_i)
    nj = np.linalg.norm(e_j)
    if ni == 0.0 or nj == 0.0:
        raise InvalidInputError("cannot compute similarity for a zero-norm vector")
    cos = float(np.dot(e_i, e_j) / (ni * nj))
    cos = min(1.0, max(-1.0, cos))
    return 0.5 * (cos + 1.0)


def build_affinity(embeddings: EmbeddingSequence) -> AffinityMatrix:
    """Pairwise similarity matrix over all embedding windows.

    Entries are (cosine + 1) / 2; the result is exactly symmetric with a unit
    diagonal.
    """
    vectors = embeddings.vectors
    unit = vectors / np.linalg.norm(vectors, axis=1, keepdims=True)
    gram = np.clip(unit @ unit.T, -1.0, 1.0)
    values = 0.5 * (gram + 1.0)
    values = 0.5 * (values + values.T)
    np.fill_diagonal(values, 1.0)
    return AffinityMatrix(values)


def refine_affinity(affinity: AffinityMatrix, p_percentile: float = DEFAULT_P_PERCENTILE) -> AffinityMatrix:
    """Row-wise thresholding followed by symmetrization.

    Per row, entries strictly below the row's p_percentile quantile
    (lower-nearest-rank over the sorted row) are zeroed; the diagonal is always
    kept. The masked matrix M is then symmetrized as (M + M^T) / 2.

    Parameters
    ----------
    affinity : AffinityMatrix
    p_percentile : float in [0, 1]
        0 keeps the matrix unchanged; larger values prune more of each row.
    """
    if not 0.0 <= p_percentile <= 1.0:
        raise InvalidParameterError(f"p_percentile must be in [0, 1], got {p_percentile}")
    values = affinity.values.copy()
    n = values.shape[0]
    rank = max(1, math.ceil(p_percentile * n))
    row_sorted = np.sort(values, axis=1)
    thresholds = row_sorted[:, rank - 1]
    diagonal = np.diag(values).copy()
    values[values < thresholds[:, None]] = 0.0
    np.fill_diagonal(values, diagonal)
    values = 0.5 * (values + values.T)
    return AffinityMatrix(values)
