"""Pairwise constraint construction from visual and semantic cues, and their integration.

Each cue modality yields an N x N matrix over {-1, 0, +1} (cannot-link / no
evidence / must-link) aligned with the embedding windows. Modalities are then
combined with the acoustic affinity acting as arbiter on conflicts, and the
weighted sum is binarized back to {-1, 0, +1}.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .affinity import AffinityMatrix
from .core import TimeSegment, assign_cues_to_windows
from .errors import InvalidInputError, InvalidParameterError

DEFAULT_CONFIDENCE_THRESHOLD = 0.5


def _ordered_pairs(pairs: Iterable[tuple[int, int]], kind: str) -> frozenset[tuple[int, int]]:
    ordered = set()
    for i, j in pairs:
        i, j = int(i), int(j)
        if i == j:
            raise InvalidInputError(f"{kind} contains the self-pair ({i}, {j})")
        ordered.add((i, j) if i < j else (j, i))
    return frozenset(ordered)


@dataclass(frozen=True)
class LinkSet:
    """Disjoint sets of must-link and cannot-link index pairs (stored with i < j)."""

    must_links: frozenset[tuple[int, int]]
    cannot_links: frozenset[tuple[int, int]]

    def __post_init__(self) -> None:
        must = _ordered_pairs(self.must_links, "must_links")
        cannot = _ordered_pairs(self.cannot_links, "cannot_links")
        object.__setattr__(self, "must_links", must)
        object.__setattr__(self, "cannot_links", cannot)
        overlap = must & cannot
        if overlap:
            raise InvalidInputError(
                f"pairs appear as both must-link and cannot-link: {sorted(overlap)[:5]}"
            )

    @property
    def total(self) -> int:
        return len(self.must_links) + len(self.cannot_links)


@dataclass(frozen=True)
class ConstraintMatrix:
    """N x N symmetric matrix over {-1, 0, +1} with zero diagonal."""

    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values)
        if values.ndim != 2 or values.shape[0] != values.shape[1] or values.shape[0] < 1:
            raise InvalidInputError("constraint matrix must be square and nonempty")
        if not np.isin(values, (-1, 0, 1)).all():
            raise InvalidInputError("constraint entries must be -1, 0 or +1")
        values = values.astype(np.int8)
        if (values != values.T).any():
            raise InvalidInputError("constraint matrix must be symmetric")
        if np.diag(values).any():
            raise InvalidInputError("constraint matrix diagonal must be zero")
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class VisualCue:
    """A face track interval with its face-cluster id and active-speaker confidence."""

    segment: TimeSegment
    face_id: int
    confidence: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.confidence <= 1.0:
            raise InvalidInputError(f"confidence must lie in [0, 1], got {self.confidence}")


@dataclass(frozen=True)
class VisualCues:
    cues: tuple[VisualCue, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "cues", tuple(self.cues))

    def __len__(self) -> int:
        return len(self.cues)


@dataclass(frozen=True)
class SemanticCues:
    """Monologue spans and speaker-turn boundary timestamps from transcript analysis."""

    non_dialogue_segments: tuple[TimeSegment, ...]
    turn_boundaries: tuple[float, ...]

    def __post_init__(self) -> None:
        segments = tuple(self.non_dialogue_segments)
        boundaries = tuple(float(b) for b in self.turn_boundaries)
        if any(b < a for a, b in zip(boundaries, boundaries[1:])):
            raise InvalidInputError("turn boundaries must be sorted")
        object.__setattr__(self, "non_dialogue_segments", segments)
        object.__setattr__(self, "turn_boundaries", boundaries)


@dataclass(frozen=True)
class IntegrationParams:
    """Weights for combining per-modality constraints with the acoustic affinity.

    alphas weights the modality matrices (None means 1.0 each), beta weights
    the affinity term, theta is the bias subtracted from every entry, and
    delta is the binarization threshold. Defaults center the acoustic term so
    audio alone does not binarize and only arbitrates conflicts.
    """

    alphas: tuple[float, ...] | None = None
    beta: float = 1.0
    theta: float = 0.5
    delta: float = 0.5

    def __post_init__(self) -> None:
        if self.alphas is not None:
            object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        if self.delta < 0.0:
            raise InvalidParameterError(f"delta must be nonnegative, got {self.delta}")
        if self.alphas is not None and self.beta == 0.0 and not any(self.alphas):
            raise InvalidParameterError("at least one alpha or beta must be nonzero")


def encode_links(links: LinkSet, n: int) -> ConstraintMatrix:
    """Encode a link set as a matrix: +1 must-link, -1 cannot-link, 0 elsewhere."""
    values = np.zeros((n, n), dtype=np.int8)
    for pairs, value in ((links.must_links, 1), (links.cannot_links, -1)):
        for i, j in pairs:
            if not (0 <= i < n and 0 <= j < n):
                raise InvalidInputError(f"link ({i}, {j}) out of range for n={n}")
            values[i, j] = value
            values[j, i] = value
    return ConstraintMatrix(values)


def visual_constraints(
    windows: Sequence[TimeSegment],
    cues: VisualCues,
    conf_threshold: float = DEFAULT_CONFIDENCE_THRESHOLD,
) -> ConstraintMatrix:
    """Constraints from face-cluster cues.

    Cues with confidence below `conf_threshold` are dropped. Each window is
    assigned the face-cluster id with the largest total overlap; window pairs
    sharing an id become must-links, pairs with different ids cannot-links,
    and windows without any id stay unconstrained.
    """
    if not 0.0 <= conf_threshold <= 1.0:
        raise InvalidParameterError(f"conf_threshold must lie in [0, 1], got {conf_threshold}")
    kept = [(c.segment, c.face_id) for c in cues.cues if c.confidence >= conf_threshold]
    assigned = assign_cues_to_windows(windows, kept)
    n = len(windows)
    ids = np.array([a if a is not None else 0 for a in assigned], dtype=int)
    has_id = np.array([a is not None for a in assigned], dtype=bool)
    both = has_id[:, None] & has_id[None, :]
    same = ids[:, None] == ids[None, :]
    values = np.where(both, np.where(same, 1, -1), 0).astype(np.int8)
    np.fill_diagonal(values, 0)
    return ConstraintMatrix(values)


def semantic_constraints(windows: Sequence[TimeSegment], cues: SemanticCues) -> ConstraintMatrix:
    """Constraints from dialogue-detection and speaker-turn cues.

    All window pairs whose midpoints fall inside one non-dialogue segment
    (containment is [start, end)) are must-linked pairwise, which realizes
    must-link transitivity within the segment. Each turn boundary cannot-links
    exactly one window on each side: the last window ending at or before the
    boundary and the first window starting at or after it. Cannot-links are
    never chained across boundaries. A pair receiving both kinds of evidence
    here resolves to 0.
    """
    n = len(windows)
    midpoints = [w.midpoint for w in windows]

    must: set[tuple[int, int]] = set()
    for segment in cues.non_dialogue_segments:
        inside = [i for i in range(n) if segment.t_start <= midpoints[i] < segment.t_end]
        for a in range(len(inside)):
            for b in range(a + 1, len(inside)):
                must.add((inside[a], inside[b]))

    cannot: set[tuple[int, int]] = set()
    for boundary in cues.turn_boundaries:
        before = [i for i in range(n) if windows[i].t_end <= boundary]
        after = [i for i in range(n) if windows[i].t_start >= boundary]
        if not before or not after:
            continue
        left = max(before, key=lambda i: (windows[i].t_end, i))
        right = min(after, key=lambda i: (windows[i].t_start, i))
        if left == right:
            continue
        cannot.add((min(left, right), max(left, right)))

    values = np.zeros((n, n), dtype=np.int8)
    for i, j in must - cannot:
        values[i, j] = values[j, i] = 1
    for i, j in cannot - must:
        values[i, j] = values[j, i] = -1
    return ConstraintMatrix(values)


def integrate(
    z_list: Sequence[ConstraintMatrix],
    affinity: AffinityMatrix,
    params: IntegrationParams = IntegrationParams(),
) -> ConstraintMatrix:
    """Combine per-modality constraints with acoustic arbitration and binarize.

    Computes sum_k alpha_k Z_k + beta * A - theta elementwise, then maps
    entries above delta to +1, below -delta to -1, and everything else
    (including the diagonal) to 0.
    """
    n = affinity.n
    alphas = params.alphas if params.alphas is not None else (1.0,) * len(z_list)
    if len(alphas) != len(z_list):
        raise InvalidInputError(
            f"got {len(alphas)} alpha weights for {len(z_list)} constraint matrices"
        )
    if not any(a != 0.0 for a in alphas) and params.beta == 0.0:
        raise InvalidInputError("at least one alpha or beta must be nonzero")
    scores = params.beta * affinity.values - params.theta
    for alpha, z in zip(alphas, z_list):
        if z.n != n:
            raise InvalidInputError(f"constraint shape ({z.n}) does not match affinity ({n})")
        scores = scores + alpha * z.values
    values = np.where(scores > params.delta, 1, np.where(scores < -params.delta, -1, 0))
    values = values.astype(np.int8)
    np.fill_diagonal(values, 0)
    return ConstraintMatrix(values)
