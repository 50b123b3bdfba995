"""Shared domain types and temporal alignment between embedding windows and cue streams."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Sequence

import numpy as np

from .errors import InvalidInputError


@dataclass(frozen=True)
class TimeSegment:
    """A time interval in seconds, optionally tagged with a speaker label."""

    t_start: float
    t_end: float
    label: str = ""

    def __post_init__(self) -> None:
        if not self.t_end > self.t_start:
            raise InvalidInputError(
                f"segment end ({self.t_end}) must be greater than start ({self.t_start})"
            )

    @property
    def duration(self) -> float:
        return self.t_end - self.t_start

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.t_start + self.t_end)


@dataclass(frozen=True)
class EmbeddingSequence:
    """N timestamped D-dimensional speaker embeddings.

    Parameters
    ----------
    windows : sequence of TimeSegment
        One window per embedding, sorted by start time.
    vectors : (N, D) array
        One embedding per row; every row must have nonzero norm.
    """

    windows: tuple[TimeSegment, ...]
    vectors: np.ndarray

    def __post_init__(self) -> None:
        windows = tuple(self.windows)
        vectors = np.asarray(self.vectors, dtype=float)
        object.__setattr__(self, "windows", windows)
        object.__setattr__(self, "vectors", vectors)
        if vectors.ndim != 2 or vectors.shape[0] < 1 or vectors.shape[1] < 1:
            raise InvalidInputError("vectors must be a nonempty N x D matrix")
        if len(windows) != vectors.shape[0]:
            raise InvalidInputError(
                f"got {len(windows)} windows for {vectors.shape[0]} embedding rows"
            )
        starts = [w.t_start for w in windows]
        if any(b < a for a, b in zip(starts, starts[1:])):
            raise InvalidInputError("windows must be sorted by start time")
        if not np.all(np.isfinite(vectors)):
            raise InvalidInputError("embedding vectors must be finite")
        if np.any(np.linalg.norm(vectors, axis=1) == 0.0):
            raise InvalidInputError("embedding vectors must have nonzero norm")

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]


@dataclass(frozen=True)
class SpeakerLabeling:
    """One nonnegative cluster id per embedding window."""

    labels: np.ndarray

    def __post_init__(self) -> None:
        labels = np.asarray(self.labels, dtype=int)
        object.__setattr__(self, "labels", labels)
        if labels.ndim != 1 or labels.size < 1:
            raise InvalidInputError("labels must be a nonempty 1-D integer array")
        if np.any(labels < 0):
            raise InvalidInputError("cluster ids must be nonnegative")

    @property
    def n(self) -> int:
        return self.labels.size

    @property
    def num_speakers(self) -> int:
        return int(np.unique(self.labels).size)


def temporal_overlap(a: TimeSegment, b: TimeSegment) -> float:
    """Overlap duration between two segments in seconds (0 when disjoint)."""
    return max(0.0, min(a.t_end, b.t_end) - max(a.t_start, b.t_start))


def assign_cues_to_windows(
    windows: Sequence[TimeSegment],
    cues: Sequence[tuple[TimeSegment, Hashable]],
) -> list[Hashable | None]:
    """Assign each window the cue id covering most of it.

    For every window, overlap durations are accumulated per cue id and the id
    with the largest total wins (majority by duration). Ties resolve to the id
    whose overlapping cues start earliest, then to first appearance in `cues`.
    Windows with no overlapping cue get None.

    Parameters
    ----------
    windows : sequence of TimeSegment
    cues : sequence of (TimeSegment, cue_id)

    Returns
    -------
    list of cue_id or None, one entry per window.
    """
    out: list[Hashable | None] = []
    for window in windows:
        # cue_id -> [total overlap, earliest cue start, first appearance index]
        totals: dict[Hashable, list] = {}
        for idx, (segment, cue_id) in enumerate(cues):
            overlap = temporal_overlap(window, segment)
            if overlap <= 0.0:
                continue
            entry = totals.get(cue_id)
            if entry is None:
                totals[cue_id] = [overlap, segment.t_start, idx]
            else:
                entry[0] += overlap
                entry[1] = min(entry[1], segment.t_start)
        if not totals:
            out.append(None)
            continue
        best_id = min(totals, key=lambda cid: (-totals[cid][0], totals[cid][1], totals[cid][2]))
        out.append(best_id)
    return out
