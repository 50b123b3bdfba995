"""Diarization evaluation metrics: DER, JER, NMI, ARI, TextDER, and CpWER."""

from __future__ import annotations

import string
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.optimize

from .core import SpeakerLabeling, TimeSegment
from .errors import InvalidInputError, UndefinedMetricError

DEFAULT_COLLAR = 0.25

Interval = tuple[float, float]


@dataclass(frozen=True)
class DiarizationHypothesis:
    """Speaker-labeled time segments; same-speaker segments may be unmerged."""

    segments: tuple[TimeSegment, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "segments", tuple(self.segments))

    @property
    def speakers(self) -> list[str]:
        return sorted({s.label for s in self.segments})


@dataclass(frozen=True)
class WordRecord:
    """A transcript token with forced-alignment timestamps and its speaker."""

    word: str
    t_start: float
    t_end: float
    speaker: str

    def __post_init__(self) -> None:
        if self.t_end < self.t_start:
            raise InvalidInputError(
                f"word end ({self.t_end}) must not precede start ({self.t_start})"
            )


@dataclass(frozen=True)
class DerBreakdown:
    """DER and its additive components, all as percentages of scored speech."""

    der: float
    ms: float
    fa: float
    spke: float

    def __post_init__(self) -> None:
        if abs(self.der - (self.ms + self.fa + self.spke)) > 1e-9:
            raise InvalidInputError("der must equal ms + fa + spke")


def _merge_intervals(intervals: list[Interval]) -> list[Interval]:
    if not intervals:
        return []
    merged: list[Interval] = []
    for start, end in sorted(intervals):
        if merged and start <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], end))
        else:
            merged.append((start, end))
    return merged


def _speaker_intervals(hyp: DiarizationHypothesis) -> dict[str, list[Interval]]:
    by_speaker: dict[str, list[Interval]] = {}
    for segment in hyp.segments:
        by_speaker.setdefault(segment.label, []).append((segment.t_start, segment.t_end))
    return {spk: _merge_intervals(ivs) for spk, ivs in by_speaker.items()}


def _total_duration(intervals: list[Interval]) -> float:
    return sum(end - start for start, end in intervals)


def _intersection(a: list[Interval], b: list[Interval]) -> float:
    total = 0.0
    ia = ib = 0
    while ia < len(a) and ib < len(b):
        start = max(a[ia][0], b[ib][0])
        end = min(a[ia][1], b[ib][1])
        if end > start:
            total += end - start
        if a[ia][1] < b[ib][1]:
            ia += 1
        else:
            ib += 1
    return total


def _overlap_with_interval(intervals: list[Interval], start: float, end: float) -> float:
    return sum(max(0.0, min(e, end) - max(s, start)) for s, e in intervals)


def _covers(intervals: list[Interval], start: float, end: float) -> bool:
    return any(s <= start and e >= end for s, e in intervals)


def map_speakers(ref: DiarizationHypothesis, hyp: DiarizationHypothesis) -> dict[str, str]:
    """Optimal one-to-one partial mapping from hypothesis to reference speakers.

    Maximizes total overlapped duration via linear-sum assignment on the
    speaker overlap matrix; pairs with zero overlap are left unmapped.
    """
    if not ref.segments or not hyp.segments:
        raise InvalidInputError("both diarizations must be nonempty")
    ref_iv = _speaker_intervals(ref)
    hyp_iv = _speaker_intervals(hyp)
    ref_speakers = sorted(ref_iv)
    hyp_speakers = sorted(hyp_iv)
    overlap = np.zeros((len(ref_speakers), len(hyp_speakers)))
    for ri, r in enumerate(ref_speakers):
        for hi, h in enumerate(hyp_speakers):
            overlap[ri, hi] = _intersection(ref_iv[r], hyp_iv[h])
    rows, cols = scipy.optimize.linear_sum_assignment(overlap, maximize=True)
    return {
        hyp_speakers[hi]: ref_speakers[ri]
        for ri, hi in zip(rows, cols)
        if overlap[ri, hi] > 0.0
    }


def _scoring_cells(
    ref_iv: dict[str, list[Interval]],
    hyp_iv: dict[str, list[Interval]],
    collar: float,
) -> list[tuple[float, float, bool]]:
    """Homogeneous cells (start, end, scored) covering the scoring timeline.

    Cell edges are all reference/hypothesis/collar boundaries, so speaker
    activity is constant inside each cell. Cells inside a +-collar zone around
    any reference boundary are flagged unscored.
    """
    collar_zones: list[Interval] = []
    if collar > 0.0:
        for intervals in ref_iv.values():
            for start, end in intervals:
                collar_zones.append((start - collar, start + collar))
                collar_zones.append((end - collar, end + collar))
        collar_zones = _merge_intervals(collar_zones)

    edges: set[float] = set()
    for intervals in list(ref_iv.values()) + list(hyp_iv.values()):
        for start, end in intervals:
            edges.add(start)
            edges.add(end)
    for start, end in collar_zones:
        edges.add(start)
        edges.add(end)
    ordered = sorted(edges)

    cells = []
    for start, end in zip(ordered, ordered[1:]):
        if end <= start:
            continue
        mid = 0.5 * (start + end)
        scored = not any(s <= mid <= e for s, e in collar_zones)
        cells.append((start, end, scored))
    return cells


def der(
    ref: DiarizationHypothesis,
    hyp: DiarizationHypothesis,
    collar: float = DEFAULT_COLLAR,
) -> DerBreakdown:
    """Diarization error rate with collar and multi-speaker accounting.

    A +-collar zone around every reference segment boundary is excised from
    scoring. In each remaining homogeneous cell, missed speech counts
    reference speakers in excess of hypothesis speakers, false alarm the
    converse, and speaker error the matched-capacity portion not explained by
    the optimal speaker mapping. All components are percentages of scored
    reference speech.
    """
    if collar < 0.0:
        raise InvalidInputError(f"collar must be nonnegative, got {collar}")
    if not ref.segments:
        raise UndefinedMetricError("reference contains no speech")
    ref_iv = _speaker_intervals(ref)
    hyp_iv = _speaker_intervals(hyp) if hyp.segments else {}
    mapping = map_speakers(ref, hyp) if hyp.segments else {}
    reverse = {r: h for h, r in mapping.items()}

    ms_time = fa_time = spke_time = scored_speech = 0.0
    for start, end, scored in _scoring_cells(ref_iv, hyp_iv, collar):
        if not scored:
            continue
        duration = end - start
        ref_active = [r for r, iv in ref_iv.items() if _covers(iv, start, end)]
        hyp_active = {h for h, iv in hyp_iv.items() if _covers(iv, start, end)}
        n_ref = len(ref_active)
        n_hyp = len(hyp_active)
        n_correct = sum(1 for r in ref_active if reverse.get(r) in hyp_active)
        ms_time += duration * max(0, n_ref - n_hyp)
        fa_time += duration * max(0, n_hyp - n_ref)
        spke_time += duration * (min(n_ref, n_hyp) - n_correct)
        scored_speech += duration * n_ref

    if scored_speech <= 0.0:
        raise UndefinedMetricError("no scored reference speech (collar excised everything)")
    ms = 100.0 * ms_time / scored_speech
    fa = 100.0 * fa_time / scored_speech
    spke = 100.0 * spke_time / scored_speech
    return DerBreakdown(der=ms + fa + spke, ms=ms, fa=fa, spke=spke)


def jer(ref: DiarizationHypothesis, hyp: DiarizationHypothesis) -> float:
    """Jaccard error rate: mean per-reference-speaker 1 - intersection/union.

    Uses the optimal speaker mapping; reference speakers without a mapped
    hypothesis speaker score 100%.
    """
    if not ref.segments:
        raise UndefinedMetricError("reference contains no speech")
    ref_iv = _speaker_intervals(ref)
    hyp_iv = _speaker_intervals(hyp) if hyp.segments else {}
    mapping = map_speakers(ref, hyp) if hyp.segments else {}
    reverse = {r: h for h, r in mapping.items()}
    errors = []
    for r, r_iv in ref_iv.items():
        h = reverse.get(r)
        if h is None:
            errors.append(1.0)
            continue
        inter = _intersection(r_iv, hyp_iv[h])
        union = _total_duration(r_iv) + _total_duration(hyp_iv[h]) - inter
        errors.append(1.0 - inter / union)
    return 100.0 * float(np.mean(errors))


def _contingency(a: SpeakerLabeling, b: SpeakerLabeling) -> np.ndarray:
    if a.n != b.n:
        raise InvalidInputError(f"labelings have different lengths ({a.n} vs {b.n})")
    _, ai = np.unique(a.labels, return_inverse=True)
    _, bi = np.unique(b.labels, return_inverse=True)
    table = np.zeros((ai.max() + 1, bi.max() + 1), dtype=np.int64)
    np.add.at(table, (ai, bi), 1)
    return table


def nmi(a: SpeakerLabeling, b: SpeakerLabeling) -> float:
    """Normalized mutual information I(a;b) / sqrt(H(a) H(b)).

    1.0 when both partitions are the same single cluster; 0.0 when exactly one
    partition is constant.
    """
    table = _contingency(a, b)
    n = table.sum()
    pa = table.sum(axis=1) / n
    pb = table.sum(axis=0) / n
    ha = -np.sum(pa * np.log(pa, where=pa > 0, out=np.zeros_like(pa)))
    hb = -np.sum(pb * np.log(pb, where=pb > 0, out=np.zeros_like(pb)))
    if ha == 0.0 and hb == 0.0:
        return 1.0
    if ha == 0.0 or hb == 0.0:
        return 0.0
    pab = table / n
    outer = pa[:, None] * pb[None, :]
    nonzero = pab > 0
    mi = np.sum(pab[nonzero] * np.log(pab[nonzero] / outer[nonzero]))
    return float(min(1.0, max(0.0, mi / np.sqrt(ha * hb))))


def ari(a: SpeakerLabeling, b: SpeakerLabeling) -> float:
    """Adjusted Rand index from the contingency table."""
    table = _contingency(a, b)
    n = int(table.sum())
    if n < 2:
        return 1.0

    def comb2(x: np.ndarray) -> np.ndarray:
        return x * (x - 1) / 2.0

    sum_cells = comb2(table.astype(float)).sum()
    sum_a = comb2(table.sum(axis=1).astype(float)).sum()
    sum_b = comb2(table.sum(axis=0).astype(float)).sum()
    expected = sum_a * sum_b / comb2(np.float64(n))
    max_index = 0.5 * (sum_a + sum_b)
    if max_index == expected:
        return 1.0
    return float((sum_cells - expected) / (max_index - expected))


def _normalize_word(word: str) -> str:
    return word.lower().strip(string.punctuation)


def _attribute_words(
    words: Sequence[WordRecord], hyp_iv: dict[str, list[Interval]]
) -> list[str | None]:
    """Hypothesis speaker per word by maximum overlap, midpoint fallback on ties."""
    speakers = sorted(hyp_iv)
    attributed: list[str | None] = []
    for word in words:
        overlaps = {
            spk: _overlap_with_interval(hyp_iv[spk], word.t_start, word.t_end)
            for spk in speakers
        }
        best = max(overlaps.values(), default=0.0)
        candidates = [spk for spk in speakers if overlaps[spk] == best]
        if len(candidates) > 1 or best == 0.0:
            mid = 0.5 * (word.t_start + word.t_end)
            at_mid = [spk for spk in candidates if any(s <= mid < e for s, e in hyp_iv[spk])]
            if at_mid:
                candidates = at_mid
            elif best == 0.0:
                attributed.append(None)
                continue
        attributed.append(candidates[0])
    return attributed


def text_der(ref_words: Sequence[WordRecord], hyp: DiarizationHypothesis) -> float:
    """Percentage of reference words attributed to the wrong speaker.

    Each word goes to the hypothesis speaker with maximum temporal overlap;
    a one-to-one speaker mapping maximizing correctly attributed words is then
    chosen, and everything outside it (including unattributed words) counts as
    wrong.
    """
    if not ref_words:
        raise UndefinedMetricError("no reference words")
    hyp_iv = _speaker_intervals(hyp)
    attributed = _attribute_words(ref_words, hyp_iv)
    ref_speakers = sorted({w.speaker for w in ref_words})
    hyp_speakers = sorted(hyp_iv)
    counts = np.zeros((len(ref_speakers), len(hyp_speakers)), dtype=np.int64)
    r_index = {r: i for i, r in enumerate(ref_speakers)}
    h_index = {h: i for i, h in enumerate(hyp_speakers)}
    for word, spk in zip(ref_words, attributed):
        if spk is not None:
            counts[r_index[word.speaker], h_index[spk]] += 1
    correct = 0
    if counts.size:
        rows, cols = scipy.optimize.linear_sum_assignment(counts, maximize=True)
        correct = int(counts[rows, cols].sum())
    return 100.0 * (1.0 - correct / len(ref_words))


def _edit_distance(a: Sequence[str], b: Sequence[str]) -> int:
    """Word-level Levenshtein distance."""
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, wa in enumerate(a, start=1):
        current = [i] + [0] * len(b)
        for j, wb in enumerate(b, start=1):
            current[j] = min(
                previous[j] + 1,
                current[j - 1] + 1,
                previous[j - 1] + (wa != wb),
            )
        previous = current
    return previous[len(b)]


def _speaker_transcripts(words: Sequence[WordRecord]) -> dict[str, list[str]]:
    ordered = sorted(words, key=lambda w: (w.t_start, w.t_end))
    out: dict[str, list[str]] = {}
    for word in ordered:
        token = _normalize_word(word.word)
        if token:
            out.setdefault(word.speaker, []).append(token)
    return {spk: tokens for spk, tokens in out.items() if tokens}


def cpwer(ref_words: Sequence[WordRecord], hyp_words: Sequence[WordRecord]) -> float:
    """Concatenated minimum-permutation word error rate.

    Words are concatenated per speaker in time order on each side; the total
    word-level edit distance is minimized over one-to-one speaker assignments
    (sides padded with empty transcripts), then normalized by the reference
    word count.
    """
    ref_by_speaker = _speaker_transcripts(ref_words)
    hyp_by_speaker = _speaker_transcripts(hyp_words)
    total_ref = sum(len(tokens) for tokens in ref_by_speaker.values())
    if total_ref == 0:
        raise UndefinedMetricError("no reference words")
    refs = [ref_by_speaker[s] for s in sorted(ref_by_speaker)]
    hyps = [hyp_by_speaker[s] for s in sorted(hyp_by_speaker)]
    size = max(len(refs), len(hyps))
    refs += [[]] * (size - len(refs))
    hyps += [[]] * (size - len(hyps))
    cost = np.zeros((size, size), dtype=np.int64)
    for i, r in enumerate(refs):
        for j, h in enumerate(hyps):
            cost[i, j] = _edit_distance(r, h)
    rows, cols = scipy.optimize.linear_sum_assignment(cost)
    return 100.0 * float(cost[rows, cols].sum()) / total_ref
