"""End-to-end diarization: affinity, constraints, propagation, clustering, segments, metrics."""

from __future__ import annotations

from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .affinity import build_affinity
from .clustering import repeated_labelings
from .constraints import integrate, semantic_constraints, visual_constraints
from .core import SpeakerLabeling, TimeSegment, assign_cues_to_windows
from .errors import DiarcpError, PipelineStageError
from .fileio import (
    PipelineConfig,
    read_cues,
    read_embeddings,
    read_rttm,
    write_metrics_csv,
    write_rttm,
)
from .metrics import DiarizationHypothesis, ari, der, jer, nmi
from .propagation import (
    LAMBDA_VISUAL_ONLY,
    LAMBDA_WITH_SEMANTIC,
    apply_constraints,
    propagate,
)


@dataclass(frozen=True)
class DiarizationOutput:
    """What a pipeline run produced: the written hypothesis and optional metrics."""

    hypothesis: DiarizationHypothesis
    labels: SpeakerLabeling
    metrics: dict[str, float] | None
    rttm_path: Path
    metrics_path: Path | None


@contextmanager
def _stage(name: str):
    try:
        yield
    except PipelineStageError:
        raise
    except (DiarcpError, OSError) as exc:
        raise PipelineStageError(name, exc) from exc


def labels_to_segments(
    windows: Sequence[TimeSegment], labels: SpeakerLabeling, speaker_prefix: str = "spk"
) -> DiarizationHypothesis:
    """Merge consecutive same-label windows into speaker segments.

    A label change between window i and i+1 places the segment boundary
    halfway between window i's end and window i+1's start, which also covers
    overlapping and gapped window layouts.
    """
    lab = labels.labels
    if len(windows) != lab.size:
        raise DiarcpError(f"got {len(windows)} windows for {lab.size} labels")
    segments = []
    start = windows[0].t_start
    for i in range(1, len(windows)):
        if lab[i] != lab[i - 1]:
            boundary = 0.5 * (windows[i - 1].t_end + windows[i].t_start)
            segments.append(TimeSegment(start, boundary, label=f"{speaker_prefix}{lab[i - 1]}"))
            start = boundary
    segments.append(TimeSegment(start, windows[-1].t_end, label=f"{speaker_prefix}{lab[-1]}"))
    return DiarizationHypothesis(tuple(segments))


def reference_window_labels(
    windows: Sequence[TimeSegment], reference: DiarizationHypothesis
) -> list[int | None]:
    """Ground-truth cluster id per window by majority overlap with reference segments."""
    assigned = assign_cues_to_windows(
        windows, [(seg, seg.label) for seg in reference.segments]
    )
    ids: dict[str, int] = {}
    out: list[int | None] = []
    for name in assigned:
        if name is None:
            out.append(None)
        else:
            out.append(ids.setdefault(name, len(ids)))
    return out


def run_diarization(config: PipelineConfig, out_dir: str | Path) -> DiarizationOutput:
    """Execute the full pipeline described by `config` and write outputs to `out_dir`.

    Stages: read inputs, build the acoustic affinity, construct per-modality
    constraints, integrate them with acoustic arbitration, propagate, fold the
    result back into the affinity, cluster, and synthesize segments. The
    hypothesis RTTM comes from clustering repetition 0; when a reference RTTM
    is configured, reported metrics are means over all repetitions.
    """
    out_dir = Path(out_dir)

    with _stage("io"):
        embeddings = read_embeddings(config.embeddings_path)
        visual = read_cues(config.visual_cues_path) if config.visual_cues_path else None
        semantic = read_cues(config.semantic_cues_path) if config.semantic_cues_path else None
        reference = (
            read_rttm(config.reference_rttm_path) if config.reference_rttm_path else None
        )

    with _stage("affinity"):
        acoustic = build_affinity(embeddings)

    with _stage("constraints"):
        z_list = []
        if visual is not None:
            z_list.append(visual_constraints(embeddings.windows, visual, config.conf_threshold))
        if semantic is not None:
            z_list.append(semantic_constraints(embeddings.windows, semantic))

    if z_list:
        with _stage("integration"):
            combined = integrate(z_list, acoustic, config.integration)
        with _stage("propagation"):
            lam = config.lambda_
            if lam is None:
                lam = LAMBDA_WITH_SEMANTIC if semantic is not None else LAMBDA_VISUAL_ONLY
            propagated = propagate(combined, acoustic, lam)
            refined = apply_constraints(acoustic, propagated)
    else:
        refined = acoustic

    with _stage("clustering"):
        labelings = repeated_labelings(refined, config.cluster)

    with _stage("segmentation"):
        hypotheses = [labels_to_segments(embeddings.windows, lab) for lab in labelings]

    metrics: dict[str, float] | None = None
    if reference is not None:
        with _stage("scoring"):
            metrics = _score_repetitions(embeddings.windows, labelings, hypotheses, reference, config.collar)

    with _stage("io"):
        rttm_path = out_dir / "hypothesis.rttm"
        write_rttm(hypotheses[0], rttm_path, file_id=config.file_id)
        metrics_path = None
        if metrics is not None:
            metrics_path = out_dir / "metrics.csv"
            write_metrics_csv(metrics, metrics_path)

    return DiarizationOutput(hypotheses[0], labelings[0], metrics, rttm_path, metrics_path)


def _score_repetitions(
    windows: Sequence[TimeSegment],
    labelings: list[SpeakerLabeling],
    hypotheses: list[DiarizationHypothesis],
    reference: DiarizationHypothesis,
    collar: float,
) -> dict[str, float]:
    """DER/JER plus window-level NMI/ARI, averaged over clustering repetitions."""
    ref_labels = reference_window_labels(windows, reference)
    covered = [i for i, lab in enumerate(ref_labels) if lab is not None]
    truth = SpeakerLabeling([ref_labels[i] for i in covered]) if covered else None

    breakdowns = [der(reference, hyp, collar) for hyp in hypotheses]
    jers = [jer(reference, hyp) for hyp in hypotheses]
    metrics = {
        "der": float(np.mean([b.der for b in breakdowns])),
        "ms": float(np.mean([b.ms for b in breakdowns])),
        "fa": float(np.mean([b.fa for b in breakdowns])),
        "spke": float(np.mean([b.spke for b in breakdowns])),
        "jer": float(np.mean(jers)),
    }
    if truth is not None:
        restricted = [SpeakerLabeling(lab.labels[covered]) for lab in labelings]
        metrics["nmi"] = float(np.mean([nmi(truth, lab) for lab in restricted]))
        metrics["ari"] = float(np.mean([ari(truth, lab) for lab in restricted]))
    metrics["n_repetitions"] = float(len(labelings))
    return metrics
