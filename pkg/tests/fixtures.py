"""Disk-backed fixtures shared by the CLI, pipeline, and acceptance tests."""

from __future__ import annotations

import json
from pathlib import Path

from diarcp.constraints import VisualCue, VisualCues
from diarcp.fileio import write_cues, write_embeddings, write_rttm
from diarcp.metrics import DiarizationHypothesis
from diarcp.pipeline import labels_to_segments
from diarcp.simulation import SyntheticScenario, gen_embeddings


def oracle_visual_cues(embeddings, labels) -> VisualCues:
    """One full-confidence cue per window whose face id is the true speaker."""
    return VisualCues(
        tuple(
            VisualCue(window, int(label), 1.0)
            for window, label in zip(embeddings.windows, labels.labels)
        )
    )


def reference_hypothesis(embeddings, labels) -> DiarizationHypothesis:
    return labels_to_segments(embeddings.windows, labels, speaker_prefix="ref")


def write_diarize_fixture(
    root: Path,
    scenario: SyntheticScenario,
    with_visual: bool = False,
    with_reference: bool = True,
    config_extra: dict | None = None,
):
    """Generate a synthetic recording on disk and a pipeline config pointing at it.

    Returns (config_path, embeddings, labels, reference).
    """
    root.mkdir(parents=True, exist_ok=True)
    embeddings, labels = gen_embeddings(scenario)
    write_embeddings(embeddings, root / "embeddings.csv")
    doc: dict = {"embeddings": "embeddings.csv"}
    if with_visual:
        write_cues(oracle_visual_cues(embeddings, labels), root / "visual.json")
        doc["visual_cues"] = "visual.json"
    reference = None
    if with_reference:
        reference = reference_hypothesis(embeddings, labels)
        write_rttm(reference, root / "reference.rttm")
        doc["reference_rttm"] = "reference.rttm"
    doc.update(config_extra or {})
    config_path = root / "config.json"
    config_path.write_text(json.dumps(doc, indent=2))
    return config_path, embeddings, labels, reference
