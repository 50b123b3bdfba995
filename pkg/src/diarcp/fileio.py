"""File formats for embeddings, RTTM, cue documents, word records, configs, and results."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

from .clustering import ClusterConfig
from .constraints import (
    DEFAULT_CONFIDENCE_THRESHOLD,
    IntegrationParams,
    SemanticCues,
    VisualCue,
    VisualCues,
)
from .core import EmbeddingSequence, TimeSegment
from .errors import DiarcpError, InvalidParameterError, ParseError
from .metrics import DEFAULT_COLLAR, DiarizationHypothesis, WordRecord
from .simulation import SweepConfig, SweepResult, SyntheticScenario


def _atomic_write_text(path: str | Path, text: str) -> None:
    """Write via a temp file in the target directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# RTTM
# ---------------------------------------------------------------------------

def read_rttm(path: str | Path) -> DiarizationHypothesis:
    """Parse SPEAKER records from an RTTM file."""
    segments = []
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            fields = line.split()
            if len(fields) < 9 or fields[0] != "SPEAKER":
                raise ParseError(f"{path}:{lineno}: not a SPEAKER record: {line.strip()!r}")
            try:
                tbeg = float(fields[3])
                tdur = float(fields[4])
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: bad time field: {exc}") from exc
            if tdur <= 0.0:
                raise ParseError(f"{path}:{lineno}: duration must be positive, got {tdur}")
            segments.append(TimeSegment(tbeg, tbeg + tdur, label=fields[7]))
    return DiarizationHypothesis(tuple(segments))


def write_rttm(hyp: DiarizationHypothesis, path: str | Path, file_id: str = "rec") -> None:
    lines = [
        f"SPEAKER {file_id} 1 {seg.t_start:.3f} {seg.duration:.3f} <NA> <NA> {seg.label} <NA> <NA>"
        for seg in hyp.segments
    ]
    _atomic_write_text(path, "".join(line + "\n" for line in lines))


# ---------------------------------------------------------------------------
# Embeddings (CSV: t_start,t_end,d0..d{D-1})
# ---------------------------------------------------------------------------

def read_embeddings(path: str | Path) -> EmbeddingSequence:
    """Parse a windowed-embedding CSV with header t_start,t_end,d0,...,d{D-1}."""
    with open(path, encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file") from None
        if len(header) < 3 or header[0] != "t_start" or header[1] != "t_end":
            raise ParseError(f"{path}:1: expected header t_start,t_end,d0,..., got {header[:3]}")
        dim = len(header) - 2
        if [h for h in header[2:]] != [f"d{i}" for i in range(dim)]:
            raise ParseError(f"{path}:1: dimension columns must be named d0..d{dim - 1}")
        windows = []
        rows = []
        previous_start = None
        for lineno, row in enumerate(reader, start=2):
            if len(row) != dim + 2:
                raise ParseError(
                    f"{path}:{lineno}: expected {dim + 2} fields, got {len(row)}"
                )
            try:
                values = [float(v) for v in row]
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: bad numeric field: {exc}") from exc
            t_start, t_end = values[0], values[1]
            if previous_start is not None and t_start < previous_start:
                raise ParseError(f"{path}:{lineno}: windows not sorted by t_start")
            previous_start = t_start
            try:
                windows.append(TimeSegment(t_start, t_end))
            except DiarcpError as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from exc
            rows.append(values[2:])
    try:
        return EmbeddingSequence(tuple(windows), rows)
    except DiarcpError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def write_embeddings(embeddings: EmbeddingSequence, path: str | Path) -> None:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["t_start", "t_end"] + [f"d{i}" for i in range(embeddings.dim)])
    for window, vector in zip(embeddings.windows, embeddings.vectors):
        writer.writerow([repr(window.t_start), repr(window.t_end)] + [repr(float(v)) for v in vector])
    _atomic_write_text(path, buffer.getvalue())


# ---------------------------------------------------------------------------
# Cue documents (JSON with a top-level "type" field)
# ---------------------------------------------------------------------------

def _require(doc: dict, key: str, kind: type, where: str) -> Any:
    if key not in doc:
        raise ParseError(f"{where}: missing field '{key}'")
    value = doc[key]
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if not isinstance(value, kind) or isinstance(value, bool):
        raise ParseError(f"{where}: field '{key}' must be {kind.__name__}")
    return value


def _segment_from(doc: dict, where: str, label: str = "") -> TimeSegment:
    t_start = _require(doc, "t_start", float, where)
    t_end = _require(doc, "t_end", float, where)
    try:
        return TimeSegment(t_start, t_end, label=label)
    except DiarcpError as exc:
        raise ParseError(f"{where}: {exc}") from exc


def read_cues(path: str | Path) -> VisualCues | SemanticCues:
    """Parse a cue document; the top-level "type" selects visual or semantic."""
    try:
        with open(path, encoding="utf-8") as handle:
            doc = json.load(handle)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: top level must be an object")
    kind = _require(doc, "type", str, str(path))
    if kind == "visual":
        entries = _require(doc, "cues", list, str(path))
        cues = []
        for idx, entry in enumerate(entries):
            where = f"{path}: cues[{idx}]"
            if not isinstance(entry, dict):
                raise ParseError(f"{where}: must be an object")
            segment = _segment_from(entry, where)
            face_id = _require(entry, "face_id", int, where)
            confidence = _require(entry, "confidence", float, where)
            if not 0.0 <= confidence <= 1.0:
                raise ParseError(f"{where}: field 'confidence' must lie in [0, 1]")
            cues.append(VisualCue(segment, face_id, confidence))
        return VisualCues(tuple(cues))
    if kind == "semantic":
        seg_docs = _require(doc, "non_dialogue_segments", list, str(path))
        segments = []
        for idx, entry in enumerate(seg_docs):
            where = f"{path}: non_dialogue_segments[{idx}]"
            if not isinstance(entry, dict):
                raise ParseError(f"{where}: must be an object")
            segments.append(_segment_from(entry, where))
        boundaries = _require(doc, "turn_boundaries", list, str(path))
        for idx, value in enumerate(boundaries):
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise ParseError(f"{path}: turn_boundaries[{idx}] must be a number")
        try:
            return SemanticCues(tuple(segments), tuple(float(b) for b in boundaries))
        except DiarcpError as exc:
            raise ParseError(f"{path}: {exc}") from exc
    raise ParseError(f"{path}: field 'type' must be 'visual' or 'semantic', got {kind!r}")


def write_cues(cues: VisualCues | SemanticCues, path: str | Path) -> None:
    if isinstance(cues, VisualCues):
        doc: dict[str, Any] = {
            "type": "visual",
            "cues": [
                {
                    "t_start": c.segment.t_start,
                    "t_end": c.segment.t_end,
                    "face_id": c.face_id,
                    "confidence": c.confidence,
                }
                for c in cues.cues
            ],
        }
    else:
        doc = {
            "type": "semantic",
            "non_dialogue_segments": [
                {"t_start": s.t_start, "t_end": s.t_end} for s in cues.non_dialogue_segments
            ],
            "turn_boundaries": list(cues.turn_boundaries),
        }
    _atomic_write_text(path, json.dumps(doc, indent=2) + "\n")


# ---------------------------------------------------------------------------
# Word records (CSV: word,t_start,t_end,speaker)
# ---------------------------------------------------------------------------

def read_words(path: str | Path) -> list[WordRecord]:
    with open(path, encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file") from None
        if header != ["word", "t_start", "t_end", "speaker"]:
            raise ParseError(f"{path}:1: expected header word,t_start,t_end,speaker")
        words = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 4:
                raise ParseError(f"{path}:{lineno}: expected 4 fields, got {len(row)}")
            try:
                t_start, t_end = float(row[1]), float(row[2])
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: bad time field: {exc}") from exc
            try:
                words.append(WordRecord(row[0], t_start, t_end, row[3]))
            except DiarcpError as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from exc
    return words


def write_words(words: Sequence[WordRecord], path: str | Path) -> None:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["word", "t_start", "t_end", "speaker"])
    for word in words:
        writer.writerow([word.word, repr(word.t_start), repr(word.t_end), word.speaker])
    _atomic_write_text(path, buffer.getvalue())


# ---------------------------------------------------------------------------
# Pipeline configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PipelineConfig:
    """Everything cmd_diarize needs: input paths plus stage parameters.

    lambda_ None selects the propagation strength by cue availability (0.95
    once semantic cues are present, 0.8 otherwise).
    """

    embeddings_path: Path
    visual_cues_path: Path | None = None
    semantic_cues_path: Path | None = None
    reference_rttm_path: Path | None = None
    integration: IntegrationParams = IntegrationParams()
    lambda_: float | None = None
    cluster: ClusterConfig = field(default_factory=ClusterConfig)
    collar: float = DEFAULT_COLLAR
    conf_threshold: float = DEFAULT_CONFIDENCE_THRESHOLD
    file_id: str = "rec"

    def __post_init__(self) -> None:
        if self.lambda_ is not None and not 0.0 <= self.lambda_ < 1.0:
            raise InvalidParameterError(f"lambda must lie in [0, 1), got {self.lambda_}")
        if self.collar < 0.0:
            raise InvalidParameterError(f"collar must be nonnegative, got {self.collar}")


def _config_float(doc: dict, key: str, where: str, default: float) -> float:
    if key not in doc:
        return default
    value = doc[key]
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ParseError(f"{where}: field '{key}' must be a number")
    return float(value)


def _config_int(doc: dict, key: str, where: str, default: int) -> int:
    if key not in doc:
        return default
    value = doc[key]
    if not isinstance(value, int) or isinstance(value, bool):
        raise ParseError(f"{where}: field '{key}' must be an integer")
    return value


def _cluster_from(doc: dict, where: str) -> ClusterConfig:
    known = {"max_speakers", "kmeans_restarts", "n_repetitions", "seed", "p_percentile"}
    for key in doc:
        if key not in known:
            raise ParseError(f"{where}: unknown field '{key}'")
    default = ClusterConfig()
    try:
        return ClusterConfig(
            max_speakers=_config_int(doc, "max_speakers", where, default.max_speakers),
            kmeans_restarts=_config_int(doc, "kmeans_restarts", where, default.kmeans_restarts),
            n_repetitions=_config_int(doc, "n_repetitions", where, default.n_repetitions),
            seed=_config_int(doc, "seed", where, default.seed),
            p_percentile=_config_float(doc, "p_percentile", where, default.p_percentile),
        )
    except DiarcpError as exc:
        raise ParseError(f"{where}: {exc}") from exc


def _load_json_object(path: str | Path) -> dict:
    try:
        with open(path, encoding="utf-8") as handle:
            doc = json.load(handle)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: top level must be an object")
    return doc


def read_pipeline_config(path: str | Path) -> PipelineConfig:
    """Parse a diarization config; relative paths resolve against the config file."""
    path = Path(path)
    doc = _load_json_object(path)
    base = path.parent

    def resolve(key: str, required: bool = False) -> Path | None:
        if key not in doc:
            if required:
                raise ParseError(f"{path}: missing field '{key}'")
            return None
        value = doc[key]
        if not isinstance(value, str):
            raise ParseError(f"{path}: field '{key}' must be a path string")
        return base / value

    integration_doc = doc.get("integration", {})
    if not isinstance(integration_doc, dict):
        raise ParseError(f"{path}: field 'integration' must be an object")
    alphas = integration_doc.get("alphas")
    if alphas is not None:
        if not isinstance(alphas, list) or not all(
            isinstance(a, (int, float)) and not isinstance(a, bool) for a in alphas
        ):
            raise ParseError(f"{path}: field 'integration.alphas' must be a list of numbers")
        alphas = tuple(float(a) for a in alphas)
    where = f"{path}: integration"
    try:
        integration = IntegrationParams(
            alphas=alphas,
            beta=_config_float(integration_doc, "beta", where, 1.0),
            theta=_config_float(integration_doc, "theta", where, 0.5),
            delta=_config_float(integration_doc, "delta", where, 0.5),
        )
    except DiarcpError as exc:
        raise ParseError(f"{where}: {exc}") from exc

    cluster_doc = doc.get("cluster", {})
    if not isinstance(cluster_doc, dict):
        raise ParseError(f"{path}: field 'cluster' must be an object")

    lambda_ = doc.get("lambda")
    if lambda_ is not None and (not isinstance(lambda_, (int, float)) or isinstance(lambda_, bool)):
        raise ParseError(f"{path}: field 'lambda' must be a number")
    file_id = doc.get("file_id", "rec")
    if not isinstance(file_id, str):
        raise ParseError(f"{path}: field 'file_id' must be a string")

    try:
        return PipelineConfig(
            embeddings_path=resolve("embeddings", required=True),
            visual_cues_path=resolve("visual_cues"),
            semantic_cues_path=resolve("semantic_cues"),
            reference_rttm_path=resolve("reference_rttm"),
            integration=integration,
            lambda_=float(lambda_) if lambda_ is not None else None,
            cluster=_cluster_from(cluster_doc, f"{path}: cluster"),
            collar=_config_float(doc, "collar", str(path), DEFAULT_COLLAR),
            conf_threshold=_config_float(
                doc, "conf_threshold", str(path), DEFAULT_CONFIDENCE_THRESHOLD
            ),
            file_id=file_id,
        )
    except DiarcpError as exc:
        raise ParseError(f"{path}: {exc}") from exc


# ---------------------------------------------------------------------------
# Sweep configuration and results
# ---------------------------------------------------------------------------

def read_sweep_config(
    path: str | Path,
) -> tuple[SyntheticScenario, SweepConfig, ClusterConfig | None]:
    """Parse a simulation config with 'scenario', 'sweep', and optional 'cluster' sections."""
    path = Path(path)
    doc = _load_json_object(path)

    scenario_doc = doc.get("scenario", {})
    if not isinstance(scenario_doc, dict):
        raise ParseError(f"{path}: field 'scenario' must be an object")
    where = f"{path}: scenario"
    default = SyntheticScenario()
    try:
        scenario = SyntheticScenario(
            n_speakers=_config_int(scenario_doc, "n_speakers", where, default.n_speakers),
            n_per_speaker=_config_int(scenario_doc, "n_per_speaker", where, default.n_per_speaker),
            dim=_config_int(scenario_doc, "dim", where, default.dim),
            separation=_config_float(scenario_doc, "separation", where, default.separation),
            noise_sigma=_config_float(scenario_doc, "noise_sigma", where, default.noise_sigma),
            seed=_config_int(scenario_doc, "seed", where, default.seed),
        )
    except DiarcpError as exc:
        raise ParseError(f"{where}: {exc}") from exc

    sweep_doc = doc.get("sweep")
    if not isinstance(sweep_doc, dict):
        raise ParseError(f"{path}: missing or invalid 'sweep' section")

    def grid(key: str, caster) -> tuple:
        if key not in sweep_doc:
            raise ParseError(f"{path}: sweep: missing field '{key}'")
        values = sweep_doc[key]
        if not isinstance(values, list) or not values:
            raise ParseError(f"{path}: sweep: field '{key}' must be a nonempty list")
        for v in values:
            if not isinstance(v, (int, float)) or isinstance(v, bool):
                raise ParseError(f"{path}: sweep: field '{key}' must contain numbers")
        return tuple(caster(v) for v in values)

    try:
        sweep = SweepConfig(
            p_ml_grid=grid("p_ml_grid", float),
            k_imbalance_grid=grid("k_imbalance_grid", int),
            p_err_grid=grid("p_err_grid", float),
            lambda_grid=grid("lambda_grid", float),
            n_seeds=_config_int(sweep_doc, "n_seeds", f"{path}: sweep", 20),
        )
    except DiarcpError as exc:
        raise ParseError(f"{path}: sweep: {exc}") from exc

    cluster = None
    if "cluster" in doc:
        if not isinstance(doc["cluster"], dict):
            raise ParseError(f"{path}: field 'cluster' must be an object")
        cluster = _cluster_from(doc["cluster"], f"{path}: cluster")
    return scenario, sweep, cluster


_SWEEP_COLUMNS = [
    "p_ml", "k_imbalance", "p_err", "lambda", "rep",
    "nmi", "ari", "nmi_baseline", "ari_baseline", "status",
]


def _fmt(value: float) -> str:
    return "nan" if value != value else f"{value:.6f}"


def sweep_csv_text(result: SweepResult) -> str:
    """Render per-repetition rows followed by per-cell mean rows."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(_SWEEP_COLUMNS)
    for row in result.rows:
        writer.writerow(
            [
                repr(row.p_ml), row.k_imbalance, repr(row.p_err), repr(row.lam), row.rep,
                _fmt(row.nmi), _fmt(row.ari),
                _fmt(row.nmi_baseline), _fmt(row.ari_baseline), row.status,
            ]
        )
    for mean in result.cell_means:
        writer.writerow(
            [
                repr(mean.p_ml), mean.k_imbalance, repr(mean.p_err), repr(mean.lam), "mean",
                _fmt(mean.nmi), _fmt(mean.ari),
                _fmt(mean.nmi_baseline), _fmt(mean.ari_baseline),
                f"ok={mean.n_ok}",
            ]
        )
    return buffer.getvalue()


def write_sweep_csv(result: SweepResult, path: str | Path) -> None:
    _atomic_write_text(path, sweep_csv_text(result))


# ---------------------------------------------------------------------------
# Metric reports
# ---------------------------------------------------------------------------

def metrics_csv_text(metrics: dict[str, float]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["metric", "value"])
    for name, value in metrics.items():
        writer.writerow([name, _fmt(float(value))])
    return buffer.getvalue()


def metrics_human_text(metrics: dict[str, float]) -> str:
    width = max(len(name) for name in metrics)
    lines = [f"{name:<{width}}  {float(value):10.4f}" for name, value in metrics.items()]
    return "".join(line + "\n" for line in lines)


def write_metrics_csv(metrics: dict[str, float], path: str | Path) -> None:
    _atomic_write_text(path, metrics_csv_text(metrics))
