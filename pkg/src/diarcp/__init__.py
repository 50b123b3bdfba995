"""Constraint-propagation speaker diarization engine and evaluation toolkit."""

from .affinity import AffinityMatrix, build_affinity, pair_similarity, refine_affinity
from .clustering import ClusterConfig, ahc, estimate_k, kmeans, repeated_labelings, spectral_cluster
from .constraints import (
    ConstraintMatrix,
    IntegrationParams,
    LinkSet,
    SemanticCues,
    VisualCue,
    VisualCues,
    encode_links,
    integrate,
    semantic_constraints,
    visual_constraints,
)
from .core import (
    EmbeddingSequence,
    SpeakerLabeling,
    TimeSegment,
    assign_cues_to_windows,
    temporal_overlap,
)
from .errors import DiarcpError
from .metrics import (
    DerBreakdown,
    DiarizationHypothesis,
    WordRecord,
    ari,
    cpwer,
    der,
    jer,
    map_speakers,
    nmi,
    text_der,
)
from .pipeline import labels_to_segments, run_diarization
from .propagation import (
    PropagatedConstraints,
    RefinedAffinity,
    apply_constraints,
    normalize_affinity,
    propagate,
    propagate_scores,
)
from .simulation import (
    SweepConfig,
    SyntheticScenario,
    gen_embeddings,
    inject_errors,
    run_sweep,
    sample_links,
    true_links,
)

__version__ = "0.1.0"

__all__ = [
    "AffinityMatrix",
    "ClusterConfig",
    "ConstraintMatrix",
    "DerBreakdown",
    "DiarcpError",
    "DiarizationHypothesis",
    "EmbeddingSequence",
    "IntegrationParams",
    "LinkSet",
    "PropagatedConstraints",
    "RefinedAffinity",
    "SemanticCues",
    "SpeakerLabeling",
    "SweepConfig",
    "SyntheticScenario",
    "TimeSegment",
    "VisualCue",
    "VisualCues",
    "WordRecord",
    "ahc",
    "apply_constraints",
    "ari",
    "assign_cues_to_windows",
    "build_affinity",
    "cpwer",
    "der",
    "encode_links",
    "estimate_k",
    "gen_embeddings",
    "inject_errors",
    "integrate",
    "jer",
    "kmeans",
    "labels_to_segments",
    "map_speakers",
    "nmi",
    "normalize_affinity",
    "pair_similarity",
    "propagate",
    "propagate_scores",
    "refine_affinity",
    "repeated_labelings",
    "run_diarization",
    "run_sweep",
    "sample_links",
    "semantic_constraints",
    "spectral_cluster",
    "temporal_overlap",
    "text_der",
    "true_links",
    "visual_constraints",
]
