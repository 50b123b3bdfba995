"""Synthetic-constraint sensitivity studies: coverage, imbalance, error, and lambda sweeps.

Generates Gaussian speaker embeddings with ground-truth labels, samples
must-link/cannot-link constraints from the truth with controllable coverage
and imbalance, optionally flips a fraction of them, and measures how the
constrained clustering pipeline responds.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .affinity import build_affinity
from .clustering import ClusterConfig, spectral_cluster
from .constraints import LinkSet, encode_links
from .core import EmbeddingSequence, SpeakerLabeling, TimeSegment
from .errors import DiarcpError, InvalidParameterError
from .metrics import ari, nmi
from .propagation import apply_constraints, propagate
from .seeding import derive_rng, derive_seed

_WINDOW_SECONDS = 1.5

# Seed-derivation tags, one per independent random decision.
_TAG_DATA = 1
_TAG_SAMPLE = 2
_TAG_ERRORS = 3
_TAG_CLUSTER = 4
_TAG_BASELINE = 5


@dataclass(frozen=True)
class SyntheticScenario:
    """Gaussian-blob stand-in for real speaker embeddings.

    Centroids sit on a sphere of radius `separation` in random directions;
    each speaker contributes n_per_speaker samples with isotropic noise. Only
    the separation/noise ratio matters to the cosine affinity; the default 3.5
    leaves the unconstrained clustering imperfect (NMI around 0.6) so
    constraint effects are visible.
    """

    n_speakers: int = 4
    n_per_speaker: int = 60
    dim: int = 64
    separation: float = 3.5
    noise_sigma: float = 1.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_speakers < 1 or self.n_per_speaker < 1 or self.dim < 1:
            raise InvalidParameterError("scenario counts must be at least 1")
        if self.noise_sigma < 0.0:
            raise InvalidParameterError("noise_sigma must be nonnegative")
        if self.separation <= 0.0:
            raise InvalidParameterError("separation must be positive")


@dataclass(frozen=True)
class SweepConfig:
    """Grid definition; every combination of the four grids is one cell."""

    p_ml_grid: tuple[float, ...]
    k_imbalance_grid: tuple[int, ...]
    p_err_grid: tuple[float, ...]
    lambda_grid: tuple[float, ...]
    n_seeds: int = 20

    def __post_init__(self) -> None:
        object.__setattr__(self, "p_ml_grid", tuple(float(p) for p in self.p_ml_grid))
        object.__setattr__(self, "k_imbalance_grid", tuple(int(k) for k in self.k_imbalance_grid))
        object.__setattr__(self, "p_err_grid", tuple(float(p) for p in self.p_err_grid))
        object.__setattr__(self, "lambda_grid", tuple(float(v) for v in self.lambda_grid))
        if not (self.p_ml_grid and self.k_imbalance_grid and self.p_err_grid and self.lambda_grid):
            raise InvalidParameterError("all sweep grids must be nonempty")
        if any(not 0.0 <= p <= 1.0 for p in self.p_ml_grid):
            raise InvalidParameterError("p_ml values must lie in [0, 1]")
        if any(k < 1 for k in self.k_imbalance_grid):
            raise InvalidParameterError("k_imbalance values must be at least 1")
        if any(not 0.0 <= p <= 1.0 for p in self.p_err_grid):
            raise InvalidParameterError("p_err values must lie in [0, 1]")
        if any(not 0.0 <= v < 1.0 for v in self.lambda_grid):
            raise InvalidParameterError("lambda values must lie in [0, 1)")
        if self.n_seeds < 1:
            raise InvalidParameterError("n_seeds must be at least 1")

    @property
    def cells(self) -> list[tuple[float, int, float, float]]:
        return list(
            itertools.product(
                self.p_ml_grid, self.k_imbalance_grid, self.p_err_grid, self.lambda_grid
            )
        )


@dataclass(frozen=True)
class SweepRow:
    """Outcome of one grid cell under one repetition seed."""

    p_ml: float
    k_imbalance: int
    p_err: float
    lam: float
    rep: int
    nmi: float
    ari: float
    nmi_baseline: float
    ari_baseline: float
    status: str = "ok"


@dataclass(frozen=True)
class CellMean:
    """Per-cell averages over the repetitions that completed."""

    p_ml: float
    k_imbalance: int
    p_err: float
    lam: float
    n_ok: int
    nmi: float
    ari: float
    nmi_baseline: float
    ari_baseline: float


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]
    cell_means: tuple[CellMean, ...]


def gen_embeddings(scenario: SyntheticScenario) -> tuple[EmbeddingSequence, SpeakerLabeling]:
    """Synthetic embeddings plus their ground-truth speaker labels.

    Deterministic per scenario seed. Windows are consecutive 1.5 s intervals;
    labels are blocks of n_per_speaker per speaker.
    """
    rng = derive_rng(scenario.seed, _TAG_DATA)
    directions = rng.normal(size=(scenario.n_speakers, scenario.dim))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    centroids = scenario.separation * directions
    n = scenario.n_speakers * scenario.n_per_speaker
    vectors = np.repeat(centroids, scenario.n_per_speaker, axis=0)
    if scenario.noise_sigma > 0.0:
        vectors = vectors + scenario.noise_sigma * rng.normal(size=(n, scenario.dim))
    windows = tuple(
        TimeSegment(_WINDOW_SECONDS * i, _WINDOW_SECONDS * (i + 1)) for i in range(n)
    )
    labels = np.repeat(np.arange(scenario.n_speakers), scenario.n_per_speaker)
    return EmbeddingSequence(windows, vectors), SpeakerLabeling(labels)


def true_links(labels: SpeakerLabeling) -> LinkSet:
    """Every pair, classified by ground truth: same label must-link, different cannot-link."""
    lab = labels.labels
    iu, ju = np.triu_indices(lab.size, k=1)
    same = lab[iu] == lab[ju]
    must = frozenset(zip(iu[same].tolist(), ju[same].tolist()))
    cannot = frozenset(zip(iu[~same].tolist(), ju[~same].tolist()))
    return LinkSet(must, cannot)


def sample_links(all_links: LinkSet, p_ml: float, k_imbalance: int, seed: int) -> LinkSet:
    """Uniform sample of round(p_ml |M|) must-links and round(p_cl |C|) cannot-links.

    p_cl = k_imbalance * p_ml and must not exceed 1.
    """
    if not 0.0 <= p_ml <= 1.0:
        raise InvalidParameterError(f"p_ml must lie in [0, 1], got {p_ml}")
    if k_imbalance < 1:
        raise InvalidParameterError(f"k_imbalance must be at least 1, got {k_imbalance}")
    p_cl = k_imbalance * p_ml
    if p_cl > 1.0:
        raise InvalidParameterError(
            f"cannot-link coverage k_imbalance * p_ml = {p_cl:g} exceeds 1"
        )
    rng = derive_rng(seed, _TAG_SAMPLE)

    def pick(pairs: frozenset[tuple[int, int]], proportion: float) -> frozenset[tuple[int, int]]:
        ordered = sorted(pairs)
        count = int(round(proportion * len(ordered)))
        if count == 0:
            return frozenset()
        chosen = rng.choice(len(ordered), size=count, replace=False)
        return frozenset(ordered[i] for i in chosen)

    return LinkSet(pick(all_links.must_links, p_ml), pick(all_links.cannot_links, p_cl))


def inject_errors(links: LinkSet, p_err: float, seed: int) -> LinkSet:
    """Flip a uniform p_err fraction of constraints to the opposite type.

    The total number of constraints is unchanged.
    """
    if not 0.0 <= p_err <= 1.0:
        raise InvalidParameterError(f"p_err must lie in [0, 1], got {p_err}")
    pool = [(pair, True) for pair in sorted(links.must_links)]
    pool += [(pair, False) for pair in sorted(links.cannot_links)]
    n_flip = int(round(p_err * len(pool)))
    if n_flip == 0:
        return links
    rng = derive_rng(seed, _TAG_ERRORS)
    flip = set(rng.choice(len(pool), size=n_flip, replace=False).tolist())
    must: set[tuple[int, int]] = set()
    cannot: set[tuple[int, int]] = set()
    for idx, (pair, is_must) in enumerate(pool):
        if idx in flip:
            is_must = not is_must
        (must if is_must else cannot).add(pair)
    return LinkSet(frozenset(must), frozenset(cannot))


def _default_sweep_cluster_config() -> ClusterConfig:
    # One clustering per repetition; the repetition seeds already vary.
    return ClusterConfig(n_repetitions=1)


def run_sweep(
    scenario: SyntheticScenario,
    cfg: SweepConfig,
    cluster_cfg: ClusterConfig | None = None,
    progress: Callable[[str], None] | None = None,
) -> SweepResult:
    """Execute the full grid and score every cell against ground truth.

    For each repetition, embeddings (and hence affinity and baseline
    clustering) are shared across cells so cell-to-cell comparisons are
    paired; constraint sampling, error injection, and clustering seeds are
    derived per (cell, repetition). Cell failures (e.g. an infeasible
    coverage combination) are recorded as rows and do not abort the sweep.
    """
    if cluster_cfg is None:
        cluster_cfg = _default_sweep_cluster_config()
    base = scenario.seed

    per_rep = []
    for rep in range(cfg.n_seeds):
        rep_scenario = replace(scenario, seed=derive_seed(base, _TAG_DATA, rep))
        embeddings, labels = gen_embeddings(rep_scenario)
        affinity = build_affinity(embeddings)
        baseline_cfg = replace(cluster_cfg, seed=derive_seed(base, _TAG_BASELINE, rep))
        baseline = spectral_cluster(affinity, baseline_cfg)
        per_rep.append(
            (
                embeddings,
                labels,
                affinity,
                true_links(labels),
                nmi(labels, baseline),
                ari(labels, baseline),
            )
        )

    rows: list[SweepRow] = []
    means: list[CellMean] = []
    for cell_index, (p_ml, k_imb, p_err, lam) in enumerate(cfg.cells):
        cell_rows: list[SweepRow] = []
        for rep in range(cfg.n_seeds):
            embeddings, labels, affinity, all_links, base_nmi, base_ari = per_rep[rep]
            try:
                sampled = sample_links(
                    all_links, p_ml, k_imb, derive_seed(base, _TAG_SAMPLE, cell_index, rep)
                )
                corrupted = inject_errors(
                    sampled, p_err, derive_seed(base, _TAG_ERRORS, cell_index, rep)
                )
                encoded = encode_links(corrupted, embeddings.n)
                propagated = propagate(encoded, affinity, lam)
                refined = apply_constraints(affinity, propagated)
                run_cfg = replace(
                    cluster_cfg, seed=derive_seed(base, _TAG_CLUSTER, cell_index, rep)
                )
                predicted = spectral_cluster(refined, run_cfg)
                row = SweepRow(
                    p_ml, k_imb, p_err, lam, rep,
                    nmi(labels, predicted), ari(labels, predicted),
                    base_nmi, base_ari,
                )
            except DiarcpError as exc:
                row = SweepRow(
                    p_ml, k_imb, p_err, lam, rep,
                    float("nan"), float("nan"), base_nmi, base_ari,
                    status=f"error: {exc}",
                )
            cell_rows.append(row)
        rows.extend(cell_rows)
        ok = [r for r in cell_rows if r.status == "ok"]
        mean = CellMean(
            p_ml, k_imb, p_err, lam,
            n_ok=len(ok),
            nmi=float(np.mean([r.nmi for r in ok])) if ok else float("nan"),
            ari=float(np.mean([r.ari for r in ok])) if ok else float("nan"),
            nmi_baseline=float(np.mean([r.nmi_baseline for r in cell_rows])),
            ari_baseline=float(np.mean([r.ari_baseline for r in cell_rows])),
        )
        means.append(mean)
        if progress is not None:
            progress(
                f"p_ml={p_ml:g} k={k_imb} p_err={p_err:g} lambda={lam:g}: "
                f"nmi={mean.nmi:.4f} ari={mean.ari:.4f} "
                f"(baseline nmi={mean.nmi_baseline:.4f}, {mean.n_ok}/{cfg.n_seeds} ok)"
            )
    return SweepResult(tuple(rows), tuple(means))


def coverage_sweep_config(n_seeds: int = 20, lam: float = 0.5) -> SweepConfig:
    """Constraint-quantity study: coverage 2%..20% at imbalances 1..4, no errors."""
    return SweepConfig(
        p_ml_grid=tuple(np.round(np.arange(0.02, 0.201, 0.02), 2)),
        k_imbalance_grid=(1, 2, 3, 4),
        p_err_grid=(0.0,),
        lambda_grid=(lam,),
        n_seeds=n_seeds,
    )


def error_sweep_config(n_seeds: int = 20, lam: float = 0.5) -> SweepConfig:
    """Constraint-quality study: fixed 10% coverage with error rates 5%..25%."""
    return SweepConfig(
        p_ml_grid=(0.10,),
        k_imbalance_grid=(1,),
        p_err_grid=(0.05, 0.10, 0.15, 0.20, 0.25),
        lambda_grid=(lam,),
        n_seeds=n_seeds,
    )


def lambda_sweep_config(n_seeds: int = 20) -> SweepConfig:
    """Propagation-strength study: lambda 0.1..0.9 with 0% and 30% constraint errors."""
    return SweepConfig(
        p_ml_grid=(0.10,),
        k_imbalance_grid=(1,),
        p_err_grid=(0.0, 0.30),
        lambda_grid=tuple(np.round(np.arange(0.1, 0.91, 0.1), 1)),
        n_seeds=n_seeds,
    )
