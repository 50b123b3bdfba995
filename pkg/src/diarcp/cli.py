"""Command-line surface: diarize, eval, simulate, and sweep."""

from __future__ import annotations

import dataclasses
import sys
from pathlib import Path

import click

from .clustering import ClusterConfig
from .errors import DiarcpError
from .fileio import (
    metrics_csv_text,
    metrics_human_text,
    read_pipeline_config,
    read_rttm,
    read_sweep_config,
    read_words,
    write_sweep_csv,
)
from .metrics import DEFAULT_COLLAR, cpwer, der, jer, text_der
from .pipeline import run_diarization
from .simulation import (
    SyntheticScenario,
    coverage_sweep_config,
    error_sweep_config,
    lambda_sweep_config,
    run_sweep,
)


@click.group()
def main() -> None:
    """Constraint-propagation speaker diarization and scoring toolkit."""


def _fail(exc: DiarcpError) -> None:
    click.echo(f"error: {exc}", err=True)
    sys.exit(1)


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False), help="Pipeline config (JSON).")
@click.option("--out", "out_dir", default="out", type=click.Path(file_okay=False), help="Output directory.")
@click.option("--seed", type=int, default=None, help="Override the clustering seed.")
@click.option("--lambda", "lambda_", type=float, default=None, help="Override the propagation strength.")
@click.option("--p-percentile", type=float, default=None, help="Override the row-thresholding percentile.")
@click.option("--max-speakers", type=int, default=None, help="Override the speaker-count cap.")
@click.option("--collar", type=float, default=None, help="Override the scoring collar in seconds.")
def diarize(config_path, out_dir, seed, lambda_, p_percentile, max_speakers, collar) -> None:
    """Run the diarization pipeline and write hypothesis.rttm (plus metrics.csv with a reference)."""
    try:
        config = read_pipeline_config(config_path)
        cluster = config.cluster
        if seed is not None:
            cluster = dataclasses.replace(cluster, seed=seed)
        if p_percentile is not None:
            cluster = dataclasses.replace(cluster, p_percentile=p_percentile)
        if max_speakers is not None:
            cluster = dataclasses.replace(cluster, max_speakers=max_speakers)
        overrides = {"cluster": cluster}
        if lambda_ is not None:
            overrides["lambda_"] = lambda_
        if collar is not None:
            overrides["collar"] = collar
        config = dataclasses.replace(config, **overrides)
        result = run_diarization(config, out_dir)
    except DiarcpError as exc:
        _fail(exc)
    click.echo(f"wrote {result.rttm_path}")
    if result.metrics is not None:
        click.echo(f"wrote {result.metrics_path}")
        click.echo(metrics_human_text(result.metrics), nl=False)


@main.command("eval")
@click.argument("ref_rttm", type=click.Path(exists=True, dir_okay=False))
@click.argument("hyp_rttm", type=click.Path(exists=True, dir_okay=False))
@click.option("--ref-words", type=click.Path(exists=True, dir_okay=False), default=None, help="Reference word records (enables TextDER).")
@click.option("--hyp-words", type=click.Path(exists=True, dir_okay=False), default=None, help="Hypothesis word records (with --ref-words, enables CpWER).")
@click.option("--collar", type=float, default=DEFAULT_COLLAR, show_default=True, help="DER collar in seconds.")
@click.option("--format", "fmt", type=click.Choice(["human", "csv"]), default="human", show_default=True)
def eval_cmd(ref_rttm, hyp_rttm, ref_words, hyp_words, collar, fmt) -> None:
    """Score a hypothesis RTTM against a reference RTTM."""
    try:
        reference = read_rttm(ref_rttm)
        hypothesis = read_rttm(hyp_rttm)
        breakdown = der(reference, hypothesis, collar)
        metrics = {
            "der": breakdown.der,
            "ms": breakdown.ms,
            "fa": breakdown.fa,
            "spke": breakdown.spke,
            "jer": jer(reference, hypothesis),
        }
        if ref_words is not None:
            reference_words = read_words(ref_words)
            metrics["text_der"] = text_der(reference_words, hypothesis)
            if hyp_words is not None:
                metrics["cpwer"] = cpwer(reference_words, read_words(hyp_words))
    except DiarcpError as exc:
        _fail(exc)
    text = metrics_csv_text(metrics) if fmt == "csv" else metrics_human_text(metrics)
    click.echo(text, nl=False)


def _run_and_write_sweep(scenario, sweep_cfg, cluster_cfg, out_dir: str) -> None:
    result = run_sweep(scenario, sweep_cfg, cluster_cfg, progress=click.echo)
    out_path = Path(out_dir) / "results.csv"
    write_sweep_csv(result, out_path)
    click.echo(f"wrote {out_path}")


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False), help="Sweep config (JSON).")
@click.option("--out", "out_dir", default="out", type=click.Path(file_okay=False), help="Output directory.")
@click.option("--seed", type=int, default=None, help="Override the scenario seed.")
def simulate(config_path, out_dir, seed) -> None:
    """Run the constraint-sensitivity sweep described by a config file."""
    try:
        scenario, sweep_cfg, cluster_cfg = read_sweep_config(config_path)
        if seed is not None:
            scenario = dataclasses.replace(scenario, seed=seed)
        _run_and_write_sweep(scenario, sweep_cfg, cluster_cfg, out_dir)
    except DiarcpError as exc:
        _fail(exc)


@main.command()
@click.argument("preset", type=click.Choice(["coverage", "errors", "lambda"]))
@click.option("--out", "out_dir", default="out", type=click.Path(file_okay=False), help="Output directory.")
@click.option("--seed", type=int, default=0, show_default=True, help="Scenario seed.")
@click.option("--seeds", "n_seeds", type=int, default=20, show_default=True, help="Repetitions per cell.")
@click.option("--lambda", "lambda_", type=float, default=0.5, show_default=True, help="Propagation strength for the coverage/errors presets.")
def sweep(preset, out_dir, seed, n_seeds, lambda_) -> None:
    """Run a preset sensitivity study on the default synthetic scenario."""
    try:
        if preset == "coverage":
            sweep_cfg = coverage_sweep_config(n_seeds=n_seeds, lam=lambda_)
        elif preset == "errors":
            sweep_cfg = error_sweep_config(n_seeds=n_seeds, lam=lambda_)
        else:
            sweep_cfg = lambda_sweep_config(n_seeds=n_seeds)
        scenario = SyntheticScenario(seed=seed)
        _run_and_write_sweep(scenario, sweep_cfg, None, out_dir)
    except DiarcpError as exc:
        _fail(exc)


if __name__ == "__main__":
    main()
