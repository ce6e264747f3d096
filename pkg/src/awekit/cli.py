"""Command-line front end: ``awe`` with one subcommand per pipeline stage."""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path

import click

from .awe import build_corpus_awes, save_awe_store
from .errors import AweKitError
from .manifest import load_manifest, validate_manifest
from .neighborhood import (
    aggregate_word_types,
    build_lexical_space,
    format_neighbor_table,
    lns_layer_report,
    load_awe_store_layer,
    neighbor_table,
)
from .nn import TrainConfig
from .reports import emit_report, write_sweep_summary_csv
from .ser import ALL_LAYERS, ExperimentConfig, layer_sweep, run_experiment
from .synth import generate_synthetic_corpus

log = logging.getLogger(__name__)


def _parse_int_list(text: str) -> list[int]:
    """Accept ``1,2,3`` and ``0..12`` range syntax, mixed freely."""
    out: list[int] = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        if ".." in chunk:
            lo, hi = chunk.split("..", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(chunk))
    if not out:
        raise click.BadParameter(f"no indices in {text!r}")
    return out


@click.group()
@click.option("--verbose", is_flag=True, help="Log progress details.")
def main(verbose: bool) -> None:
    """Pooled-word-embedding analysis and emotion-recognition experiments."""
    logging.basicConfig(
        level=logging.INFO if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )


@main.command()
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True))
def validate(manifest_path: str) -> None:
    """Check a corpus manifest and everything it references."""
    manifest = load_manifest(manifest_path)
    problems = validate_manifest(manifest, Path(manifest_path).parent)
    for problem in problems:
        click.echo(str(problem))
    if problems:
        raise SystemExit(1)
    click.echo(f"ok: {len(manifest.utterances)} utterances, no problems")


@main.command()
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True))
@click.option("--layers", default="0..12", show_default=True, help="Layer list, e.g. 0..12 or 0,3,9.")
@click.option("--out", "out_dir", required=True, type=click.Path())
def pool(manifest_path: str, layers: str, out_dir: str) -> None:
    """Pool word occurrences into per-layer embedding files."""
    manifest = load_manifest(manifest_path)
    per_layer = build_corpus_awes(manifest, Path(manifest_path).parent, _parse_int_list(layers))
    save_awe_store(per_layer, out_dir)
    n_rows = len(next(iter(per_layer.values())))
    click.echo(f"pooled {n_rows} word occurrences x {len(per_layer)} layers into {out_dir}")


@main.command()
@click.option("--awe-store", "store_dir", required=True, type=click.Path(exists=True))
@click.option("--lexical", "lexical_manifest", required=True, type=click.Path(exists=True),
              help="Corpus manifest supplying the lexical tensors.")
@click.option("--k", "ks", default="5,10,25,50", show_default=True)
@click.option("--min-count", default=1, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--plot-data", is_flag=True, help="Also write a series-description sidecar.")
def lns(store_dir: str, lexical_manifest: str, ks: str, min_count: int, out_path: str, plot_data: bool) -> None:
    """Neighborhood-similarity report per layer and neighbor count."""
    manifest = load_manifest(lexical_manifest)
    lexical = build_lexical_space(manifest, Path(lexical_manifest).parent, min_count=min_count)
    report = lns_layer_report(store_dir, lexical, ks=_parse_int_list(ks), min_count=min_count)
    written = emit_report(report, out_path, format="plot-data" if plot_data else "csv")
    click.echo(f"wrote {', '.join(str(p) for p in written)}")


@main.command()
@click.option("--awe-store", "store_dir", required=True, type=click.Path(exists=True))
@click.option("--lexical", "lexical_manifest", required=True, type=click.Path(exists=True))
@click.option("--layer", default=9, show_default=True)
@click.option("--words", required=True, help="Comma-separated word list.")
@click.option("--k", default=5, show_default=True)
@click.option("--min-count", default=1, show_default=True)
def neighbors(store_dir: str, lexical_manifest: str, layer: int, words: str, k: int, min_count: int) -> None:
    """Side-by-side lexical and acoustic neighbors (shared ones starred)."""
    manifest = load_manifest(lexical_manifest)
    lexical = build_lexical_space(manifest, Path(lexical_manifest).parent, min_count=min_count)
    acoustic = aggregate_word_types(load_awe_store_layer(store_dir, layer), min_count=min_count)
    word_list = [w.strip().lower() for w in words.split(",") if w.strip()]
    rows = neighbor_table(word_list, acoustic, lexical, k=k)
    click.echo(format_neighbor_table(rows))


@main.command()
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True))
@click.option("--feature", type=click.Choice(["mel", "raw", "awe"]), required=True)
@click.option("--fusion", default="none", show_default=True,
              help="none, concat, or xattn; comma-separated list allowed with --layer all.")
@click.option("--layer", default="0", show_default=True, help="Layer index or 'all'.")
@click.option("--runs", default=5, show_default=True)
@click.option("--seeds", default=None, help="Comma-separated seeds; defaults to 0..runs-1.")
@click.option("--split-ratio", default=0.8, show_default=True)
@click.option("--epochs", default=100, show_default=True)
@click.option("--batch-size", default=32, show_default=True)
@click.option("--learning-rate", default=1e-3, show_default=True)
@click.option("--hidden", default="128,16", show_default=True, help="Classifier hidden sizes.")
@click.option("--d-model", default=128, show_default=True)
@click.option("--text-vector", type=click.Choice(["mean", "first"]), default="mean", show_default=True)
@click.option("--workers", default=1, show_default=True, help="Parallel layer runs in a sweep.")
@click.option("--force-mel-xattn", is_flag=True, help="Allow the rejected mel + xattn combination.")
@click.option("--config", "config_path", default=None, type=click.Path(exists=True),
              help="JSON config; its entries override the flags.")
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--plot-data", is_flag=True)
def ser(
    manifest_path: str,
    feature: str,
    fusion: str,
    layer: str,
    runs: int,
    seeds: str | None,
    split_ratio: float,
    epochs: int,
    batch_size: int,
    learning_rate: float,
    hidden: str,
    d_model: int,
    text_vector: str,
    workers: int,
    force_mel_xattn: bool,
    config_path: str | None,
    out_dir: str,
    plot_data: bool,
) -> None:
    """Train emotion classifiers; single layer or full sweep."""
    hidden_sizes = _parse_int_list(hidden)
    if len(hidden_sizes) != 2:
        raise click.BadParameter("--hidden needs exactly two sizes")
    fusions = [f.strip() for f in fusion.split(",") if f.strip()]
    settings: dict = {
        "manifest_path": manifest_path,
        "feature": feature,
        "fusion": fusions[0],
        "layer": layer if layer == ALL_LAYERS else int(layer),
        "split_ratio": split_ratio,
        "n_runs": runs,
        "seeds": _parse_int_list(seeds) if seeds else None,
        "train": {
            "learning_rate": learning_rate,
            "batch_size": batch_size,
            "epochs": epochs,
        },
        "hidden1": hidden_sizes[0],
        "hidden2": hidden_sizes[1],
        "d_model": d_model,
        "text_vector": text_vector,
        "allow_mel_cross_attention": force_mel_xattn,
    }
    if config_path:
        overrides = json.loads(Path(config_path).read_text(encoding="utf-8"))
        train_overrides = overrides.pop("train", {})
        fusions = overrides.pop("fusions", fusions)
        settings.update(overrides)
        settings["train"].update(train_overrides)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    fmt = "plot-data" if plot_data else "csv"

    try:
        settings["train"] = TrainConfig(**settings["train"])
        config = ExperimentConfig(**settings)
        if config.layer == ALL_LAYERS:
            report = layer_sweep(config, fusions=fusions, workers=workers)
            written = emit_report(report, out / "sweep.csv", format=fmt)
            write_sweep_summary_csv(report, out / "sweep_summary.csv")
            written.append(out / "sweep_summary.csv")
            for row in report.rows:
                click.echo(
                    f"layer {row.layer:2d} {row.fusion:16s} "
                    f"wa {row.mean_wa:.4f} (+/- {row.std_wa:.4f}) {row.status}"
                )
            click.echo(f"wrote {', '.join(str(p) for p in written)}")
            if report.failed_rows:
                click.echo(f"{len(report.failed_rows)} layer runs failed", err=True)
                raise SystemExit(1)
        else:
            report = run_experiment(config)
            written = emit_report(report, out / "run.csv", format=fmt)
            click.echo(
                f"{report.feature}+{report.fusion} layer {report.layer}: "
                f"wa {report.mean_wa:.4f} (+/- {report.std_wa:.4f}) over {len(report.seeds)} seeds"
            )
            click.echo(f"wrote {', '.join(str(p) for p in written)}")
    except AweKitError as exc:
        click.echo(f"error: {exc}", err=True)
        raise SystemExit(1)


@main.command()
@click.option("--classes", default=4, show_default=True)
@click.option("--utts", default=200, show_default=True)
@click.option("--layers", default=13, show_default=True)
@click.option("--dim", default=32, show_default=True)
@click.option("--sep", default=5.0, show_default=True)
@click.option("--noise", default=1.0, show_default=True)
@click.option("--words-per-utt", default=8, show_default=True)
@click.option("--vocab-size", default=60, show_default=True)
@click.option("--signal-layers", default=None, help="Restrict the class signal to these layers.")
@click.option("--seed", default=7, show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
def synth(
    classes: int,
    utts: int,
    layers: int,
    dim: int,
    sep: float,
    noise: float,
    words_per_utt: int,
    vocab_size: int,
    signal_layers: str | None,
    seed: int,
    out_dir: str,
) -> None:
    """Generate a deterministic synthetic corpus."""
    manifest_path = generate_synthetic_corpus(
        out_dir,
        n_classes=classes,
        n_utterances=utts,
        n_layers=layers,
        dim=dim,
        separation=sep,
        noise_std=noise,
        words_per_utt=words_per_utt,
        vocab_size=vocab_size,
        signal_layers=_parse_int_list(signal_layers) if signal_layers else None,
        seed=seed,
    )
    click.echo(f"wrote {manifest_path}")


if __name__ == "__main__":
    main()
