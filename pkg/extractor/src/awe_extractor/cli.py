"""Command-line entry point: ``awe-extract``."""

from __future__ import annotations

import logging
from pathlib import Path

import click

from .encoders import DEFAULT_SPEECH_MODEL, DEFAULT_TEXT_MODEL
from .job import ExtractionJob, UtteranceSpec, read_transcript_table, run_extraction


@click.command()
@click.option("--audio-dir", required=True, type=click.Path(exists=True, file_okay=False),
              help="Directory of <id>.wav files.")
@click.option("--transcripts", "transcripts_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="TSV of id<TAB>transcript<TAB>label.")
@click.option("--aligner-dir", required=True, type=click.Path(exists=True, file_okay=False),
              help="Directory of <id>.TextGrid aligner outputs.")
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--mel/--no-mel", default=True, show_default=True)
@click.option("--speech-model", default=DEFAULT_SPEECH_MODEL, show_default=True)
@click.option("--text-model", default=DEFAULT_TEXT_MODEL, show_default=True)
@click.option("--lexical-layer", default=-1, show_default=True,
              help="Hidden layer for word embeddings (-1 = last).")
@click.option("--n-mels", default=80, show_default=True)
@click.option("--corpus-name", default="extracted", show_default=True)
@click.option("--merge-label", "merge_labels", multiple=True, metavar="FROM=TO",
              help="Fold one label into another before extraction (repeatable), "
              "e.g. --merge-label excited=happy.")
@click.option("--verbose", is_flag=True)
def main(
    audio_dir: str,
    transcripts_path: str,
    aligner_dir: str,
    out_dir: str,
    mel: bool,
    speech_model: str,
    text_model: str,
    lexical_layer: int,
    n_mels: int,
    corpus_name: str,
    merge_labels: tuple[str, ...],
    verbose: bool,
) -> None:
    """Dump layered speech states, word embeddings, Mel features, and
    alignments into an analysis-ready corpus."""
    logging.basicConfig(
        level=logging.INFO if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    relabel = {}
    for rule in merge_labels:
        if "=" not in rule:
            raise click.BadParameter(f"expected FROM=TO, got {rule!r}")
        source, target = rule.split("=", 1)
        relabel[source.strip()] = target.strip()

    table = read_transcript_table(transcripts_path)
    utterances = [
        UtteranceSpec(
            id=utt_id,
            audio_path=Path(audio_dir) / f"{utt_id}.wav",
            transcript=transcript,
            label=relabel.get(label, label),
        )
        for utt_id, transcript, label in table
    ]
    job = ExtractionJob(
        utterances=utterances,
        aligner_dir=Path(aligner_dir),
        out_dir=Path(out_dir),
        speech_model=speech_model,
        text_model=text_model,
        with_mel=mel,
        n_mels=n_mels,
        lexical_layer=lexical_layer,
        corpus_name=corpus_name,
    )
    manifest_path = run_extraction(job)
    click.echo(f"wrote {manifest_path}")


if __name__ == "__main__":
    main()
