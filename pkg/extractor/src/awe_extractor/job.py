"""Extraction jobs: audio + transcripts + aligner output -> a corpus.

Per utterance the job decodes and resamples the audio, dumps every
speech-encoder layer, optionally the Mel stream on the same frame grid,
one lexical vector per transcript word, and the parsed word alignments.
Utterances that fail to decode, tokenize, or align are skipped with a
log line; the rest become a validating corpus.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .audio import load_wav, resample_to_16k
from .encoders import DEFAULT_SPEECH_MODEL, DEFAULT_TEXT_MODEL, SpeechEncoder, TextEncoder
from .formats import (
    FRAME_STRIDE_S,
    FRAME_WINDOW_S,
    write_alignments,
    write_manifest,
    write_tensor,
)
from .mel import log_mel_spectrogram
from .textgrid import TextGridError, parse_alignments

log = logging.getLogger(__name__)


@dataclass
class UtteranceSpec:
    id: str
    audio_path: Path
    transcript: str
    label: str


@dataclass
class ExtractionJob:
    utterances: list[UtteranceSpec]
    aligner_dir: Path
    out_dir: Path
    speech_model: str = DEFAULT_SPEECH_MODEL
    text_model: str = DEFAULT_TEXT_MODEL
    with_mel: bool = True
    n_mels: int = 80
    lexical_layer: int = -1
    corpus_name: str = "extracted"
    metadata: dict = field(default_factory=dict)


def read_transcript_table(path: str | Path) -> list[tuple[str, str, str]]:
    """TSV rows of (utterance id, transcript, label)."""
    rows = []
    with open(path, encoding="utf-8", newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh, delimiter="\t"), start=1):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 3:
                raise ValueError(f"{path}:{lineno}: expected id<TAB>transcript<TAB>label")
            rows.append((row[0].strip(), row[1].strip(), row[2].strip()))
    return rows


def _coverage_s(n_frames: int) -> float:
    return (n_frames - 1) * FRAME_STRIDE_S + FRAME_WINDOW_S


def _clamp_alignments(words, n_frames: int, utt_id: str) -> list[dict]:
    """Fit aligner spans inside the time covered by the frame grid.

    Aligner timestamps run to the end of the audio, which can exceed the
    last analysis window by a fraction of a frame; spans are clipped and
    words that fall entirely past coverage are dropped with a log line.
    """
    limit = _coverage_s(n_frames)
    records: list[dict] = []
    for w in words:
        if w.start_s >= limit:
            log.warning("%s: dropping word %r aligned past frame coverage", utt_id, w.word)
            continue
        records.append(
            {
                "word": w.word,
                "start_s": w.start_s,
                "end_s": min(w.end_s, limit),
                "token_index": len(records),
            }
        )
    return records


def run_extraction(job: ExtractionJob) -> Path:
    """Run the whole job; returns the manifest path."""
    out = Path(job.out_dir)
    (out / "tensors").mkdir(parents=True, exist_ok=True)
    (out / "alignments").mkdir(parents=True, exist_ok=True)
    (out / "lexical_maps").mkdir(parents=True, exist_ok=True)

    speech = SpeechEncoder(job.speech_model)
    text = TextEncoder(job.text_model, layer=job.lexical_layer)

    entries: list[dict] = []
    labels_seen: set[str] = set()
    for spec in sorted(job.utterances, key=lambda s: s.id):
        try:
            entry = _extract_one(spec, job, speech, text, out)
        except (OSError, ValueError, TextGridError, RuntimeError) as exc:
            log.warning("skipping utterance %r: %s", spec.id, exc)
            continue
        entries.append(entry)
        labels_seen.add(spec.label)

    if not entries:
        raise RuntimeError("no utterance survived extraction")

    manifest_path = out / "manifest.json"
    write_manifest(
        manifest_path,
        corpus_name=job.corpus_name,
        label_set=sorted(labels_seen),
        utterances=entries,
        n_layers=speech.n_layers,
        metadata={
            "speech_model": job.speech_model,
            "text_model": job.text_model,
            "lexical_hidden_layer": job.lexical_layer,
            "n_mels": job.n_mels if job.with_mel else None,
            **job.metadata,
        },
    )
    log.info("wrote %d utterances to %s", len(entries), out)
    return manifest_path


def _extract_one(
    spec: UtteranceSpec,
    job: ExtractionJob,
    speech: SpeechEncoder,
    text: TextEncoder,
    out: Path,
) -> dict:
    samples, rate = load_wav(spec.audio_path)
    samples = resample_to_16k(samples, rate)

    layers = speech.extract(samples)  # [n_layers, n_frames, hidden]
    n_frames = layers.shape[1]
    if n_frames < 1:
        raise ValueError(f"audio too short ({samples.size} samples at 16 kHz)")

    words = spec.transcript.lower().split()
    if not words:
        raise ValueError("empty transcript")
    lexical, token_map = text.embed_words(words)

    parsed = parse_alignments(Path(job.aligner_dir) / f"{spec.id}.TextGrid")
    aligned_words = [w.word for w in parsed]
    if aligned_words != words:
        log.warning(
            "%s: aligned words %s differ from transcript %s",
            spec.id,
            aligned_words,
            words,
        )
    records = _clamp_alignments(parsed, n_frames, spec.id)

    audio_rel = f"tensors/{spec.id}.audio.awet"
    lex_rel = f"tensors/{spec.id}.lex.awet"
    ali_rel = f"alignments/{spec.id}.jsonl"
    write_tensor(layers, out / audio_rel)
    write_tensor(lexical, out / lex_rel)
    write_alignments(records, out / ali_rel)
    (out / "lexical_maps" / f"{spec.id}.json").write_text(
        json.dumps(token_map, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )

    mel_rel = None
    if job.with_mel:
        mel = log_mel_spectrogram(samples, n_mels=job.n_mels)
        if abs(mel.shape[0] - n_frames) > 1:
            raise ValueError(
                f"mel frames {mel.shape[0]} vs speech frames {n_frames}: grids diverged"
            )
        if mel.shape[0] != n_frames:  # tolerate the odd one-frame edge
            mel = mel[:n_frames]
            if mel.shape[0] < n_frames:
                mel = np.pad(mel, ((0, n_frames - mel.shape[0]), (0, 0)), mode="edge")
        mel_rel = f"tensors/{spec.id}.mel.awet"
        write_tensor(mel[None, :, :], out / mel_rel)

    return {
        "id": spec.id,
        "audio_tensor_path": audio_rel,
        "lexical_tensor_path": lex_rel,
        "alignment_path": ali_rel,
        "label": spec.label,
        "transcript": " ".join(words),
        "n_frames": int(n_frames),
        "mel_tensor_path": mel_rel,
    }
