"""Shared fixtures: a small hand-built corpus that tests can tamper with."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from awekit.manifest import (
    Manifest,
    UtteranceEntry,
    WordAlignment,
    save_alignments,
    save_manifest,
)
from awekit.tensorfile import write_tensor


def build_manual_corpus(root: Path, n_layers: int = 3, dim: int = 4) -> Path:
    """Two clean utterances with known tensors; returns the manifest path."""
    root.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(99)
    label_set = ["angry", "happy"]
    entries = []
    specs = [
        ("utt0", "angry", ["hello", "world"], [3, 4]),
        ("utt1", "happy", ["again"], [5]),
    ]
    for utt_id, label, words, frame_counts in specs:
        n_frames = sum(frame_counts) + 1
        audio = rng.normal(size=(n_layers, n_frames, dim))
        lexical = rng.normal(size=(len(words), dim))
        write_tensor(audio.shape, audio, root / f"{utt_id}.audio.awet")
        write_tensor(lexical.shape, lexical, root / f"{utt_id}.lex.awet")
        alignments = []
        offset = 0
        for j, (word, k) in enumerate(zip(words, frame_counts)):
            alignments.append(
                WordAlignment(word=word, start_s=offset * 0.020, end_s=(offset + k) * 0.020, token_index=j)
            )
            offset += k
        save_alignments(alignments, root / f"{utt_id}.jsonl")
        entries.append(
            UtteranceEntry(
                id=utt_id,
                audio_tensor_path=f"{utt_id}.audio.awet",
                lexical_tensor_path=f"{utt_id}.lex.awet",
                alignment_path=f"{utt_id}.jsonl",
                label=label,
                transcript=" ".join(words),
                n_frames=n_frames,
            )
        )
    manifest = Manifest(
        corpus_name="manual", label_set=label_set, utterances=entries, n_layers=n_layers
    )
    path = root / "manifest.json"
    save_manifest(manifest, path)
    return path


@pytest.fixture
def manual_corpus(tmp_path: Path) -> Path:
    return build_manual_corpus(tmp_path / "corpus")
