"""Deterministic synthetic corpora for desk-scale experiments.

Utterances are Gaussian frame clouds around per-class centroids, with a
per-word flavor vector shared by all frames of a word occurrence and a
per-layer mixing switch that controls which layers carry the class
signal. The emitted corpus uses the same container formats as a real
extraction (manifest, tensors, alignments) and validates cleanly.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ParameterError
from .manifest import (
    DEFAULT_FRAME_STRIDE_S,
    DEFAULT_FRAME_WINDOW_S,
    Manifest,
    UtteranceEntry,
    WordAlignment,
    save_alignments,
    save_manifest,
)
from .tensorfile import write_tensor

log = logging.getLogger(__name__)

_EMOTIONS = ["angry", "happy", "neutral", "sad", "surprise", "fear", "disgust", "calm"]


def _class_names(n: int) -> list[str]:
    names = _EMOTIONS[:n]
    names += [f"class{i}" for i in range(len(names), n)]
    return names


def _make_words(n: int) -> list[str]:
    consonants = "bdfgklmnprstvz"
    vowels = "aeiou"
    syllables = [c + v for c in consonants for v in vowels]
    words: list[str] = []
    i = 0
    while len(words) < n:
        w = syllables[i % len(syllables)] + syllables[(i * 7 + 3) % len(syllables)]
        if w not in words:
            words.append(w)
        i += 1
    return words


def _orthonormal_directions(rng: np.random.Generator, dim: int, n: int) -> np.ndarray:
    if dim < n:
        raise ParameterError(f"dimension {dim} cannot hold {n} orthogonal class directions")
    q, _ = np.linalg.qr(rng.normal(size=(dim, n)))
    return q[:, :n]


def generate_synthetic_corpus(
    out_dir: str | Path,
    n_classes: int = 4,
    n_utterances: int = 200,
    n_layers: int = 13,
    dim: int = 32,
    words_per_utt: int = 8,
    noise_std: float = 1.0,
    separation: float = 5.0,
    seed: int = 7,
    vocab_size: int = 60,
    lex_dim: int | None = None,
    mel_dim: int = 20,
    signal_layers: Sequence[int] | None = None,
    word_signal: float = 0.5,
    frames_per_word: tuple[int, int] = (3, 6),
    corpus_name: str = "synthetic",
) -> Path:
    """Write a corpus under ``out_dir`` and return the manifest path.

    ``separation`` scales the distance between class centroids in units
    of ``noise_std``; ``signal_layers=None`` plants the class signal in
    every layer, otherwise only in the listed ones. Identical arguments
    produce byte-identical output.
    """
    if min(n_classes, n_utterances, n_layers, dim, words_per_utt, vocab_size) < 1:
        raise ParameterError("all corpus counts must be >= 1")
    if separation < 0 or noise_std <= 0:
        raise ParameterError("need separation >= 0 and noise_std > 0")
    lex_dim = lex_dim or dim
    out = Path(out_dir)
    (out / "tensors").mkdir(parents=True, exist_ok=True)
    (out / "alignments").mkdir(parents=True, exist_ok=True)

    rng = np.random.default_rng(seed)
    label_set = _class_names(n_classes)
    vocabulary = _make_words(vocab_size)

    class_dirs = _orthonormal_directions(rng, dim, n_classes)
    mel_dirs = _orthonormal_directions(rng, mel_dim, n_classes)
    lex_base = rng.normal(size=(vocab_size, lex_dim))
    word_flavor = rng.normal(size=(vocab_size, dim)) * word_signal * noise_std

    mix = np.zeros(n_layers)
    if signal_layers is None:
        mix[:] = 1.0
    else:
        for layer in signal_layers:
            if not 0 <= layer < n_layers:
                raise ParameterError(f"signal layer {layer} outside 0..{n_layers - 1}")
            mix[layer] = 1.0

    labels = np.tile(np.arange(n_classes), n_utterances // n_classes + 1)[:n_utterances]
    labels = labels[rng.permutation(n_utterances)]

    stride, window = DEFAULT_FRAME_STRIDE_S, DEFAULT_FRAME_WINDOW_S
    lo_frames, hi_frames = frames_per_word
    entries: list[UtteranceEntry] = []
    for u in range(n_utterances):
        utt_id = f"utt{u:04d}"
        cls = int(labels[u])
        word_ids = rng.integers(0, vocab_size, size=words_per_utt)
        frame_counts = rng.integers(lo_frames, hi_frames + 1, size=words_per_utt)
        n_frames = int(frame_counts.sum()) + 2  # trailing silence pad

        centroid = separation * noise_std * class_dirs[:, cls]
        word_component = np.zeros((n_frames, dim))
        alignments: list[WordAlignment] = []
        offset = 0
        for j, (wid, k) in enumerate(zip(word_ids, frame_counts)):
            word_component[offset : offset + k] = word_flavor[wid]
            alignments.append(
                WordAlignment(
                    word=vocabulary[wid],
                    start_s=offset * stride,
                    end_s=(offset + int(k)) * stride,
                    token_index=j,
                )
            )
            offset += int(k)

        audio = rng.normal(0.0, noise_std, size=(n_layers, n_frames, dim))
        audio += word_component[None, :, :]
        audio += mix[:, None, None] * centroid[None, None, :]

        mel = rng.normal(0.0, noise_std, size=(1, n_frames, mel_dim))
        mel += separation * noise_std * mel_dirs[:, cls][None, None, :]

        lexical = lex_base[word_ids] + 0.1 * rng.normal(size=(words_per_utt, lex_dim))

        audio_rel = f"tensors/{utt_id}.audio.awet"
        lex_rel = f"tensors/{utt_id}.lex.awet"
        mel_rel = f"tensors/{utt_id}.mel.awet"
        ali_rel = f"alignments/{utt_id}.jsonl"
        write_tensor(audio.shape, audio, out / audio_rel)
        write_tensor(lexical.shape, lexical, out / lex_rel)
        write_tensor(mel.shape, mel, out / mel_rel)
        save_alignments(alignments, out / ali_rel)

        entries.append(
            UtteranceEntry(
                id=utt_id,
                audio_tensor_path=audio_rel,
                lexical_tensor_path=lex_rel,
                alignment_path=ali_rel,
                label=label_set[cls],
                transcript=" ".join(vocabulary[w] for w in word_ids),
                n_frames=n_frames,
                mel_tensor_path=mel_rel,
            )
        )

    manifest = Manifest(
        corpus_name=corpus_name,
        label_set=label_set,
        utterances=entries,
        n_layers=n_layers,
        frame_stride_s=stride,
        frame_window_s=window,
        metadata={
            "generator": {
                "n_classes": n_classes,
                "n_utterances": n_utterances,
                "n_layers": n_layers,
                "dim": dim,
                "words_per_utt": words_per_utt,
                "noise_std": noise_std,
                "separation": separation,
                "seed": seed,
                "vocab_size": vocab_size,
                "lex_dim": lex_dim,
                "mel_dim": mel_dim,
                "signal_layers": list(signal_layers) if signal_layers is not None else None,
                "word_signal": word_signal,
                "frames_per_word": list(frames_per_word),
            }
        },
    )
    manifest_path = out / "manifest.json"
    save_manifest(manifest, manifest_path)
    log.info("synthetic corpus with %d utterances written to %s", n_utterances, out)
    return manifest_path
