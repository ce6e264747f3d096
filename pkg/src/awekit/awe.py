"""Acoustic word embeddings: frame spans, mean-pooling, and the on-disk store.

A word's time span is mapped to the set of analysis frames whose window
overlaps it; the frame vectors of each encoder layer are then averaged
into one fixed-size vector per (word occurrence, layer).
"""

from __future__ import annotations

import json
import logging
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    EmptySpanError,
    FormatError,
    IntervalError,
    LayerError,
    ParameterError,
    ShapeError,
)
from .manifest import (
    DEFAULT_FRAME_STRIDE_S,
    DEFAULT_FRAME_WINDOW_S,
    Manifest,
    WordAlignment,
    load_alignments,
    resolve_path,
)
from .tensorfile import read_tensor, write_tensor

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class FrameSpan:
    """Half-open frame range ``[first, last)``."""

    first: int
    last: int
    layer: int | None = None

    def __len__(self) -> int:
        return self.last - self.first


@dataclass
class AweRecord:
    """One word occurrence pooled at one layer."""

    word: str
    utterance_id: str
    layer: int
    vector: np.ndarray
    n_frames_pooled: int
    token_index: int


@dataclass
class LayeredUtterance:
    """All-layer frame representations of one utterance."""

    id: str
    tensor: np.ndarray  # [n_layers, n_frames, dim]
    label: str = ""
    transcript: str = ""


def _window_overlaps(i: int, start_s: float, end_s: float, stride_s: float, window_s: float) -> bool:
    # frame i covers [i*stride, i*stride + window); word covers [start, end)
    return i * stride_s < end_s and i * stride_s + window_s > start_s


def time_to_frame_span(
    start_s: float,
    end_s: float,
    stride_s: float = DEFAULT_FRAME_STRIDE_S,
    window_s: float = DEFAULT_FRAME_WINDOW_S,
    n_frames: int = 0,
) -> FrameSpan:
    """Frames whose analysis window overlaps ``[start_s, end_s)``.

    The result is clamped to ``[0, n_frames)``. A span that clamps to
    nothing (aligner drift past the last frame) falls back to the single
    frame nearest ``start_s``; the event is logged.
    """
    if end_s <= start_s:
        raise IntervalError(f"empty interval [{start_s}, {end_s})")
    if start_s < 0:
        raise IntervalError(f"negative start time {start_s}")
    if stride_s <= 0 or window_s < stride_s:
        raise ParameterError(
            f"need stride_s > 0 and window_s >= stride_s, got {stride_s}, {window_s}"
        )
    if n_frames < 1:
        raise ParameterError(f"n_frames must be >= 1, got {n_frames}")

    # Closed-form estimates, then repair against the exact float predicate
    # so boundary cases agree with a direct scan.
    first = math.floor((start_s - window_s) / stride_s) + 1
    while first * stride_s + window_s <= start_s:
        first += 1
    while first > 0 and (first - 1) * stride_s + window_s > start_s:
        first -= 1
    last = math.ceil(end_s / stride_s)
    while last * stride_s < end_s:
        last += 1
    while last > first and (last - 1) * stride_s >= end_s:
        last -= 1

    lo, hi = max(first, 0), min(last, n_frames)
    if lo < hi:
        return FrameSpan(lo, hi)

    nearest = min(max(round(start_s / stride_s), 0), n_frames - 1)
    log.warning(
        "word span [%.3f, %.3f)s maps to no frame of %d; using nearest frame %d",
        start_s,
        end_s,
        n_frames,
        nearest,
    )
    return FrameSpan(nearest, nearest + 1)


def pool_word(frames) -> np.ndarray:
    """Element-wise mean of a non-empty stack of equal-length vectors."""
    try:
        arr = np.asarray(frames, dtype=np.float64)
    except ValueError as exc:
        raise ShapeError(f"frame vectors have inconsistent dimensions: {exc}") from exc
    if arr.shape[0] == 0:
        raise EmptySpanError("cannot pool an empty frame sequence")
    if arr.ndim != 2:
        raise ShapeError(f"expected a sequence of vectors, got array of rank {arr.ndim}")
    if arr.shape[1] == 0:
        raise ShapeError("frame vectors have dimension 0")
    return arr.mean(axis=0)


def build_awes(
    utterance: LayeredUtterance,
    alignments: Sequence[WordAlignment],
    layers: Iterable[int],
    stride_s: float = DEFAULT_FRAME_STRIDE_S,
    window_s: float = DEFAULT_FRAME_WINDOW_S,
) -> list[AweRecord]:
    """Pool every (word occurrence, layer) pair of one utterance.

    Records come back ordered by (token_index, layer). Word strings are
    folded to lowercase.
    """
    tensor = np.asarray(utterance.tensor)
    if tensor.ndim != 3:
        raise ShapeError(
            f"utterance {utterance.id!r}: tensor rank {tensor.ndim}, expected 3"
        )
    n_layers, n_frames, _ = tensor.shape
    layers = sorted(set(int(l) for l in layers))
    for layer in layers:
        if not 0 <= layer < n_layers:
            raise LayerError(
                f"utterance {utterance.id!r}: layer {layer} outside 0..{n_layers - 1}"
            )

    records: list[AweRecord] = []
    for ali in sorted(alignments, key=lambda a: a.token_index):
        try:
            span = time_to_frame_span(ali.start_s, ali.end_s, stride_s, window_s, n_frames)
        except (IntervalError, ParameterError) as exc:
            raise type(exc)(
                f"utterance {utterance.id!r}, word {ali.word!r}: {exc}"
            ) from exc
        for layer in layers:
            vector = pool_word(tensor[layer, span.first : span.last])
            records.append(
                AweRecord(
                    word=ali.word.lower(),
                    utterance_id=utterance.id,
                    layer=layer,
                    vector=vector,
                    n_frames_pooled=len(span),
                    token_index=ali.token_index,
                )
            )
    return records


def build_corpus_awes(
    manifest: Manifest, root: str | Path, layers: Iterable[int]
) -> dict[int, list[AweRecord]]:
    """Pool every utterance of a corpus; records grouped per layer.

    Output is deterministic: utterances in manifest order, words by
    token_index within each utterance.
    """
    layers = sorted(set(int(l) for l in layers))
    per_layer: dict[int, list[AweRecord]] = {layer: [] for layer in layers}
    for utt in manifest.utterances:
        tensor = read_tensor(resolve_path(root, utt.audio_tensor_path))
        alignments = load_alignments(resolve_path(root, utt.alignment_path))
        utterance = LayeredUtterance(
            id=utt.id, tensor=tensor, label=utt.label, transcript=utt.transcript
        )
        for rec in build_awes(
            utterance,
            alignments,
            layers,
            stride_s=manifest.frame_stride_s,
            window_s=manifest.frame_window_s,
        ):
            per_layer[rec.layer].append(rec)
    return per_layer


# ---------------------------------------------------------------------------
# On-disk AWE store: one 2-D tensor per layer plus a row index shared by all
# layers (row -> utterance id, word, token index).
# ---------------------------------------------------------------------------

_LAYER_FILE = re.compile(r"layer_(\d+)\.awet$")


def save_awe_store(per_layer: Mapping[int, list[AweRecord]], out_dir: str | Path) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    layers = sorted(per_layer)
    if not layers:
        raise ParameterError("no layers to save")

    reference = [
        (r.utterance_id, r.word, r.token_index, r.n_frames_pooled)
        for r in per_layer[layers[0]]
    ]
    for layer in layers:
        rows = [
            (r.utterance_id, r.word, r.token_index, r.n_frames_pooled)
            for r in per_layer[layer]
        ]
        if rows != reference:
            raise ShapeError(
                f"layer {layer} rows disagree with layer {layers[0]}; "
                "all layers must index the same word occurrences"
            )

    if not reference:
        raise ParameterError("no word occurrences to save")

    with open(out / "index.jsonl", "w", encoding="utf-8") as fh:
        for row, (utt_id, word, token_index, n_pooled) in enumerate(reference):
            fh.write(
                json.dumps(
                    {
                        "row": row,
                        "utterance_id": utt_id,
                        "word": word,
                        "token_index": token_index,
                        "n_frames_pooled": n_pooled,
                    },
                    sort_keys=True,
                )
                + "\n"
            )

    for layer in layers:
        matrix = np.stack([r.vector for r in per_layer[layer]]).astype("<f4")
        write_tensor(matrix.shape, matrix, out / f"layer_{layer:02d}.awet")


def store_layers(store_dir: str | Path) -> list[int]:
    layers = []
    for p in Path(store_dir).iterdir():
        m = _LAYER_FILE.search(p.name)
        if m:
            layers.append(int(m.group(1)))
    return sorted(layers)


def _load_index(store_dir: str | Path) -> list[dict]:
    index_path = Path(store_dir) / "index.jsonl"
    if not index_path.exists():
        raise FormatError(f"{store_dir}: missing index.jsonl")
    rows = []
    for lineno, line in enumerate(index_path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            rows.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise FormatError(f"{index_path}:{lineno}: not valid JSON") from exc
    return rows


def load_awe_store_layer(store_dir: str | Path, layer: int) -> list[AweRecord]:
    path = Path(store_dir) / f"layer_{layer:02d}.awet"
    if not path.exists():
        raise LayerError(f"{store_dir}: no stored layer {layer}")
    matrix = read_tensor(path)
    index = _load_index(store_dir)
    if matrix.ndim != 2 or matrix.shape[0] != len(index):
        raise FormatError(
            f"{path}: {matrix.shape[0]} rows but index has {len(index)} entries"
        )
    records = []
    for entry, vector in zip(index, matrix):
        records.append(
            AweRecord(
                word=entry["word"],
                utterance_id=entry["utterance_id"],
                layer=layer,
                vector=np.asarray(vector, dtype=np.float64),
                n_frames_pooled=int(entry.get("n_frames_pooled", 1)),
                token_index=entry["token_index"],
            )
        )
    return records
