"""Writers for the container formats the analysis toolkit consumes.

These implement the published on-disk interfaces directly (the binary
tensor layout, the JSON manifest, and the JSON-lines alignment format)
so the extractor stays decoupled from the analysis package: the only
contract between them is the bytes.

Tensor layout, all integers little-endian:
    bytes 0-3   magic b"AWET"
    bytes 4-7   version u32 (1)
    bytes 8-11  rank u32 (2 or 3)
    next        rank x u64 dims
    rest        float32 payload, row-major
"""

from __future__ import annotations

import json
import struct
from pathlib import Path
from typing import Sequence

import numpy as np

MAGIC = b"AWET"
VERSION = 1
SCHEMA_VERSION = 1

FRAME_STRIDE_S = 0.020
FRAME_WINDOW_S = 0.025


def write_tensor(data: np.ndarray, path: str | Path) -> None:
    arr = np.ascontiguousarray(np.asarray(data, dtype="<f4"))
    if arr.ndim not in (2, 3):
        raise ValueError(f"tensor rank must be 2 or 3, got {arr.ndim}")
    if any(d < 1 for d in arr.shape):
        raise ValueError(f"all dimensions must be >= 1, got {arr.shape}")
    with open(path, "wb") as fh:
        fh.write(struct.pack("<4sII", MAGIC, VERSION, arr.ndim))
        fh.write(struct.pack(f"<{arr.ndim}Q", *arr.shape))
        fh.write(arr.tobytes())


def read_tensor(path: str | Path) -> np.ndarray:
    raw = Path(path).read_bytes()
    magic, version, ndims = struct.unpack_from("<4sII", raw, 0)
    if magic != MAGIC or version != VERSION:
        raise ValueError(f"{path}: not a supported tensor file")
    dims = struct.unpack_from(f"<{ndims}Q", raw, 12)
    payload = raw[12 + 8 * ndims :]
    if len(payload) != int(np.prod(dims)) * 4:
        raise ValueError(f"{path}: payload length disagrees with header {dims}")
    return np.frombuffer(payload, dtype="<f4").reshape(dims).copy()


def write_alignments(records: Sequence[dict], path: str | Path) -> None:
    """Records need keys word, start_s, end_s, token_index."""
    lines = [
        json.dumps(
            {
                "word": r["word"],
                "start_s": r["start_s"],
                "end_s": r["end_s"],
                "token_index": r["token_index"],
            },
            sort_keys=True,
        )
        for r in records
    ]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def write_manifest(
    path: str | Path,
    corpus_name: str,
    label_set: list[str],
    utterances: list[dict],
    n_layers: int,
    metadata: dict | None = None,
) -> None:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "corpus_name": corpus_name,
        "label_set": label_set,
        "utterances": utterances,
        "n_layers": n_layers,
        "frame_stride_s": FRAME_STRIDE_S,
        "frame_window_s": FRAME_WINDOW_S,
        "metadata": metadata or {},
    }
    Path(path).write_text(
        json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
