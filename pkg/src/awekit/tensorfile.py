"""Flat binary container for embedding tensors.

On-disk layout, all multi-byte fields little-endian:

    bytes 0-3    magic ``b"AWET"``
    bytes 4-7    format version, u32 (currently 1)
    bytes 8-11   number of dimensions, u32 (2 or 3)
    next         ndims x u64 dimension sizes
    rest         float32 payload, row-major

The payload must be exactly ``product(dims) * 4`` bytes; readers reject
anything shorter or longer. A file written on any platform reads
identically on any other.
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import FormatError, ShapeError

MAGIC = b"AWET"
VERSION = 1

_FIXED_HEADER = struct.Struct("<4sII")


def _check_dims(dims: Sequence[int]) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if len(dims) not in (2, 3):
        raise ShapeError(f"tensor rank must be 2 or 3, got {len(dims)}")
    if any(d < 1 for d in dims):
        raise ShapeError(f"all dimensions must be >= 1, got {dims}")
    return dims


def write_tensor(dims: Sequence[int], data, path: str | Path) -> None:
    """Write ``data`` as a tensor of shape ``dims`` to ``path``.

    ``data`` is any array-like; it is cast to float32 and must contain
    exactly ``product(dims)`` values.
    """
    dims = _check_dims(dims)
    payload = np.ascontiguousarray(np.asarray(data, dtype="<f4")).reshape(-1)
    expected = int(np.prod(dims))
    if payload.size != expected:
        raise ShapeError(
            f"payload has {payload.size} values, shape {dims} needs {expected}"
        )
    header = _FIXED_HEADER.pack(MAGIC, VERSION, len(dims))
    dim_block = struct.pack(f"<{len(dims)}Q", *dims)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(dim_block)
        fh.write(payload.tobytes())


def read_tensor(path: str | Path) -> np.ndarray:
    """Read a tensor written by :func:`write_tensor`.

    Returns a float32 array shaped exactly as written. Raises
    :class:`FormatError` on bad magic, bad version, bad rank, or a payload
    whose length disagrees with the header.
    """
    raw = Path(path).read_bytes()
    if len(raw) < _FIXED_HEADER.size:
        raise FormatError(f"{path}: file too short for a tensor header")
    magic, version, ndims = _FIXED_HEADER.unpack_from(raw, 0)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic bytes {magic!r}")
    if version != VERSION:
        raise FormatError(f"{path}: unsupported format version {version}")
    if ndims not in (2, 3):
        raise FormatError(f"{path}: tensor rank must be 2 or 3, got {ndims}")
    dim_end = _FIXED_HEADER.size + 8 * ndims
    if len(raw) < dim_end:
        raise FormatError(f"{path}: file too short for {ndims} dimension sizes")
    dims = struct.unpack_from(f"<{ndims}Q", raw, _FIXED_HEADER.size)
    if any(d < 1 for d in dims):
        raise FormatError(f"{path}: non-positive dimension in {dims}")
    expected_bytes = int(np.prod(dims)) * 4
    payload = raw[dim_end:]
    if len(payload) != expected_bytes:
        raise FormatError(
            f"{path}: payload is {len(payload)} bytes, header {dims} "
            f"requires {expected_bytes}"
        )
    arr = np.frombuffer(payload, dtype="<f4").reshape(dims)
    return arr.copy()
