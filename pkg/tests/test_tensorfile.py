"""Binary tensor container: roundtrips, format rejection, endianness."""

from __future__ import annotations

import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from awekit.errors import FormatError, ShapeError
from awekit.tensorfile import MAGIC, VERSION, read_tensor, write_tensor


def test_roundtrip_2x3(tmp_path):
    data = [1.0, 2.5, -3.0, 0.0, 7.25, -0.125]
    path = tmp_path / "t.awet"
    write_tensor([2, 3], data, path)
    arr = read_tensor(path)
    assert arr.shape == (2, 3)
    assert arr.dtype == np.float32
    np.testing.assert_array_equal(arr.reshape(-1), np.asarray(data, dtype=np.float32))


def test_length_mismatch_is_shape_error(tmp_path):
    with pytest.raises(ShapeError):
        write_tensor([2, 3], [1.0] * 5, tmp_path / "t.awet")


def test_roundtrip_at_thirteen_layer_shape(tmp_path):
    rng = np.random.default_rng(0)
    data = rng.normal(size=(13, 50, 768)).astype(np.float32)
    path = tmp_path / "big.awet"
    write_tensor(data.shape, data, path)
    arr = read_tensor(path)
    assert arr.shape == (13, 50, 768)
    assert arr.tobytes() == data.tobytes()


def test_bad_rank_rejected_on_write(tmp_path):
    with pytest.raises(ShapeError):
        write_tensor([6], [0.0] * 6, tmp_path / "t.awet")
    with pytest.raises(ShapeError):
        write_tensor([1, 2, 3, 1], [0.0] * 6, tmp_path / "t.awet")
    with pytest.raises(ShapeError):
        write_tensor([0, 3], [], tmp_path / "t.awet")


def test_corrupted_magic_is_format_error(tmp_path):
    path = tmp_path / "t.awet"
    write_tensor([2, 2], [1.0, 2.0, 3.0, 4.0], path)
    raw = bytearray(path.read_bytes())
    raw[0:4] = b"NOPE"
    path.write_bytes(bytes(raw))
    with pytest.raises(FormatError):
        read_tensor(path)


def test_truncated_payload_is_format_error(tmp_path):
    path = tmp_path / "t.awet"
    write_tensor([2, 2], [1.0, 2.0, 3.0, 4.0], path)
    raw = path.read_bytes()
    path.write_bytes(raw[:-4])
    with pytest.raises(FormatError):
        read_tensor(path)


def test_header_payload_disagreement_is_format_error(tmp_path):
    # header claims [2, 2] but only three floats follow
    path = tmp_path / "t.awet"
    header = struct.pack("<4sII", MAGIC, VERSION, 2) + struct.pack("<2Q", 2, 2)
    path.write_bytes(header + np.asarray([1, 2, 3], dtype="<f4").tobytes())
    with pytest.raises(FormatError):
        read_tensor(path)


def test_trailing_garbage_is_format_error(tmp_path):
    path = tmp_path / "t.awet"
    write_tensor([2, 2], [1.0, 2.0, 3.0, 4.0], path)
    path.write_bytes(path.read_bytes() + b"\x00\x00\x00\x00")
    with pytest.raises(FormatError):
        read_tensor(path)


def test_unknown_version_is_format_error(tmp_path):
    path = tmp_path / "t.awet"
    write_tensor([2, 2], [1.0, 2.0, 3.0, 4.0], path)
    raw = bytearray(path.read_bytes())
    raw[4:8] = struct.pack("<I", 99)
    path.write_bytes(bytes(raw))
    with pytest.raises(FormatError):
        read_tensor(path)


def test_bad_rank_in_header_is_format_error(tmp_path):
    path = tmp_path / "t.awet"
    header = struct.pack("<4sII", MAGIC, VERSION, 4)
    path.write_bytes(header + struct.pack("<4Q", 1, 1, 1, 1) + b"\x00" * 4)
    with pytest.raises(FormatError):
        read_tensor(path)


def test_on_disk_layout_is_little_endian(tmp_path):
    path = tmp_path / "t.awet"
    write_tensor([2, 2], [1.0, 2.0, 3.0, 4.0], path)
    raw = path.read_bytes()
    assert raw[:4] == b"AWET"
    assert raw[4:8] == b"\x01\x00\x00\x00"
    assert raw[8:12] == b"\x02\x00\x00\x00"
    assert raw[12:20] == b"\x02" + b"\x00" * 7
    assert raw[20:28] == b"\x02" + b"\x00" * 7
    # 1.0f little-endian
    assert raw[28:32] == b"\x00\x00\x80\x3f"


@settings(max_examples=60, deadline=None)
@given(
    dims=st.lists(st.integers(min_value=1, max_value=6), min_size=2, max_size=3),
    seed=st.integers(min_value=0, max_value=2**31),
)
def test_roundtrip_identity_property(tmp_path_factory, dims, seed):
    rng = np.random.default_rng(seed)
    data = rng.normal(scale=1e3, size=int(np.prod(dims)))
    path = tmp_path_factory.mktemp("tf") / "t.awet"
    write_tensor(dims, data, path)
    arr = read_tensor(path)
    assert arr.shape == tuple(dims)
    # bit-identical to the float32 cast of the payload
    assert arr.tobytes() == np.asarray(data, dtype="<f4").tobytes()
