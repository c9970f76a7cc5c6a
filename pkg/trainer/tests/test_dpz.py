import numpy as np
import pytest

from depthtrainer import dpz


def test_roundtrip_bit_identical():
    rng = np.random.default_rng(0)
    arr = rng.random((64, 64)).astype(np.float32)
    np.testing.assert_array_equal(dpz.read_bytes(dpz.write_bytes(arr)), arr)


def test_multichannel():
    arr = np.random.default_rng(1).random((4, 6, 3)).astype(np.float32)
    np.testing.assert_array_equal(dpz.read_bytes(dpz.write_bytes(arr)), arr)


def test_file_roundtrip(tmp_path):
    arr = np.random.default_rng(2).random((16, 16)).astype(np.float32)
    dpz.write_file(tmp_path / "x.dpz", arr)
    np.testing.assert_array_equal(dpz.read_file(tmp_path / "x.dpz"), arr)


def test_rejects_bad_magic():
    with pytest.raises(ValueError, match="DPZ1"):
        dpz.read_bytes(b"NOPE" + b"\0" * 28)


def test_rejects_truncation():
    data = dpz.write_bytes(np.zeros((4, 4), np.float32))
    with pytest.raises(ValueError, match="truncated"):
        dpz.read_bytes(data[:-4])


def test_compatible_with_engine_format():
    # engine layout: magic, H, W, C as little-endian uint32, then <f4 payload
    import struct

    arr = np.arange(6, dtype=np.float32).reshape(2, 3)
    raw = b"DPZ1" + struct.pack("<III", 2, 3, 1) + arr.astype("<f4").tobytes()
    np.testing.assert_array_equal(dpz.read_bytes(raw), arr)
    assert dpz.write_bytes(arr) == raw
