"""Reader/writer for the engine's DPZ1 tensor files.

Layout: 4-byte magic "DPZ1", three little-endian uint32 (height, width,
channels), then row-major channel-last float32 payload.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"DPZ1"


def read_bytes(data: bytes) -> np.ndarray:
    if len(data) < 16 or data[:4] != MAGIC:
        raise ValueError("not a DPZ1 tensor")
    h, w, c = struct.unpack("<III", data[4:16])
    if len(data) != 16 + h * w * c * 4:
        raise ValueError("truncated DPZ1 payload")
    # copy so downstream torch.from_numpy gets writable memory
    arr = np.frombuffer(data[16:], dtype="<f4").reshape(h, w, c).copy()
    return arr[:, :, 0] if c == 1 else arr


def write_bytes(arr: np.ndarray) -> bytes:
    a = np.asarray(arr, dtype=np.float32)
    if a.ndim == 2:
        a = a[:, :, None]
    h, w, c = a.shape
    return MAGIC + struct.pack("<III", h, w, c) + np.ascontiguousarray(a).astype("<f4").tobytes()


def read_file(path: str | Path) -> np.ndarray:
    return read_bytes(Path(path).read_bytes())


def write_file(path: str | Path, arr: np.ndarray) -> None:
    Path(path).write_bytes(write_bytes(arr))
