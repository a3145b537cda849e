"""Binary checkpoint format: named float32 arrays, bit-exact round trip.

Layout: magic, version, record count, then per parameter the name length,
UTF-8 name, rank, dims, and little-endian float32 values.
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import Mapping

import numpy as np

MAGIC = b"G2TCKPT\x00"
VERSION = 1


class CheckpointError(ValueError):
    pass


def save_checkpoint(path: str | Path, arrays: Mapping[str, np.ndarray]) -> None:
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", VERSION, len(arrays)))
        for name, arr in arrays.items():
            data = np.ascontiguousarray(arr, dtype="<f4")
            encoded = name.encode("utf-8")
            fh.write(struct.pack("<I", len(encoded)))
            fh.write(encoded)
            fh.write(struct.pack("<I", data.ndim))
            fh.write(struct.pack(f"<{data.ndim}I", *data.shape))
            fh.write(data.tobytes())


def load_checkpoint(path: str | Path) -> dict[str, np.ndarray]:
    blob = Path(path).read_bytes()
    if not blob.startswith(MAGIC):
        raise CheckpointError(f"{path}: not a checkpoint file")
    off = len(MAGIC)

    def unpack(fmt: str):
        nonlocal off
        size = struct.calcsize(fmt)
        if off + size > len(blob):
            raise CheckpointError(f"{path}: truncated checkpoint")
        values = struct.unpack_from(fmt, blob, off)
        off += size
        return values

    version, count = unpack("<II")
    if version != VERSION:
        raise CheckpointError(f"{path}: unsupported checkpoint version {version}")
    out: dict[str, np.ndarray] = {}
    for _ in range(count):
        (name_len,) = unpack("<I")
        name = blob[off : off + name_len].decode("utf-8")
        off += name_len
        (rank,) = unpack("<I")
        dims = unpack(f"<{rank}I") if rank else ()
        n_values = int(np.prod(dims)) if dims else 1
        if off + n_values * 4 > len(blob):
            raise CheckpointError(f"{path}: truncated checkpoint")
        arr = np.frombuffer(blob, dtype="<f4", count=n_values, offset=off).reshape(dims)
        off += n_values * 4
        out[name] = arr.copy()
    if off != len(blob):
        raise CheckpointError(f"{path}: trailing bytes after last record")
    return out
