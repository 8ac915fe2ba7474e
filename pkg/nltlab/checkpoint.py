"""
Binary checkpoints of a field.

Layout, all little-endian:

| bytes      | content                          |
|------------|----------------------------------|
| 4          | magic `NLT1`                     |
| 2 (u16)    | format version                   |
| 4 (u32)    | n                                |
| 8 (f64)    | period L                         |
| 8 (f64)    | time t                           |
| 8 n (f64)  | physical values                  |
| 8 (u64)    | BLAKE2b-64 of all preceding bytes|
"""

from __future__ import annotations
from dataclasses import dataclass
import hashlib
import os
import struct
from typing import Any, Dict

import numpy as np

from .errors import NltCheckpointError
from .spectral import Grid, SpectralField

MAGIC = b"NLT1"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sHIdd")
_CHECKSUM = struct.Struct("<Q")


def _checksum(payload: bytes) -> int:
    digest = hashlib.blake2b(payload, digest_size=8).digest()
    return int.from_bytes(digest, "little")


@dataclass
class Checkpoint:
    n: int
    period: float
    t: float
    values: np.ndarray
    version: int = FORMAT_VERSION

    @classmethod
    def from_field(cls, theta: SpectralField, t: float) -> Checkpoint:
        return cls(theta.grid.n, theta.grid.period, float(t), theta.physical.copy())

    def to_field(self) -> SpectralField:
        return SpectralField.from_physical(Grid(self.n, self.period), self.values)

    def to_bytes(self) -> bytes:
        payload = _HEADER.pack(MAGIC, self.version, self.n, self.period, self.t)
        payload += np.asarray(self.values, dtype="<f8").tobytes()
        return payload + _CHECKSUM.pack(_checksum(payload))

    @classmethod
    def from_bytes(cls, data: bytes, path: str = "<bytes>") -> Checkpoint:
        """
        Raises:
            NltCheckpointError: On magic, version, length or checksum mismatch.
        """
        if len(data) < _HEADER.size + _CHECKSUM.size:
            raise NltCheckpointError(path, "file is truncated")
        magic, version, n, period, t = _HEADER.unpack_from(data, 0)
        if magic != MAGIC:
            raise NltCheckpointError(path, f"bad magic {magic!r}")
        if version != FORMAT_VERSION:
            raise NltCheckpointError(path, f"unsupported version {version}")
        expected = _HEADER.size + 8 * n + _CHECKSUM.size
        if len(data) != expected:
            raise NltCheckpointError(
                path, f"expected {expected} bytes for n={n}, found {len(data)}"
            )
        payload = data[: -_CHECKSUM.size]
        (stored,) = _CHECKSUM.unpack_from(data, len(payload))
        if stored != _checksum(payload):
            raise NltCheckpointError(path, "checksum mismatch")
        values = np.frombuffer(payload, dtype="<f8", count=n, offset=_HEADER.size)
        return cls(n=n, period=period, t=t, values=values.astype(float), version=version)


def write_checkpoint(path: str, theta: SpectralField, t: float) -> str:
    data = Checkpoint.from_field(theta, t).to_bytes()
    tmp_path = f"{path}.tmp"
    with open(tmp_path, "wb") as handle:
        handle.write(data)
    os.replace(tmp_path, path)
    return path


def read_checkpoint(path: str) -> Checkpoint:
    """
    Raises:
        NltCheckpointError: If the file is missing or corrupt.
    """
    try:
        with open(path, "rb") as handle:
            data = handle.read()
    except OSError as err:
        raise NltCheckpointError(path, str(err))
    return Checkpoint.from_bytes(data, path)


def inspect_checkpoint(path: str) -> Dict[str, Any]:
    chk = read_checkpoint(path)
    return {
        "path": str(path),
        "version": chk.version,
        "n": chk.n,
        "period": chk.period,
        "t": chk.t,
        "min": float(np.min(chk.values)),
        "max": float(np.max(chk.values)),
        "checksum": "ok",
    }
