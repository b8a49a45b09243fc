# =============================================================================
# CHECKPOINT - Binary persistence of spectral fields
# =============================================================================
"""
Binary checkpoint persistence for velocity fields.

File layout (little-endian throughout):

    header   magic "NLES" | version u32 | dim u32 | n u32 | time f64 | field count u32
    blocks   per field, per component: raw coefficient block in rfft layout (C order)

Version 1 stores complex64 coefficients. Version 2 stores complex128 and is
what resumable runs use, since it reproduces the state bit for bit.
"""

import os
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from nles import logger
from nles.paths import ensure_dir
from nles.spectral import Grid, VectorField, is_solenoidal


# =============================================================================
# FORMAT
# =============================================================================

MAGIC = b"NLES"

HEADER_DTYPE = np.dtype(
    [
        ("magic", "S4"),
        ("version", "<u4"),
        ("dim", "<u4"),
        ("n", "<u4"),
        ("time", "<f8"),
        ("field_count", "<u4"),
    ]
)

COEFF_DTYPES = {1: np.dtype("<c8"), 2: np.dtype("<c16")}

# Divergence tolerance when re-flagging fields read back at each precision
_SOLENOIDAL_TOL = {1: 1e-6, 2: 1e-12}


class CheckpointFormatError(ValueError):
    """Raised when a checkpoint file is malformed or of an unknown version."""


@dataclass(frozen=True, eq=False)
class Checkpoint:
    grid: Grid
    time: float
    fields: Tuple[VectorField, ...]
    version: int


# =============================================================================
# READ / WRITE
# =============================================================================


def encode_checkpoint(fields: Sequence[VectorField], time: float, version: int = 1) -> bytes:
    """Serialise ``fields`` (all on one grid) into checkpoint bytes."""
    if version not in COEFF_DTYPES:
        raise CheckpointFormatError(f"unknown checkpoint version {version}")
    if not fields:
        raise ValueError("a checkpoint needs at least one field")
    grid = fields[0].grid
    header = np.zeros(1, dtype=HEADER_DTYPE)
    header["magic"] = MAGIC
    header["version"] = version
    header["dim"] = grid.dim
    header["n"] = grid.n
    header["time"] = float(time)
    header["field_count"] = len(fields)

    chunks = [header.tobytes()]
    for v in fields:
        if v.grid != grid:
            raise ValueError("all checkpoint fields must share one grid")
        chunks.append(np.ascontiguousarray(v.coeffs).astype(COEFF_DTYPES[version]).tobytes())
    return b"".join(chunks)


def decode_checkpoint(data: bytes) -> Checkpoint:
    if len(data) < HEADER_DTYPE.itemsize:
        raise CheckpointFormatError("file shorter than the checkpoint header")
    header = np.frombuffer(data, dtype=HEADER_DTYPE, count=1)[0]
    if bytes(header["magic"]) != MAGIC:
        raise CheckpointFormatError(f"bad magic {bytes(header['magic'])!r}")
    version = int(header["version"])
    if version not in COEFF_DTYPES:
        raise CheckpointFormatError(f"unknown checkpoint version {version}")

    grid = Grid(int(header["dim"]), int(header["n"]))
    count = int(header["field_count"])
    dtype = COEFF_DTYPES[version]
    shape = (grid.dim,) + grid.spectral_shape
    block = int(np.prod(shape)) * dtype.itemsize
    expected = HEADER_DTYPE.itemsize + count * block
    if len(data) != expected:
        raise CheckpointFormatError(f"expected {expected} bytes, found {len(data)}")

    fields: List[VectorField] = []
    offset = HEADER_DTYPE.itemsize
    for _ in range(count):
        raw = np.frombuffer(data, dtype=dtype, count=int(np.prod(shape)), offset=offset)
        v = VectorField(grid, raw.reshape(shape).astype(np.complex128))
        fields.append(v.with_coeffs(v.coeffs, solenoidal=is_solenoidal(v, _SOLENOIDAL_TOL[version])))
        offset += block
    return Checkpoint(grid, float(header["time"]), tuple(fields), version)


def write_checkpoint(path: str, fields: Sequence[VectorField], time: float, version: int = 1) -> str:
    payload = encode_checkpoint(fields, time, version)
    try:
        parent = os.path.dirname(os.path.abspath(path))
        ensure_dir(parent)
        with open(path, "wb") as f:
            f.write(payload)
    except OSError as exc:
        raise OSError(f"failed to write checkpoint {path}: {exc}") from exc
    return path


def read_checkpoint(path: str) -> Checkpoint:
    if not os.path.exists(path):
        raise FileNotFoundError(f"No checkpoint at {path}")
    with open(path, "rb") as f:
        return decode_checkpoint(f.read())


# =============================================================================
# CHECKPOINT MANAGER
# =============================================================================


class CheckpointManager:
    """Writes checkpoints into a directory at a fixed simulated-time interval.

    - ``interval <= 0`` disables periodic writes (``save`` still works).
    - Files are named ``checkpoint_<index>.nles``; ``latest`` finds the newest.
    """

    def __init__(self, directory: str, interval: float, version: int = 2) -> None:
        self.directory = directory
        self.interval = float(interval)
        self.version = version
        self._next_time: Optional[float] = None
        # Resumed runs keep numbering after the files already present
        self._index = len(self._existing(directory))

    def due(self, time: float) -> bool:
        if self.interval <= 0:
            return False
        if self._next_time is None:
            self._next_time = time
        return time >= self._next_time - 1e-12

    def resume(self, time: float) -> None:
        """Continue the periodic schedule after a checkpoint written at ``time``."""
        if self.interval > 0:
            self._next_time = time + self.interval

    def save(self, fields: Sequence[VectorField], time: float) -> str:
        path = os.path.join(self.directory, f"checkpoint_{self._index:05d}.nles")
        write_checkpoint(path, fields, time, self.version)
        self._index += 1
        if self.interval > 0:
            self._next_time = (self._next_time if self._next_time is not None else time) + self.interval
        logger.debug("checkpoint", f"Wrote {path} at t={time:.6g}")
        return path

    def maybe_save(self, fields: Sequence[VectorField], time: float) -> Optional[str]:
        if self.due(time):
            return self.save(fields, time)
        return None

    @staticmethod
    def _existing(directory: str) -> List[str]:
        if not os.path.isdir(directory):
            return []
        return sorted(n for n in os.listdir(directory) if n.startswith("checkpoint_") and n.endswith(".nles"))

    @staticmethod
    def latest(directory: str) -> Optional[str]:
        names = CheckpointManager._existing(directory)
        if not names:
            return None
        return os.path.join(directory, names[-1])
