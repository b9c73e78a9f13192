"""Binary checkpoints of the Galerkin state.

Layout (little-endian):

    header   magic b"SMAGCKPT", format version (u16), N (u32), L (f64),
             t (f64), step_index (i64), payload length in bytes (u64)
    payload  complex coefficients as pairs of f64, component-major, then
             row-major over the wavenumber lattice in `numpy.fft` order
    trailer  64-bit BLAKE2b digest of header and payload
"""

import hashlib
import logging
import os
import struct

import numpy as np

from .error import (
    CheckpointError,
    CheckpointVersionError,
    ChecksumError,
    ConfigError,
    TruncatedCheckpointError,
)
from .integrator import SimState
from .ledger import EnergyRecord
from .spectral import Grid, SpectralVelocity
from .utils import StrPath, atomic_write

logger = logging.getLogger("smaglab")

MAGIC = b"SMAGCKPT"
FORMAT_VERSION = 1
HEADER = struct.Struct("<8sHIddqQ")
DIGEST_SIZE = 8
DTYPE = np.dtype("<c16")


def _digest(data: bytes) -> bytes:
    return hashlib.blake2b(data, digest_size=DIGEST_SIZE).digest()


def save_checkpoint(state: SimState, path: StrPath) -> None:
    """Write `state` to `path` atomically.

    Args:
        state (SimState): state to save.
        path (StrPath): destination file.

    """
    grid = state.u.grid
    payload = np.ascontiguousarray(state.u.coeffs, dtype=DTYPE).tobytes()
    header = HEADER.pack(
        MAGIC, FORMAT_VERSION, grid.N, grid.L, state.t, state.step_index, len(payload)
    )
    atomic_write(path, header + payload + _digest(header + payload))
    logger.debug(f"Saved checkpoint at t={state.t} (step {state.step_index}) to {os.fspath(path)}")


def load_checkpoint(path: StrPath) -> SimState:
    """Read a state written by `save_checkpoint`.

    Args:
        path (StrPath): checkpoint file.

    Returns:
        SimState: the saved state, bit-identical.

    Raises:
        CheckpointVersionError: unknown magic or format version.
        TruncatedCheckpointError: the file ends early.
        ChecksumError: the digest does not match.

    """
    with open(path, "rb") as f:
        data = f.read()
    name = os.fspath(path)

    if len(data) < HEADER.size:
        raise TruncatedCheckpointError(f"{name}: file ends inside the header")
    magic, version, n, length, t, step_index, nbytes = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise CheckpointVersionError(f"{name}: not a smaglab checkpoint")
    if version != FORMAT_VERSION:
        raise CheckpointVersionError(
            f"{name}: format version {version}, expected {FORMAT_VERSION}"
        )
    end = HEADER.size + nbytes
    if len(data) < end + DIGEST_SIZE:
        raise TruncatedCheckpointError(f"{name}: file ends inside the payload")
    if len(data) > end + DIGEST_SIZE:
        raise CheckpointError(f"{name}: trailing bytes after the checksum")
    if _digest(data[:end]) != data[end:]:
        raise ChecksumError(f"{name}: checksum mismatch")

    try:
        grid = Grid(n, length)
    except ConfigError as exc:
        raise CheckpointError(f"{name}: invalid grid: {exc}") from exc
    if nbytes != grid.d * n * n * DTYPE.itemsize:
        raise CheckpointError(f"{name}: payload size does not match N={n}")
    coeffs = np.frombuffer(data, dtype=DTYPE, count=grid.d * n * n, offset=HEADER.size)
    u = SpectralVelocity(grid, coeffs.reshape(grid.d, n, n).astype(complex))
    return SimState(t, u, step_index)


class CheckpointObserver:
    """Integration observer that saves a checkpoint every `every` steps."""

    def __init__(self, path: StrPath, every: int):
        """Initialize the observer.

        Args:
            path (StrPath): checkpoint file, overwritten on every save.
            every (int): save cadence in steps, >= 1.

        """
        if every < 1:
            raise ConfigError("checkpoint cadence must be >= 1", key="outputs.checkpoint_every")
        self._path = path
        self._every = every
        self.saved = 0

    def __call__(self, state: SimState, rec: EnergyRecord | None) -> None:
        """Save `state` when its step index is a multiple of the cadence."""
        if state.step_index % self._every == 0:
            save_checkpoint(state, self._path)
            self.saved += 1
