"""Utility functions for smaglab."""

import os
import tempfile
from typing import Any

StrPath = str | os.PathLike[str]


def _format_float(x: float) -> str:
    """Format a float as the shortest decimal that parses back bit-exactly."""
    return repr(float(x))


def _jsonable(value: Any) -> Any:
    """Convert numpy scalars/arrays and tuples into JSON-friendly values."""
    if hasattr(value, "tolist"):
        return value.tolist()
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def atomic_write(path: StrPath, data: str | bytes) -> None:
    """Write a file atomically.

    The data goes to a temporary file in the target directory which is then
    renamed over `path`, so readers never observe a partially written file.

    Args:
        path (StrPath): Destination path.
        data (str | bytes): File content. Text is written as UTF-8.

    Returns:
        None

    """
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)

    payload = data.encode("utf-8") if isinstance(data, str) else data
    fd, tmp = tempfile.mkstemp(
        dir=directory, prefix=f".{os.path.basename(path)}.", suffix=".tmp"
    )
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(payload)
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
