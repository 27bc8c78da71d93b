"""Signal files (CSV and SSIG1 binary) and two-column text tables.

SSIG1 layout: the 5 ASCII bytes ``SSIG1``, the sample count as an unsigned
64-bit little-endian integer, then that many little-endian IEEE-754 doubles.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .sigcore import InvalidArgumentError

__all__ = [
    "SSIG_MAGIC",
    "write_ssig",
    "read_ssig",
    "write_signal_csv",
    "read_signal_csv",
    "read_two_column",
    "write_two_column",
]

SSIG_MAGIC = b"SSIG1"


def write_ssig(x, path) -> Path:
    path = Path(path)
    x = np.ascontiguousarray(x, dtype="<f8")
    with path.open("wb") as fh:
        fh.write(SSIG_MAGIC)
        fh.write(struct.pack("<Q", x.size))
        fh.write(x.tobytes())
    return path


def read_ssig(path) -> np.ndarray:
    data = Path(path).read_bytes()
    head = len(SSIG_MAGIC) + 8
    if len(data) < head or data[: len(SSIG_MAGIC)] != SSIG_MAGIC:
        raise InvalidArgumentError(f"{path}: not an SSIG1 file")
    (n,) = struct.unpack("<Q", data[len(SSIG_MAGIC):head])
    if len(data) != head + 8 * n:
        raise InvalidArgumentError(f"{path}: header says {n} samples, file size disagrees")
    return np.frombuffer(data, dtype="<f8", offset=head).astype(np.float64)


def write_signal_csv(x, path) -> Path:
    """One value per line, shortest repr that round-trips exactly."""
    path = Path(path)
    with path.open("w") as fh:
        fh.writelines(f"{v!r}\n" for v in np.asarray(x, dtype=np.float64).tolist())
    return path


def read_signal_csv(path) -> np.ndarray:
    return np.array([float(line) for line in Path(path).read_text().split()])


def read_two_column(path) -> tuple[np.ndarray, np.ndarray]:
    """Parse ``a,b`` or whitespace-separated rows; '#' starts a comment.

    A first row that does not parse as numbers is treated as a header.
    Errors carry ``path:line``.
    """
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise InvalidArgumentError(f"cannot read {path}: {exc.strerror or exc}") from exc
    col_a, col_b = [], []
    seen_data = False
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.replace(",", " ").split()
        try:
            if len(parts) != 2:
                raise ValueError
            a, b = float(parts[0]), float(parts[1])
        except ValueError:
            if not seen_data and not col_a:
                seen_data = True
                continue  # header row
            raise InvalidArgumentError(f"{path}:{lineno}: expected two numbers, got {raw!r}")
        seen_data = True
        col_a.append(a)
        col_b.append(b)
    if not col_a:
        raise InvalidArgumentError(f"{path}: no data rows")
    return np.array(col_a), np.array(col_b)


def write_two_column(path, a, b, header: tuple[str, str] | None = None) -> Path:
    path = Path(path)
    with path.open("w") as fh:
        if header:
            fh.write(f"{header[0]},{header[1]}\n")
        for u, v in zip(np.asarray(a).tolist(), np.asarray(b).tolist()):
            fh.write(f"{u!r},{v!r}\n")
    return path
