"""Bit-exact CSV serialization for real matrices.

Format: one row per channel, cells separated by commas, ``.`` as the
decimal point, no header, LF line endings.  Values are written with 17
significant digits, which is enough for every IEEE-754 double to survive a
write/read round trip unchanged.
"""

from __future__ import annotations

import os

import numpy as np

from .exceptions import MatrixParseError


def format_matrix(values) -> str:
    """Render a 2-D array in the CSV matrix format (trailing newline)."""
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D array, got ndim={arr.ndim}")
    lines = []
    for row in arr:
        lines.append(",".join(format(v, ".17g") for v in row))
    return "\n".join(lines) + "\n"


def write_matrix(path: str | os.PathLike, values) -> None:
    """Write a matrix to ``path`` in the CSV matrix format."""
    text = format_matrix(values)
    with open(path, "w", encoding="ascii", newline="") as fh:
        fh.write(text)


def read_matrix(path: str | os.PathLike) -> np.ndarray:
    """Read a CSV matrix written by :func:`write_matrix`.

    Raises :class:`MatrixParseError` naming the 1-based row (and column
    where applicable) on ragged rows, non-numeric cells, or an empty file.
    """
    rows: list[list[float]] = []
    width = None
    with open(path, "r", encoding="ascii", newline="") as fh:
        for lineno, line in enumerate(fh, start=1):
            cells = line.rstrip("\r\n").split(",")
            if width is None:
                width = len(cells)
            elif len(cells) != width:
                raise MatrixParseError(
                    f"row {lineno} has {len(cells)} cells, expected {width}",
                    row=lineno)
            parsed = []
            for colno, cell in enumerate(cells, start=1):
                try:
                    parsed.append(float(cell))
                except ValueError:
                    raise MatrixParseError(
                        f"row {lineno}, column {colno}: "
                        f"not a number: {cell!r}",
                        row=lineno, column=colno) from None
            rows.append(parsed)
    if not rows:
        raise MatrixParseError("empty matrix file", row=1)
    return np.array(rows, dtype=float)
