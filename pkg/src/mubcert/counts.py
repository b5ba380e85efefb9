"""Detection-count tables and their CSV representation.

A counts table records, for each input setting ``(i, j, y)`` and detector
outcome, how many detections were registered.  The CSV format is
``i,j,y,outcome,count`` with 1-based indices, one row per cell, rows in
canonical sorted order; duplicate cells are rejected on read.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import CountsFormatError

CSV_HEADER = "i,j,y,outcome,count"


@dataclass(eq=False)
class CountsTable:
    """Detection counts indexed by (i, j, y, outcome), all 1-based outside.

    ``cells[i-1, j-1, y-1, b-1]`` holds the count for input dits ``(i, j)``,
    measurement choice ``y`` and outcome ``b``.  ``seed`` and ``config``
    carry provenance; they live in the run manifest, not in the CSV.
    """

    dim: int
    cells: np.ndarray  # shape (d, d, 2, d), nonnegative integers
    seed: int | None = None
    config: dict | None = field(default=None, repr=False)

    def __post_init__(self):
        self.cells = np.asarray(self.cells, dtype=np.int64)
        expected = (self.dim, self.dim, 2, self.dim)
        if self.cells.shape != expected:
            raise CountsFormatError(
                f"expected cells of shape {expected}, got {self.cells.shape}"
            )
        if (self.cells < 0).any():
            raise CountsFormatError("negative counts are not allowed")

    @classmethod
    def zeros(cls, dim: int, **kwargs) -> "CountsTable":
        return cls(dim=dim, cells=np.zeros((dim, dim, 2, dim), dtype=np.int64), **kwargs)

    def setting_totals(self) -> np.ndarray:
        """Total detections per (i, j, y) setting, shape (d, d, 2)."""
        return self.cells.sum(axis=3)

    def total(self) -> int:
        return int(self.cells.sum())


def write_counts_csv(table: CountsTable, path) -> None:
    """Write the table in canonical row order (sorted i, j, y, outcome)."""
    d = table.dim
    lines = [CSV_HEADER]
    for i in range(d):
        for j in range(d):
            for y in range(2):
                for b in range(d):
                    lines.append(
                        f"{i + 1},{j + 1},{y + 1},{b + 1},{int(table.cells[i, j, y, b])}"
                    )
    Path(path).write_text("\n".join(lines) + "\n")


def read_counts_csv(path) -> CountsTable:
    """Parse a counts CSV; rejects bad headers, indices, and duplicate cells."""
    text = Path(path).read_text()
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].strip() != CSV_HEADER:
        raise CountsFormatError(f"expected header {CSV_HEADER!r}")
    rows = []
    for ln_no, ln in enumerate(lines[1:], start=2):
        parts = ln.split(",")
        if len(parts) != 5:
            raise CountsFormatError(f"line {ln_no}: expected 5 fields")
        try:
            i, j, y, b, c = (int(p) for p in parts)
        except ValueError as exc:
            raise CountsFormatError(f"line {ln_no}: non-integer field") from exc
        rows.append((ln_no, i, j, y, b, c))
    if not rows:
        raise CountsFormatError("no data rows")
    dim = max(max(r[1], r[2], r[4]) for r in rows)
    table = CountsTable.zeros(dim)
    seen = np.zeros((dim, dim, 2, dim), dtype=bool)
    for ln_no, i, j, y, b, c in rows:
        if not (1 <= i <= dim and 1 <= j <= dim and 1 <= b <= dim and y in (1, 2)):
            raise CountsFormatError(f"line {ln_no}: index out of range")
        if c < 0:
            raise CountsFormatError(f"line {ln_no}: negative count")
        if seen[i - 1, j - 1, y - 1, b - 1]:
            raise CountsFormatError(f"line {ln_no}: duplicate cell ({i},{j},{y},{b})")
        seen[i - 1, j - 1, y - 1, b - 1] = True
        table.cells[i - 1, j - 1, y - 1, b - 1] = c
    return table
