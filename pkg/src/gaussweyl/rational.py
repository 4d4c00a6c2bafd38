"""Exact Gaussian elimination over Q for small dense matrices."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction


@dataclass
class Echelon:
    rows: list[list[Fraction]]
    pivots: list[int]
    trace: list[tuple[int, int]] = field(default_factory=list)  # (row, col) per pivot

    @property
    def rank(self) -> int:
        return len(self.pivots)


def rref(matrix) -> Echelon:
    """Reduced row echelon form; pivots are chosen as the first nonzero entry
    scanning rows top-down in each column, so the result is deterministic."""
    rows = [[Fraction(x) for x in row] for row in matrix]
    n_rows = len(rows)
    n_cols = len(rows[0]) if rows else 0
    pivots, trace = [], []
    r = 0
    for c in range(n_cols):
        pivot = next((i for i in range(r, n_rows) if rows[i][c] != 0), None)
        if pivot is None:
            continue
        trace.append((pivot, c))
        rows[r], rows[pivot] = rows[pivot], rows[r]
        lead = rows[r][c]
        rows[r] = [x / lead for x in rows[r]]
        for i in range(n_rows):
            if i != r and rows[i][c] != 0:
                factor = rows[i][c]
                rows[i] = [x - factor * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == n_rows:
            break
    return Echelon(rows, pivots, trace)


def nullspace(matrix, n_cols: int | None = None) -> list[list[Fraction]]:
    """Basis of {x : matrix @ x = 0}, one vector per free column, each
    scaled so that its first nonzero entry is 1."""
    if n_cols is None:
        n_cols = len(matrix[0]) if matrix else 0
    ech = rref(matrix) if matrix else Echelon([], [])
    free = [c for c in range(n_cols) if c not in ech.pivots]
    basis = []
    for fc in free:
        x = [Fraction(0)] * n_cols
        x[fc] = Fraction(1)
        for row, pc in zip(ech.rows, ech.pivots):
            x[pc] = -row[fc]
        lead = next(v for v in x if v != 0)
        basis.append([v / lead for v in x])
    return basis


def rank(matrix) -> int:
    return rref(matrix).rank if matrix else 0
