"""Minimum-cost bipartite assignment (Hungarian-style) behind a small contract.

Backed by scipy's linear_sum_assignment. Rectangular inputs are handled
directly; that is equivalent to padding the matrix to square with
constant-cost dummies and dropping the dummy pairs from the result.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment


def hungarian(cost: Sequence[Sequence[float]]) -> tuple[dict[int, int], float]:
    """Optimal assignment of min(rows, cols) pairs minimizing total cost.

    Returns ({row: col}, total cost over assigned pairs). Entries must be
    finite and non-negative; an empty matrix yields ({}, 0.0).
    """
    rows = [list(r) for r in cost]
    if not rows or not rows[0]:
        if any(len(r) != len(rows[0]) for r in rows[1:]) if rows else False:
            raise ValueError("cost matrix rows have unequal lengths")
        return {}, 0.0
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ValueError("cost matrix rows have unequal lengths")
    matrix = np.asarray(rows, dtype=float)
    if not np.all(np.isfinite(matrix)):
        raise ValueError("cost matrix entries must be finite")
    if np.any(matrix < 0):
        raise ValueError("cost matrix entries must be non-negative")
    row_idx, col_idx = linear_sum_assignment(matrix)
    assignment = {int(r): int(c) for r, c in zip(row_idx, col_idx)}
    total = float(matrix[row_idx, col_idx].sum())
    return assignment, total
