"""
Linear algebra over F2.

Dense row reduction runs on numpy uint8 arrays with XOR row operations; the
incremental basis keeps rows as Python int bitsets so that membership
certificates (which original rows combine to a vector) come for free.
"""

from typing import Dict, Hashable, Iterable, List, Optional, Sequence, Tuple

import numpy as np


def row_echelon(M, reduced: bool = False) -> Tuple[np.ndarray, List[int]]:
    """Row-reduce a binary matrix, pivots searched left to right"""
    R = (np.asarray(M, dtype=np.uint8) % 2).copy()
    if R.ndim != 2 or R.size == 0:
        return R, []
    m, n = R.shape
    pivots: List[int] = []
    pivot_row = 0
    for col in range(n):
        if pivot_row == m:
            break
        candidates = np.nonzero(R[pivot_row:, col])[0]
        if candidates.size == 0:
            continue
        found = pivot_row + int(candidates[0])
        if found != pivot_row:
            R[[pivot_row, found]] = R[[found, pivot_row]]
        start = 0 if reduced else pivot_row + 1
        rows = np.nonzero(R[start:, col])[0] + start
        rows = rows[rows != pivot_row]
        if rows.size:
            R[rows] ^= R[pivot_row]
        pivots.append(col)
        pivot_row += 1
    return R, pivots


def rank(M) -> int:
    M = np.asarray(M, dtype=np.uint8)
    if M.ndim != 2 or M.shape[0] == 0 or M.shape[1] == 0:
        return 0
    _, pivots = row_echelon(M)
    return len(pivots)


class ColumnIndex:
    """Assigns a stable column to every monomial that shows up"""

    def __init__(self, order: Optional[Iterable[Hashable]] = None):
        self.columns: Dict[Hashable, int] = {}
        self.keys: List[Hashable] = []
        for key in order or ():
            self.column(key)

    def column(self, key: Hashable) -> int:
        col = self.columns.get(key)
        if col is None:
            col = len(self.keys)
            self.columns[key] = col
            self.keys.append(key)
        return col

    def __len__(self) -> int:
        return len(self.keys)

    def bits(self, keys: Iterable[Hashable]) -> int:
        value = 0
        for key in keys:
            value ^= 1 << self.column(key)
        return value

    def matrix(self, rows: Sequence[Iterable[Hashable]]) -> np.ndarray:
        encoded = [[self.column(key) for key in row] for row in rows]
        M = np.zeros((len(rows), len(self.keys)), dtype=np.uint8)
        for i, cols in enumerate(encoded):
            for col in cols:
                M[i, col] ^= 1
        return M


class IncrementalBasis:
    """Echelon basis of bitset rows with the combination that produced each row"""

    def __init__(self):
        self.rows: Dict[int, Tuple[int, int]] = {}  # pivot bit -> (row, combination mask)
        self.count = 0

    def reduce(self, vector: int) -> Tuple[int, int]:
        combination = 0
        for bit in sorted(self.rows, reverse=True):
            if (vector >> bit) & 1:
                row, comb = self.rows[bit]
                vector ^= row
                combination ^= comb
        return vector, combination

    def add(self, vector: int) -> bool:
        """Insert a row; returns False when it was already in the span"""
        tag = 1 << self.count
        self.count += 1
        residue, combination = self.reduce(vector)
        if not residue:
            return False
        self.rows[residue.bit_length() - 1] = (residue, combination ^ tag)
        return True

    def contains(self, vector: int) -> bool:
        return self.reduce(vector)[0] == 0

    @property
    def rank(self) -> int:
        return len(self.rows)


def mask_indices(mask: int) -> List[int]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out
