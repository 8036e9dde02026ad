"""Optimal matching similarity between a reference and a candidate set.

Given a rectangular similarity matrix (reference rows, candidate columns),
the score is the maximum total of an injective assignment of the smaller
side into the larger, divided by the reference cardinality n.  The edge
cases are fixed: an empty candidate side scores 0.0, an empty reference
side scores 1.0.  Missing candidate elements are penalized through the
division by n; extra candidate elements are ignored.

The assignment is solved exactly (Jonker-Volgenant via scipy); among
equally optimal assignments the lexicographically smallest pair list is
returned so that downstream reports are deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

_ENTRY_TOLERANCE = 1e-9
#: two assignment totals within this are considered tied.
TIE_TOLERANCE = 1e-9


class MatchingDomainError(ValueError):
    """A similarity matrix entry fell outside [0, 1]."""


class SimilarityMatrix:
    """n x m matrix of similarities in [0, 1]; rows are the reference side."""

    def __init__(self, entries):
        array = np.asarray(entries, dtype=np.float64)
        if array.size == 0:
            array = array.reshape(array.shape if array.ndim == 2 else (0, 0))
        if array.ndim != 2:
            raise MatchingDomainError("similarity matrix must be two-dimensional")
        if array.size and (
            not np.all(np.isfinite(array))
            or array.min() < -_ENTRY_TOLERANCE
            or array.max() > 1.0 + _ENTRY_TOLERANCE
        ):
            raise MatchingDomainError("similarity entries must lie in [0, 1]")
        self.entries = np.clip(array, 0.0, 1.0) if array.size else array

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]


@dataclass
class MatchingResult:
    score: float
    pairs: list[tuple[int, int]] = field(default_factory=list)


def assignment_total(entries: np.ndarray) -> float:
    """Maximum total over injective assignments of min(n, m) pairs."""
    if min(entries.shape) == 0:
        return 0.0
    rows, cols = linear_sum_assignment(entries, maximize=True)
    return float(entries[rows, cols].sum())


def assignment_score(entries: np.ndarray) -> float:
    """The normalized score only, skipping deterministic pair selection.

    An empty reference side is vacuously perfect (1.0) even when the
    candidate side is empty as well; a missing candidate side scores 0.0.
    """
    n, m = entries.shape
    if n == 0:
        return 1.0
    if m == 0:
        return 0.0
    return assignment_total(entries) / n


def _lexicographic_pairs(entries: np.ndarray, total: float) -> list[tuple[int, int]]:
    """Smallest pair list (sorted by row) among assignments achieving total.

    Fixes pairs one at a time: the next pair takes the smallest row that can
    still reach the optimum, then the smallest feasible column for it.  Rows
    skipped while fixing a pair can never appear later in a sorted list, so
    they are dropped.
    """
    n, m = entries.shape
    k = min(n, m)
    rows_left = list(range(n))
    cols_left = list(range(m))
    pairs: list[tuple[int, int]] = []
    remaining = total
    while len(pairs) < k:
        chosen = None
        for i in rows_left:
            for j in cols_left:
                rest_rows = [r for r in rows_left if r > i]
                rest_cols = [c for c in cols_left if c != j]
                need = k - len(pairs) - 1
                if need > min(len(rest_rows), len(rest_cols)):
                    continue
                rest = assignment_total(entries[np.ix_(rest_rows, rest_cols)]) if need else 0.0
                if entries[i, j] + rest >= remaining - TIE_TOLERANCE:
                    chosen = (i, j)
                    remaining -= entries[i, j]
                    rows_left = rest_rows
                    cols_left = rest_cols
                    break
            if chosen:
                break
        if chosen is None:  # numerically impossible; guards infinite loops
            raise RuntimeError("assignment reconstruction failed")
        pairs.append(chosen)
    return pairs


def optimal_matching(matrix: SimilarityMatrix | np.ndarray) -> MatchingResult:
    """Score and deterministic optimal pairs for a similarity matrix."""
    if not isinstance(matrix, SimilarityMatrix):
        matrix = SimilarityMatrix(matrix)
    n, m = matrix.rows, matrix.cols
    if n == 0:
        return MatchingResult(1.0, [])
    if m == 0:
        return MatchingResult(0.0, [])
    total = assignment_total(matrix.entries)
    pairs = _lexicographic_pairs(matrix.entries, total)
    return MatchingResult(total / n, pairs)
