"""One-to-one assignment of predictions to ground truths.

``hungarian`` solves the (padded) square problem with the O(n^3)
shortest-augmenting-path method, then canonicalizes: among all optimal
assignments it returns the lexicographically smallest pair list. The dual
potentials from the solver make this cheap, because an assignment is optimal
exactly when it only uses edges of zero reduced cost.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import EmptyInput
from .geometry import pairwise_iou
from .risk import bayes_risk, br_match_quality

__all__ = [
    "MatchResult",
    "build_cost_matrix",
    "hungarian",
    "brute_force_assignment",
    "assignment_cost",
]


@dataclass(frozen=True)
class MatchResult:
    pairs: tuple[tuple[int, int], ...]
    total_cost: float


def build_cost_matrix(dets, gts) -> np.ndarray:
    """Cost (negated risk-refined matching quality) for every (detection, gt) pair.

    ``dets`` is a sequence of ``(score, Box, GaussPred4)``; ``gts`` a sequence
    of :class:`Box`. Rows are detections, columns ground truths.
    """
    if len(dets) == 0 or len(gts) == 0:
        raise EmptyInput("build_cost_matrix needs at least one detection and one ground truth")
    det_boxes = np.array([b.as_tuple() for _, b, _ in dets], dtype=np.float64)
    gt_boxes = np.array([b.as_tuple() for b in gts], dtype=np.float64)
    ious = pairwise_iou(det_boxes, gt_boxes)
    cost = np.empty_like(ious)
    for i, (s, _, p) in enumerate(dets):
        risk = bayes_risk(p)
        for j in range(ious.shape[1]):
            cost[i, j] = -br_match_quality(s, float(ious[i, j]), risk)
    return cost


def assignment_cost(c: np.ndarray, pairs) -> float:
    """Sum of ``c[i, j]`` over ``pairs`` in the order given."""
    total = 0.0
    for i, j in pairs:
        total += float(c[i, j])
    return total


def _alternating_path(tight, owner, row_col, start_row, target_col, locked_cols):
    """BFS over tight edges from ``start_row`` to ``target_col``.

    Returns the list of (row, new_col) reassignments, or None.
    """
    parent = {start_row: None}
    queue = [start_row]
    head = 0
    while head < len(queue):
        r = queue[head]
        head += 1
        for c in np.flatnonzero(tight[r]):
            c = int(c)
            if locked_cols[c] or c == row_col[r]:
                continue
            if c == target_col:
                moves = []
                cur_r, cur_c = r, c
                while cur_r is not None:
                    moves.append((cur_r, cur_c))
                    prev = parent[cur_r]
                    if prev is None:
                        break
                    cur_c = row_col[cur_r]
                    cur_r = prev
                return moves
            nxt = owner[c]
            if nxt not in parent:
                parent[nxt] = r
                queue.append(nxt)
    return None


def _canonical(c: np.ndarray, row_col: np.ndarray, u: np.ndarray, v: np.ndarray, tol: float):
    """Lexicographically smallest perfect matching on the tight-edge graph."""
    n = c.shape[0]
    tight = (c - u[:, None] - v[None, :]) <= tol
    row_col = [int(x) for x in row_col]
    owner = [0] * n
    for r, col in enumerate(row_col):
        owner[col] = r
    locked_cols = [False] * n
    for i in range(n):
        current = row_col[i]
        for j in np.flatnonzero(tight[i]):
            j = int(j)
            if j >= current:
                break
            if locked_cols[j]:
                continue
            r = owner[j]
            # rows before i are locked and their columns are marked, so r > i
            locked_cols[j] = True
            path = _alternating_path(tight, owner, row_col, r, current, locked_cols)
            locked_cols[j] = False
            if path is None:
                continue
            for rr, cc in path:
                row_col[rr] = cc
                owner[cc] = rr
            row_col[i] = j
            owner[j] = i
            break
        locked_cols[row_col[i]] = True
    return np.asarray(row_col, dtype=np.intp)


def hungarian(c) -> MatchResult:
    """Minimum-total-cost one-to-one assignment of size min(rows, cols).

    Rectangular matrices are padded to square with a constant larger than the
    sum of absolute entries; pairs touching padding are dropped. When several
    assignments are optimal the lexicographically smallest pair list wins.
    """
    c = np.asarray(c, dtype=np.float64)
    if c.ndim != 2:
        raise ValueError(f"cost matrix must be 2-D, got shape {c.shape}")
    if not np.all(np.isfinite(c)):
        raise ValueError("cost matrix must be finite")
    rows, cols = c.shape
    if rows == 0 or cols == 0:
        return MatchResult((), 0.0)
    n = max(rows, cols)
    pad = float(np.sum(np.abs(c))) + 1.0
    sq = np.full((n, n), pad, dtype=np.float64)
    sq[:rows, :cols] = c

    row_col, u, v = _kernels.solve_square(sq)
    # rounding budget of the potentials; also bounds the optimality re-check
    tol = 1e3 * np.finfo(np.float64).eps * n * max(1.0, float(np.max(np.abs(sq))))
    canon = _canonical(sq, row_col, u, v, tol=tol)

    def real_pairs(assign):
        return tuple((i, int(assign[i])) for i in range(rows) if assign[i] < cols)

    base_pairs = real_pairs(row_col)
    canon_pairs = real_pairs(canon)
    base_total = assignment_cost(c, base_pairs)
    canon_total = assignment_cost(c, canon_pairs)
    # re-verify: keep the canonical form only if it is still optimal up to rounding
    if canon_total <= base_total + tol:
        return MatchResult(canon_pairs, canon_total)
    return MatchResult(base_pairs, base_total)


def brute_force_assignment(c) -> MatchResult:
    """Exhaustive oracle for small matrices (use only for n, m <= 8).

    Enumerates every injective map from the smaller side to the larger one and
    returns the lexicographically smallest optimal pair list.
    """
    c = np.asarray(c, dtype=np.float64)
    rows, cols = c.shape
    if rows == 0 or cols == 0:
        return MatchResult((), 0.0)
    best_total = None
    best_pairs = None
    if rows <= cols:
        candidates = (
            tuple(enumerate(perm)) for perm in itertools.permutations(range(cols), rows)
        )
    else:
        candidates = (
            tuple(sorted((r, j) for j, r in enumerate(perm)))
            for perm in itertools.permutations(range(rows), cols)
        )
    for pairs in candidates:
        total = assignment_cost(c, pairs)
        if best_total is None or total < best_total or (total == best_total and pairs < best_pairs):
            best_total = total
            best_pairs = pairs
    return MatchResult(best_pairs, best_total)
