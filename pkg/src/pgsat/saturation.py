"""Saturation, minimality and arc predicates.

The search keeps a CoverageState per branch: per-line counts of set points
plus, per plane point, the number of secants through it.  Adding or removing
a point touches only the q+1 lines through it, which is what makes the
minimality checks cheap inside the backtracking loop.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np

from .plane import ProjectivePlane, as_indices


class CoverageState:
    """Mutable coverage bookkeeping for one candidate set."""

    __slots__ = ("plane", "secant_counts", "cover_mult", "n")

    def __init__(self, plane: ProjectivePlane, indices=()):
        self.plane = plane
        self.secant_counts = np.zeros(plane.n_points, dtype=np.int16)
        self.cover_mult = np.zeros(plane.n_points, dtype=np.int16)
        self.n = 0
        for i in indices:
            self.add_point(int(i))

    def clone(self) -> "CoverageState":
        c = CoverageState.__new__(CoverageState)
        c.plane = self.plane
        c.secant_counts = self.secant_counts.copy()
        c.cover_mult = self.cover_mult.copy()
        c.n = self.n
        return c

    def add_point(self, x: int):
        plane = self.plane
        lines = plane.lines_through_point[x]
        counts = self.secant_counts
        counts[lines] += 1
        newly = lines[counts[lines] == 2]
        for ell in newly:
            self.cover_mult[plane.points_on_line[ell]] += 1
        self.n += 1

    def remove_point(self, x: int):
        plane = self.plane
        lines = plane.lines_through_point[x]
        counts = self.secant_counts
        dropped = lines[counts[lines] == 2]
        counts[lines] -= 1
        for ell in dropped:
            self.cover_mult[plane.points_on_line[ell]] -= 1
        self.n -= 1

    def uncovered_count(self) -> int:
        return int((self.cover_mult == 0).sum())

    def is_saturating(self) -> bool:
        # every point of the set itself sits on a secant once n >= 2
        return self.n >= 2 and not (self.cover_mult == 0).any()


def is_one_saturating(m: ProjectivePlane, s) -> bool:
    """Every plane point lies on a line joining two distinct points of s."""
    idx = as_indices(s)
    if len(idx) < 2:
        raise ValueError(f"a 1-saturating candidate needs at least 2 points, got {len(idx)}")
    if len(idx) == m.n_points:
        raise ValueError("the full plane is 0-saturating and out of scope")
    return CoverageState(m, idx).is_saturating()


def is_minimal(m: ProjectivePlane, s) -> bool:
    """No single point can be dropped while keeping the saturating property."""
    idx = as_indices(s)
    if not is_one_saturating(m, idx):
        raise ValueError("minimality is only defined for 1-saturating sets")
    state = CoverageState(m, idx)
    for x in idx:
        state.remove_point(x)
        sat = state.is_saturating()
        state.add_point(x)
        if sat:
            return False
    return True


def secant_line_counts(m: ProjectivePlane, idx) -> dict[int, int]:
    counts: dict[int, int] = {}
    for a, b in combinations(idx, 2):
        ell = int(m.line_through[a, b])
        counts[ell] = counts.get(ell, 1) + 1 if ell in counts else 2
    return counts


def is_arc(m: ProjectivePlane, s) -> bool:
    """Every line meets s in at most 2 points."""
    idx = as_indices(s)
    if len(idx) < 3:
        return True
    seen = set()
    for a, b in combinations(idx, 2):
        ell = int(m.line_through[a, b])
        if ell in seen:
            return False
        seen.add(ell)
    return True


def is_complete_arc(m: ProjectivePlane, s) -> bool:
    """Arc that no external point extends: every plane point is on a secant or in s."""
    idx = as_indices(s)
    if not is_arc(m, idx):
        raise ValueError("completeness is only defined for arcs")
    if len(idx) < 2:
        return False
    covered = 0
    for a, b in combinations(idx, 2):
        covered |= m.line_mask[int(m.line_through[a, b])]
    for i in idx:
        covered |= 1 << i
    return covered == m.full_mask
