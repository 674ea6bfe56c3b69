"""The incidence structure of PG(2,q): indexed points and lines plus membership tables.

Points are homogeneous triples scaled so the last nonzero coordinate is 1,
enumerated as (1,0,0), then (x,1,0) for x in value order, then (x,y,1) in
lexicographic value order.  Lines use the same triples as dual coordinates,
so line i and point i share a triple.  Every output file records this
normalization so representatives stay portable.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np

from .field import FieldTable


class PointSet:
    """Immutable set of point indices backed by a bit mask."""

    __slots__ = ("mask", "n")

    def __init__(self, indices=()):
        mask = 0
        for i in indices:
            mask |= 1 << int(i)
        self.mask = mask
        self.n = mask.bit_count()

    @staticmethod
    def from_mask(mask: int) -> "PointSet":
        s = PointSet()
        s.mask = mask
        s.n = mask.bit_count()
        return s

    def __len__(self):
        return self.n

    def __contains__(self, i):
        return (self.mask >> int(i)) & 1 == 1

    def __iter__(self):
        mask = self.mask
        while mask:
            low = mask & -mask
            yield low.bit_length() - 1
            mask ^= low

    def __eq__(self, other):
        return isinstance(other, PointSet) and self.mask == other.mask

    def __hash__(self):
        return hash(self.mask)

    def add(self, i: int) -> "PointSet":
        return PointSet.from_mask(self.mask | (1 << int(i)))

    def remove(self, i: int) -> "PointSet":
        return PointSet.from_mask(self.mask & ~(1 << int(i)))

    def union(self, other: "PointSet") -> "PointSet":
        return PointSet.from_mask(self.mask | other.mask)

    def issubset(self, other: "PointSet") -> bool:
        return self.mask & ~other.mask == 0

    def to_sorted_list(self) -> list[int]:
        return list(self)

    def __repr__(self):
        return f"PointSet({self.to_sorted_list()})"


def as_indices(s) -> tuple[int, ...]:
    """Accept a PointSet or any iterable of indices; return a sorted tuple."""
    if isinstance(s, PointSet):
        return tuple(s)
    return tuple(sorted(int(i) for i in s))


class ProjectivePlane:
    """PG(2,q) with all incidence fully precomputed.  Immutable after construction."""

    def __init__(self, field: FieldTable):
        self.field = field
        q = field.q
        self.q = q
        self.n_points = q * q + q + 1

        self.points = self._enumerate_points()
        self.points32 = self.points.astype(np.int32)
        self.point_code = self._code_table()
        # lines are the dual triples in the same order
        self.lines = self.points.copy()

        self._build_incidence()
        self._build_search_order()

    # -- construction -------------------------------------------------

    def _enumerate_points(self) -> np.ndarray:
        q = self.q
        pts = [(1, 0, 0)]
        pts += [(x, 1, 0) for x in range(q)]
        pts += [(x, y, 1) for x in range(q) for y in range(q)]
        return np.array(pts, dtype=np.int16)

    def _code_table(self) -> np.ndarray:
        q = self.q
        codes = np.full(q * q * q, -1, dtype=np.int32)
        flat = (self.points[:, 0].astype(np.int64) * q + self.points[:, 1]) * q + self.points[:, 2]
        codes[flat] = np.arange(self.n_points)
        return codes

    def _build_incidence(self):
        f = self.field
        q, n = self.q, self.n_points
        pts = self.points.astype(np.int32)

        # incidence[i, j] = (line_i . point_j == 0)
        dot = f.mul[pts[:, None, 0], pts[None, :, 0]]
        dot = f.add[dot, f.mul[pts[:, None, 1], pts[None, :, 1]]]
        dot = f.add[dot, f.mul[pts[:, None, 2], pts[None, :, 2]]]
        self.on_line = dot == 0

        counts = self.on_line.sum(axis=1)
        if not np.all(counts == q + 1):
            raise RuntimeError("incidence table inconsistent: bad line sizes")

        self.points_on_line = np.array(
            [np.where(self.on_line[i])[0] for i in range(n)], dtype=np.int32)
        self.lines_through_point = np.array(
            [np.where(self.on_line[:, j])[0] for j in range(n)], dtype=np.int32)

        line_through = np.full((n, n), -1, dtype=np.int32)
        for ell in range(n):
            on = self.points_on_line[ell]
            line_through[np.ix_(on, on)] = ell
        line_through[np.arange(n), np.arange(n)] = -1
        self.line_through = line_through

        # bit mask per line, used by the coverage oracles
        self.line_mask = [int(sum(1 << int(p) for p in self.points_on_line[i]))
                          for i in range(n)]
        self.full_mask = (1 << n) - 1

    def _build_search_order(self):
        # Search/comparison order puts the reference frame first; everything
        # downstream of canonical forms relies on this being fixed.
        q, n = self.q, self.n_points
        frame = self.standard_frame()
        rest = [i for i in range(n) if i not in frame]
        sig2nat = np.array(list(frame) + rest, dtype=np.int32)
        nat2sig = np.empty(n, dtype=np.int32)
        nat2sig[sig2nat] = np.arange(n)
        self.sig2nat = sig2nat
        self.nat2sig = nat2sig

    # -- basic geometry ------------------------------------------------

    def standard_frame(self) -> tuple[int, int, int, int]:
        """Indices of e1, e2, e3, (1,1,1)."""
        q = self.q
        return (0, 1, q + 1, 2 * q + 2)

    def normalize_triple(self, v) -> tuple[int, int, int]:
        f = self.field
        x0, x1, x2 = int(v[0]), int(v[1]), int(v[2])
        if x2 != 0:
            s = int(f.inv[x2])
        elif x1 != 0:
            s = int(f.inv[x1])
        elif x0 != 0:
            s = int(f.inv[x0])
        else:
            raise ValueError("zero triple has no projective point")
        return (int(f.mul[x0, s]), int(f.mul[x1, s]), int(f.mul[x2, s]))

    def point_index(self, v) -> int:
        x0, x1, x2 = self.normalize_triple(v)
        q = self.q
        return int(self.point_code[(x0 * q + x1) * q + x2])

    line_index = point_index  # same triple list

    def cross(self, a, b) -> tuple[int, int, int]:
        f = self.field
        m, s = f.mul, f.sub
        return (
            int(s[m[a[1], b[2]], m[a[2], b[1]]]),
            int(s[m[a[2], b[0]], m[a[0], b[2]]]),
            int(s[m[a[0], b[1]], m[a[1], b[0]]]),
        )


def build_plane(field: FieldTable) -> ProjectivePlane:
    return ProjectivePlane(field)


def line_through(m: ProjectivePlane, a: int, b: int) -> int:
    """Index of the unique line through two distinct points."""
    if a == b:
        raise ValueError(f"line_through needs two distinct points, got {a} twice")
    return int(m.line_through[a, b])


def collinear(m: ProjectivePlane, a: int, b: int, c: int) -> bool:
    if a == b or b == c or a == c:
        return True
    return bool(m.on_line[m.line_through[a, b], c])


def is_frame(m: ProjectivePlane, s) -> bool:
    """True iff the four given points have no 3 collinear."""
    idx = as_indices(s)
    if len(idx) != 4:
        raise ValueError(f"a frame candidate must have exactly 4 points, got {len(idx)}")
    a, b, c, d = idx
    return not (collinear(m, a, b, c) or collinear(m, a, b, d)
                or collinear(m, a, c, d) or collinear(m, b, c, d))


def max_secant_size(m: ProjectivePlane, idx: tuple[int, ...]) -> int:
    """Largest number of the given points on one line."""
    if len(idx) < 2:
        return len(idx)
    counts = {}
    best = 2
    for i in range(len(idx)):
        for j in range(i + 1, len(idx)):
            ell = int(m.line_through[idx[i], idx[j]])
            c = counts.get(ell, 1) + 1
            counts[ell] = c
            if c > best:
                best = c
    return best


def contains_frame(m: ProjectivePlane, s) -> bool:
    """True iff some 4-subset of s is a frame."""
    idx = as_indices(s)
    if len(idx) < 4:
        return False
    # cheap reject: inside a line plus at most one extra point no frame exists
    if max_secant_size(m, idx) >= len(idx) - 1:
        return False
    for quad in combinations(idx, 4):
        if is_frame(m, quad):
            return True
    return False


def first_frame(m: ProjectivePlane, idx: tuple[int, ...]):
    """First 4-subset (in sorted-combination order) forming a frame, or None."""
    if len(idx) < 4:
        return None
    for quad in combinations(idx, 4):
        if is_frame(m, quad):
            return quad
    return None
