"""Collineations of PG(2,q): projectivities and their semilinear extensions.

A collineation is a pair (matrix, auto_exp) acting as x -> M . x^(p^e), the
field automorphism applied first.  Matrices are normalized so the first
nonzero entry in row-major order is 1, giving one representative per group
element.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .field import FieldTable
from .plane import PointSet, ProjectivePlane, as_indices, is_frame

PGL = "pgl"
PGAMMAL = "pgammal"

VARIANTS = (PGL, PGAMMAL)


def group_order(q: int, variant: str, h: int | None = None) -> int:
    """|PGL(3,q)| = q^3 (q^3-1)(q^2-1); the semilinear group is h times larger."""
    if h is None:
        from .field import prime_power
        _, h = prime_power(q)
    pgl = q ** 3 * (q ** 3 - 1) * (q ** 2 - 1)
    if variant == PGL:
        return pgl
    if variant == PGAMMAL:
        return h * pgl
    raise ValueError(f"unknown group variant {variant!r}")


def frame_stabilizer_order() -> int:
    """Setwise stabilizer of a frame in PGL(3,q): the 24 frame permutations."""
    return 24


# -- small exact matrix helpers over GF(q) ------------------------------

def mat_vec(f: FieldTable, m, v) -> tuple[int, int, int]:
    a, s = f.add, f.mul
    return tuple(
        int(a[a[s[m[i][0], v[0]], s[m[i][1], v[1]]], s[m[i][2], v[2]]])
        for i in range(3))


def mat_mul(f: FieldTable, x, y):
    a, s = f.add, f.mul
    return tuple(
        tuple(
            int(a[a[s[x[i][0], y[0][j]], s[x[i][1], y[1][j]]], s[x[i][2], y[2][j]]])
            for j in range(3))
        for i in range(3))


def mat_det(f: FieldTable, m) -> int:
    s, sub, a = f.mul, f.sub, f.add
    t0 = int(s[m[0][0], sub[s[m[1][1], m[2][2]], s[m[1][2], m[2][1]]]])
    t1 = int(s[m[0][1], sub[s[m[1][2], m[2][0]], s[m[1][0], m[2][2]]]])
    t2 = int(s[m[0][2], sub[s[m[1][0], m[2][1]], s[m[1][1], m[2][0]]]])
    return int(a[a[t0, t1], t2])


def mat_adjugate(f: FieldTable, m):
    s, sub = f.mul, f.sub
    def c(i1, j1, i2, j2):
        return int(sub[s[m[i1][j1], m[i2][j2]], s[m[i1][j2], m[i2][j1]]])
    return (
        (c(1, 1, 2, 2), c(0, 2, 2, 1), c(0, 1, 1, 2)),
        (c(1, 2, 2, 0), c(0, 0, 2, 2), c(0, 2, 1, 0)),
        (c(1, 0, 2, 1), c(0, 1, 2, 0), c(0, 0, 1, 1)),
    )


def mat_normalize(f: FieldTable, m):
    """Scale so the first nonzero entry in row-major order is 1."""
    flat = [m[i][j] for i in range(3) for j in range(3)]
    lead = next((v for v in flat if v != 0), 0)
    if lead == 0:
        raise ValueError("zero matrix cannot represent a collineation")
    s = int(f.inv[lead])
    return tuple(tuple(int(f.mul[v, s]) for v in row) for row in m)


@dataclass(frozen=True)
class Collineation:
    """Semilinear map x -> matrix . x^(p^auto_exp)."""

    matrix: tuple[tuple[int, int, int], ...]
    auto_exp: int = 0

    @staticmethod
    def create(f: FieldTable, matrix, auto_exp: int = 0) -> "Collineation":
        m = tuple(tuple(int(v) for v in row) for row in matrix)
        if mat_det(f, m) == 0:
            raise ValueError("matrix is singular")
        if not 0 <= auto_exp < f.h:
            raise ValueError(f"auto_exp {auto_exp} outside [0, {f.h})")
        return Collineation(mat_normalize(f, m), auto_exp)

    def is_projectivity(self) -> bool:
        return self.auto_exp == 0

    def to_dict(self) -> dict:
        return {"matrix": [v for row in self.matrix for v in row],
                "auto_exp": self.auto_exp}

    @staticmethod
    def from_dict(f: FieldTable, d: dict) -> "Collineation":
        flat = d["matrix"]
        rows = (tuple(flat[0:3]), tuple(flat[3:6]), tuple(flat[6:9]))
        return Collineation.create(f, rows, d.get("auto_exp", 0))


def identity(f: FieldTable) -> Collineation:
    return Collineation(((1, 0, 0), (0, 1, 0), (0, 0, 1)), 0)


def compose(f: FieldTable, g1: Collineation, g2: Collineation) -> Collineation:
    """g1 after g2: (M1, e1) . (M2, e2) = (M1 . frob^e1(M2), e1 + e2)."""
    m2f = tuple(tuple(int(f.frob[g1.auto_exp, v]) for v in row) for row in g2.matrix)
    m = mat_mul(f, g1.matrix, m2f)
    return Collineation(mat_normalize(f, m), (g1.auto_exp + g2.auto_exp) % f.h)


def inverse(f: FieldTable, g: Collineation) -> Collineation:
    e_inv = (-g.auto_exp) % f.h
    adj = mat_adjugate(f, g.matrix)
    m = tuple(tuple(int(f.frob[e_inv, v]) for v in row) for row in adj)
    return Collineation(mat_normalize(f, m), e_inv)


def apply_point(m: ProjectivePlane, g: Collineation, idx: int) -> int:
    f = m.field
    v = [int(f.frob[g.auto_exp, c]) for c in m.points[idx]]
    return m.point_index(mat_vec(f, g.matrix, v))


def point_permutation(m: ProjectivePlane, g: Collineation) -> np.ndarray:
    """Image index of every point under g, as an array of length n_points."""
    f = m.field
    q = m.q
    x = f.frob[g.auto_exp][m.points.astype(np.int32)]
    mat = np.array(g.matrix, dtype=np.int32)
    y = np.empty_like(x)
    for i in range(3):
        acc = f.mul[mat[i, 0], x[:, 0]]
        acc = f.add[acc, f.mul[mat[i, 1], x[:, 1]]]
        acc = f.add[acc, f.mul[mat[i, 2], x[:, 2]]]
        y[:, i] = acc
    # normalize: last nonzero coordinate scaled to 1
    pick = np.where(y[:, 2] != 0, y[:, 2], np.where(y[:, 1] != 0, y[:, 1], y[:, 0]))
    s = f.inv[pick]
    for i in range(3):
        y[:, i] = f.mul[y[:, i], s]
    flat = (y[:, 0].astype(np.int64) * q + y[:, 1]) * q + y[:, 2]
    perm = m.point_code[flat]
    if (perm < 0).any():
        raise RuntimeError("collineation image left the point table")
    return perm.astype(np.int32)


def apply(m: ProjectivePlane, g: Collineation, s) -> PointSet:
    """Image of a point set under a collineation."""
    perm = point_permutation(m, g)
    return PointSet(int(perm[i]) for i in as_indices(s))


def frame_matrix(f: FieldTable, pts4) -> tuple[tuple[int, ...], ...]:
    """Matrix sending the standard frame to the 4 given points (as columns).

    Columns are the first three points scaled so the image of (1,1,1) is the
    fourth; scale factors come from an unnormalized Cramer solve, which is
    enough projectively.
    """
    p1, p2, p3, p4 = [tuple(int(c) for c in p) for p in pts4]
    def det_cols(a, b, c):
        mrows = ((a[0], b[0], c[0]), (a[1], b[1], c[1]), (a[2], b[2], c[2]))
        return mat_det(f, mrows)
    d1 = det_cols(p4, p2, p3)
    d2 = det_cols(p1, p4, p3)
    d3 = det_cols(p1, p2, p4)
    if 0 in (d1, d2, d3):
        raise ValueError("degenerate 4-tuple: some 3 of the points are collinear")
    cols = [tuple(int(f.mul[d, c]) for c in p) for d, p in ((d1, p1), (d2, p2), (d3, p3))]
    return tuple(tuple(cols[j][i] for j in range(3)) for i in range(3))


def projectivity_from_frames(m: ProjectivePlane, src, dst) -> Collineation:
    """The unique projectivity mapping the ordered frame src onto dst."""
    src = tuple(int(i) for i in src)
    dst = tuple(int(i) for i in dst)
    for name, tup in (("source", src), ("destination", dst)):
        if not is_frame(m, tup):
            raise ValueError(f"{name} 4-tuple is not a frame: {tup}")
    f = m.field
    a_src = frame_matrix(f, [m.points[i] for i in src])
    a_dst = frame_matrix(f, [m.points[i] for i in dst])
    mat = mat_mul(f, a_dst, mat_adjugate(f, a_src))
    return Collineation(mat_normalize(f, mat), 0)
