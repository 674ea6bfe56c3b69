"""Parity-check export and covering-radius verification.

A spanning l-point set in the plane gives the columns of a 3 x l parity
check matrix over GF(q), i.e. an [l, l-3]_q code.  The covering-radius test
walks the entire syndrome space independently of the incidence machinery, so
it double-checks the geometric saturation predicate through linear algebra.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .field import FieldTable
from .plane import ProjectivePlane, as_indices


@dataclass
class ParityCheckMatrix:
    field: FieldTable
    columns: np.ndarray  # (3, l) int16
    point_indices: tuple[int, ...]

    @property
    def length(self) -> int:
        return self.columns.shape[1]

    @property
    def dimension(self) -> int:
        return self.length - 3

    def to_text(self) -> str:
        spec = self.field.spec
        head = (f"# q={spec.q} p={spec.p} h={spec.h} "
                f"modulus={','.join(map(str, spec.modulus))} l={self.length}")
        rows = [" ".join(str(int(v)) for v in row) for row in self.columns]
        return "\n".join([head] + rows) + "\n"


def gf_rank(f: FieldTable, mat: np.ndarray) -> int:
    """Row rank over GF(q) by direct elimination."""
    m = [[int(v) for v in row] for row in mat]
    rows, cols = len(m), len(m[0])
    rank = 0
    for c in range(cols):
        pivot = next((r for r in range(rank, rows) if m[r][c] != 0), None)
        if pivot is None:
            continue
        m[rank], m[pivot] = m[pivot], m[rank]
        inv = int(f.inv[m[rank][c]])
        m[rank] = [int(f.mul[v, inv]) for v in m[rank]]
        for r in range(rows):
            if r != rank and m[r][c] != 0:
                factor = m[r][c]
                m[r] = [int(f.sub[v, f.mul[factor, w]]) for v, w in zip(m[r], m[rank])]
        rank += 1
        if rank == rows:
            break
    return rank


def export_code(m: ProjectivePlane, s) -> ParityCheckMatrix:
    """Columns are the normalized triples of s in index order."""
    idx = as_indices(s)
    if len(idx) < 3:
        raise ValueError("a parity check matrix needs at least 3 columns")
    cols = m.points[list(idx)].T.copy()
    if gf_rank(m.field, cols) != 3:
        raise ValueError("set does not span the plane; no codimension-3 code")
    return ParityCheckMatrix(field=m.field, columns=cols, point_indices=idx)


def covering_radius_is_2(h: ParityCheckMatrix) -> bool:
    """True iff every nonzero syndrome combines at most 2 columns, some needing 2.

    Marks lambda.c_i and lambda.c_i + mu.c_j over all column pairs and all
    nonzero scalars, then checks the q^3 - 1 nonzero syndromes.
    """
    f = h.field
    q = f.q
    if gf_rank(f, h.columns) != 3:
        raise ValueError("covering radius check requires a rank-3 matrix")
    cols = h.columns.astype(np.int32)
    l = cols.shape[1]
    mul, add = f.mul_flat, f.add_flat

    def codes_of(vecs):
        return (vecs[..., 0] * q + vecs[..., 1]) * q + vecs[..., 2]

    reached = np.zeros(q ** 3, dtype=bool)
    lam = np.arange(1, q, dtype=np.int32)
    # single columns: lambda . c_i
    single = np.take(mul, lam[:, None, None] * q + cols.T[None, :, :])
    reached[codes_of(single).ravel()] = True
    one_column = reached.copy()
    # pairs: lambda . c_i + mu . c_j, i < j
    if l >= 2:
        ii, jj = np.triu_indices(l, k=1)
        ci = cols.T[ii]  # (P, 3)
        cj = cols.T[jj]
        a = np.take(mul, lam[:, None, None, None] * q + ci[None, None, :, :])
        b = np.take(mul, lam[None, :, None, None] * q + cj[None, None, :, :])
        both = np.take(add, a * q + b)
        reached[codes_of(both).ravel()] = True
    reached[0] = True
    if not reached.all():
        return False
    return not one_column.all() or bool((~one_column[1:]).any())
