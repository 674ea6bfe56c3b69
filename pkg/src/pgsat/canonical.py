"""Canonical forms, equivalence tests and set stabilizers under PGL / PGammaL.

Everything here is anchored on frames: a frame-containing set is mapped by
every collineation that sends one of its ordered frames onto the reference
frame, and the least image in the frame-first comparison order is the
canonical representative.  Two frame-containing sets are equivalent exactly
when these representatives coincide.

The whole batch of candidate maps for one set is evaluated with flat-table
numpy gathers; this is the hot path of the classifier, so the code trades a
little readability for np.take everywhere.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import permutations

import numpy as np

from .collineations import PGAMMAL, PGL, Collineation, mat_normalize
from .plane import ProjectivePlane, as_indices

_CHUNK = 2048  # frames per kernel block; bounds memory and enables early exit


@lru_cache(maxsize=32)
def _ordered_quads(k: int) -> np.ndarray:
    """All ordered 4-tuples of positions in range(k)."""
    return np.array(list(permutations(range(k), 4)), dtype=np.int32)


def _auto_exponents(plane: ProjectivePlane, variant: str) -> range:
    return range(plane.field.h) if variant == PGAMMAL else range(1)


def ordered_frames(plane: ProjectivePlane, idx: np.ndarray) -> np.ndarray:
    """Ordered frame 4-tuples inside idx, as point indices, shape (B, 4)."""
    k = len(idx)
    if k < 4:
        return np.empty((0, 4), dtype=np.int32)
    pts = idx[_ordered_quads(k)]
    n = plane.n_points
    lt = plane.line_through.ravel()
    on = plane.on_line.ravel()
    a, b, c, d = pts[:, 0], pts[:, 1], pts[:, 2], pts[:, 3]
    lab = np.take(lt, a * n + b)
    bad = np.take(on, lab * n + c)
    bad |= np.take(on, lab * n + d)
    bad |= np.take(on, np.take(lt, a * n + c) * n + d)
    bad |= np.take(on, np.take(lt, b * n + c) * n + d)
    return pts[~bad]


def _det_batch(f, q, c0, c1, c2):
    """Determinants for matrices given as three (B,3) int32 columns."""
    mt, st, at = f.mul_flat, f.sub_flat, f.add_flat
    def g(t, x, y):
        return np.take(t, x * q + y)
    t0 = g(mt, c0[:, 0], g(st, g(mt, c1[:, 1], c2[:, 2]), g(mt, c1[:, 2], c2[:, 1])))
    t1 = g(mt, c1[:, 0], g(st, g(mt, c2[:, 1], c0[:, 2]), g(mt, c2[:, 2], c0[:, 1])))
    t2 = g(mt, c2[:, 0], g(st, g(mt, c0[:, 1], c1[:, 2]), g(mt, c0[:, 2], c1[:, 1])))
    return g(at, g(at, t0, t1), t2)


def frame_matrices(f, q, coords: np.ndarray) -> np.ndarray:
    """Matrices sending the standard frame to the given 4-point tuples.

    coords: (B, 4, 3) int32.  Result A (B, 3, 3) satisfies A.e_i ~ p_i and
    A.(1,1,1) ~ p_4 projectively (columns carry unnormalized Cramer factors).
    """
    p1, p2, p3, p4 = coords[:, 0], coords[:, 1], coords[:, 2], coords[:, 3]
    d1 = _det_batch(f, q, p4, p2, p3)
    d2 = _det_batch(f, q, p1, p4, p3)
    d3 = _det_batch(f, q, p1, p2, p4)
    out = np.empty((coords.shape[0], 3, 3), dtype=np.int32)
    mt = f.mul_flat
    out[:, :, 0] = np.take(mt, d1[:, None] * q + p1)
    out[:, :, 1] = np.take(mt, d2[:, None] * q + p2)
    out[:, :, 2] = np.take(mt, d3[:, None] * q + p3)
    return out


def adjugate_batch(f, q, a: np.ndarray) -> np.ndarray:
    mt, st = f.mul_flat, f.sub_flat
    def c(i1, j1, i2, j2):
        return np.take(st, np.take(mt, a[:, i1, j1] * q + a[:, i2, j2]) * q
                       + np.take(mt, a[:, i1, j2] * q + a[:, i2, j1]))
    out = np.empty_like(a)
    out[:, 0, 0] = c(1, 1, 2, 2); out[:, 0, 1] = c(0, 2, 2, 1); out[:, 0, 2] = c(0, 1, 1, 2)
    out[:, 1, 0] = c(1, 2, 2, 0); out[:, 1, 1] = c(0, 0, 2, 2); out[:, 1, 2] = c(0, 2, 1, 0)
    out[:, 2, 0] = c(1, 0, 2, 1); out[:, 2, 1] = c(0, 1, 2, 0); out[:, 2, 2] = c(0, 0, 1, 1)
    return out


def matmul_batch(f, q, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    mt, at = f.mul_flat, f.add_flat
    out = np.empty_like(x)
    for i in range(3):
        for j in range(3):
            acc = np.take(mt, x[:, i, 0] * q + y[:, 0, j])
            acc = np.take(at, acc * q + np.take(mt, x[:, i, 1] * q + y[:, 1, j]))
            acc = np.take(at, acc * q + np.take(mt, x[:, i, 2] * q + y[:, 2, j]))
            out[:, i, j] = acc
    return out


def apply_batch(plane: ProjectivePlane, mats: np.ndarray, coords: np.ndarray) -> np.ndarray:
    """Point indices of M.x for every matrix and coordinate row: (B,3,3),(B|1,k,3) -> (B,k)."""
    f = plane.field
    q = plane.q
    mt, at = f.mul_flat, f.add_flat
    x0, x1, x2 = coords[:, :, 0], coords[:, :, 1], coords[:, :, 2]
    ys = []
    for i in range(3):
        acc = np.take(mt, mats[:, None, i, 0] * q + x0)
        acc = np.take(at, acc * q + np.take(mt, mats[:, None, i, 1] * q + x1))
        acc = np.take(at, acc * q + np.take(mt, mats[:, None, i, 2] * q + x2))
        ys.append(acc)
    y0, y1, y2 = ys
    pick = np.where(y2 != 0, y2, np.where(y1 != 0, y1, y0))
    s = np.take(f.inv32, pick)
    code = np.take(mt, y0 * q + s)
    code = code * q + np.take(mt, y1 * q + s)
    code = code * q + np.take(mt, y2 * q + s)
    return np.take(plane.point_code, code)


def _compare_rows(rows: np.ndarray, target: np.ndarray):
    """Per-row lexicographic comparison against target: -1, 0 or +1 per row."""
    diff = rows - target[None, :]
    nz = diff != 0
    has = nz.any(axis=1)
    first = nz.argmax(axis=1)
    sign = np.sign(diff[np.arange(len(rows)), first])
    return np.where(has, sign, 0)


def _target_sigma(plane: ProjectivePlane, idx: np.ndarray) -> np.ndarray:
    return np.sort(plane.nat2sig[idx])


def _image_blocks(plane: ProjectivePlane, idx: np.ndarray, variant: str,
                  with_maps: bool = False):
    """Yield (rows, frames, e) blocks of sorted search-order image rows of idx.

    rows: (b, k) images under maps sending the block's ordered frames onto the
    reference frame, sorted along axis 1.
    """
    f = plane.field
    frames = ordered_frames(plane, idx)
    if len(frames) == 0:
        raise ValueError("set contains no frame; canonical machinery does not apply")
    k = len(idx)
    for e in _auto_exponents(plane, variant):
        coords_all = np.take(f.frob32[e], plane.points32[frames])
        set_coords = np.take(f.frob32[e], plane.points32[idx])[None, :, :]
        for lo in range(0, len(frames), _CHUNK):
            chunk = coords_all[lo:lo + _CHUNK]
            mats = adjugate_batch(f, plane.q, frame_matrices(f, plane.q, chunk))
            nat = apply_batch(plane, mats, set_coords)
            rows = np.sort(np.take(plane.nat2sig, nat), axis=1)
            if with_maps:
                yield rows, frames[lo:lo + _CHUNK], e, mats
            else:
                yield rows, frames[lo:lo + _CHUNK], e, None


def is_canonical(plane: ProjectivePlane, s, variant: str) -> bool:
    """True iff no equivalent image precedes s in the frame-first order."""
    idx = np.array(as_indices(s), dtype=np.int32)
    target = _target_sigma(plane, idx)
    for rows, _, _, _ in _image_blocks(plane, idx, variant):
        if (_compare_rows(rows, target) < 0).any():
            return False
    return True


def canonical_form(plane: ProjectivePlane, s, variant: str) -> tuple[int, ...]:
    """The least image of s over all frame-anchored maps, as natural indices."""
    idx = np.array(as_indices(s), dtype=np.int32)
    best = None
    for rows, _, _, _ in _image_blocks(plane, idx, variant):
        order = np.lexsort(rows.T[::-1])
        cand = rows[order[0]]
        if best is None or tuple(cand) < tuple(best):
            best = cand
    return tuple(sorted(int(plane.sig2nat[v]) for v in best))


def set_stabilizer(plane: ProjectivePlane, s, variant: str):
    """Exact setwise stabilizer of a frame-containing set.

    Every stabilizing collineation must send a fixed ordered frame inside s
    to some ordered frame inside s, so enumerating those maps and keeping the
    ones fixing s as a set is exhaustive.  Returns
    (order_in_variant, order_pgl, order_pgammal, elements_in_variant).
    """
    f = plane.field
    q = plane.q
    idx = np.array(as_indices(s), dtype=np.int32)
    frames = ordered_frames(plane, idx)
    if len(frames) == 0:
        raise ValueError("set contains no frame; use the line-plus-point path instead")
    src = frames[0]
    dst_mats = frame_matrices(f, q, plane.points32[frames])
    target = _target_sigma(plane, idx)

    order_pgl = 0
    order_pgammal = 0
    elements = []
    for e in range(f.h):
        src_coords = np.take(f.frob32[e], plane.points32[src])[None, :, :]
        a_src = adjugate_batch(f, q, frame_matrices(f, q, src_coords))
        set_coords = np.take(f.frob32[e], plane.points32[idx])[None, :, :]
        for lo in range(0, len(dst_mats), _CHUNK):
            block = dst_mats[lo:lo + _CHUNK]
            mats = matmul_batch(f, q, block, np.broadcast_to(a_src, block.shape))
            nat = apply_batch(plane, mats, set_coords)
            rows = np.sort(np.take(plane.nat2sig, nat), axis=1)
            ties = np.where(_compare_rows(rows, target) == 0)[0]
            if e == 0:
                order_pgl += len(ties)
            order_pgammal += len(ties)
            if variant == PGL and e > 0:
                continue
            for t in ties:
                mat = tuple(tuple(int(v) for v in row) for row in mats[t])
                elements.append(Collineation(mat_normalize(f, mat), e))
    order = order_pgl if variant == PGL else order_pgammal
    return order, order_pgl, order_pgammal, elements


def stabilizer(plane: ProjectivePlane, s, variant: str):
    """Spec-facing form: (order, stabilizing elements) for the chosen group."""
    order, _, _, elements = set_stabilizer(plane, s, variant)
    return order, elements
