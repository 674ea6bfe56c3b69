"""Exhaustive, isomorph-free classification of minimal 1-saturating sets.

The search walks frame-anchored ascending chains: the root is the reference
frame, children add one point with a larger search-order index, and a child
survives only if it is the canonical representative of its class.  Removing
the largest extension point of a canonical set yields a canonical set again,
so every class of every size is generated exactly once.  Branches stop as
soon as a set saturates: a strict superset of a saturating set can never be
minimal, and every proper subset of a minimal saturating set is
non-saturating, so nothing is lost.

Subtrees below a configurable prefix depth are independent work units,
processed by forked workers that share nothing but the immutable plane;
harvested classes merge by canonical representative, which makes the output
identical for any worker count.
"""

from __future__ import annotations

import hashlib
import heapq
import json
import logging
import multiprocessing as mp
import os
import tempfile
from dataclasses import dataclass, field as dc_field

import numpy as np

from .canonical import canonical_form, is_canonical, set_stabilizer
from .collineations import PGAMMAL, PGL, VARIANTS, group_order
from .field import FieldSpec, build_field, prime_power
from .groups import fingerprint, label
from .plane import ProjectivePlane, as_indices, build_plane
from .saturation import CoverageState, is_arc

log = logging.getLogger(__name__)

STAB_LABEL_CAP = 20000  # above this we do not materialize stabilizer elements


def default_variant(q: int) -> str:
    _, h = prime_power(q)
    return PGAMMAL if h > 1 else PGL


@dataclass
class SearchConfig:
    q: int
    modulus: tuple[int, ...] | None = None
    k_min: int = 4
    k_max: int | None = None  # defaults to q + 2
    seed_size: int | None = None  # defaults to min(6, k_min)
    prefix_depth: int | None = None  # defaults to seed_size
    variant: str | None = None  # defaults by field degree
    workers: int = 1
    spill_cap: int = 500_000
    checkpoint: str | None = None
    resume: bool = False

    def resolved(self) -> "SearchConfig":
        q = self.q
        p, h = prime_power(q)
        k_max = q + 2 if self.k_max is None else self.k_max
        k_min = self.k_min
        seed = self.seed_size if self.seed_size is not None else min(6, k_min)
        prefix = self.prefix_depth if self.prefix_depth is not None else seed
        variant = self.variant or default_variant(q)
        cfg = SearchConfig(
            q=q, modulus=tuple(self.modulus) if self.modulus else None,
            k_min=k_min, k_max=k_max, seed_size=seed, prefix_depth=prefix,
            variant=variant, workers=max(1, self.workers),
            spill_cap=self.spill_cap, checkpoint=self.checkpoint,
            resume=self.resume)
        if variant not in VARIANTS:
            raise ValueError(f"unknown variant {variant!r}")
        if not 4 <= seed <= k_min <= k_max <= q + 2:
            raise ValueError(
                f"need 4 <= seed_size <= k_min <= k_max <= q+2, "
                f"got seed={seed}, k_min={k_min}, k_max={k_max}, q={q}")
        if prefix < seed:
            raise ValueError("prefix_depth must be at least seed_size")
        return cfg

    def to_dict(self) -> dict:
        return {
            "q": self.q, "modulus": list(self.modulus) if self.modulus else None,
            "k_min": self.k_min, "k_max": self.k_max, "seed_size": self.seed_size,
            "prefix_depth": self.prefix_depth, "variant": self.variant,
            "workers": self.workers, "spill_cap": self.spill_cap,
        }

    @staticmethod
    def from_dict(d: dict) -> "SearchConfig":
        cfg = SearchConfig(
            q=d["q"], modulus=tuple(d["modulus"]) if d.get("modulus") else None,
            k_min=d.get("k_min", 4), k_max=d.get("k_max"),
            seed_size=d.get("seed_size"), prefix_depth=d.get("prefix_depth"),
            variant=d.get("variant"), workers=d.get("workers", 1),
            spill_cap=d.get("spill_cap", 500_000))
        return cfg

    def search_hash(self) -> str:
        """Identity of the search itself; worker count does not affect output."""
        payload = {
            "q": self.q, "modulus": list(self.modulus) if self.modulus else None,
            "k_min": self.k_min, "k_max": self.k_max,
            "seed_size": self.seed_size, "prefix_depth": self.prefix_depth,
            "variant": self.variant,
        }
        return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()[:16]


@dataclass(frozen=True)
class ClassRecord:
    points: tuple[int, ...]  # canonical representative, natural indices, sorted
    size: int
    stab_order_pgl: int
    stab_order_pgammal: int
    group_label: str
    is_complete_arc: bool
    contains_frame: bool

    def to_dict(self) -> dict:
        return {
            "points": list(self.points), "size": self.size,
            "stab_pgl": self.stab_order_pgl, "stab_pgammal": self.stab_order_pgammal,
            "group_label": self.group_label,
            "complete_arc": self.is_complete_arc,
            "contains_frame": self.contains_frame,
        }

    @staticmethod
    def from_dict(d: dict) -> "ClassRecord":
        return ClassRecord(
            points=tuple(d["points"]), size=d["size"],
            stab_order_pgl=d["stab_pgl"], stab_order_pgammal=d["stab_pgammal"],
            group_label=d["group_label"], is_complete_arc=d["complete_arc"],
            contains_frame=d["contains_frame"])


def plane_for_config(cfg: SearchConfig) -> ProjectivePlane:
    return build_plane(build_field(FieldSpec.from_order(cfg.q, cfg.modulus)))


# -- harvesting -----------------------------------------------------------

def make_class_record(plane: ProjectivePlane, canon: tuple[int, ...],
                      variant: str) -> ClassRecord:
    """Stabilizer orders, group label and flags for one canonical representative."""
    _, order_pgl, order_pgammal, elements = set_stabilizer(plane, canon, variant)
    order = order_pgl if variant == PGL else order_pgammal
    if order != len(elements) and variant == PGAMMAL:
        raise RuntimeError("stabilizer element list inconsistent with its order")
    if 1 <= order <= STAB_LABEL_CAP:
        name = label(fingerprint(plane, elements))
    else:
        name = f"G{order}"
    arc = is_arc(plane, canon)
    return ClassRecord(
        points=canon, size=len(canon),
        stab_order_pgl=order_pgl, stab_order_pgammal=order_pgammal,
        group_label=name, is_complete_arc=arc, contains_frame=True)


class _Searcher:
    """One in-process search over a plane; used by the driver and by workers."""

    def __init__(self, plane: ProjectivePlane, cfg: SearchConfig):
        self.plane = plane
        self.cfg = cfg
        self.nat2sig = plane.nat2sig
        self.sig2nat = plane.sig2nat
        self.n = plane.n_points
        self.found: dict[tuple[int, ...], ClassRecord] = {}
        self.nodes_visited = 0

    def root(self) -> list[int]:
        return [int(self.sig2nat[s]) for s in range(4)]

    def harvest(self, pts: list[int]):
        cfg = self.cfg
        if not cfg.k_min <= len(pts) <= cfg.k_max:
            return
        canon = canonical_form(self.plane, pts, cfg.variant)
        if canon in self.found:
            return
        self.found[canon] = make_class_record(self.plane, canon, cfg.variant)

    def minimal_in_place(self, cov: CoverageState, pts: list[int]) -> bool:
        for x in pts:
            cov.remove_point(x)
            sat = cov.is_saturating()
            cov.add_point(x)
            if sat:
                return False
        return True

    def visit_children(self, pts: list[int], sig_max: int, cov: CoverageState,
                       recurse, collect=None):
        """Shared child loop: harvest saturating children, recurse or collect others."""
        cfg = self.cfg
        size_child = len(pts) + 1
        for sig_x in range(sig_max + 1, self.n):
            x = int(self.sig2nat[sig_x])
            cov.add_point(x)
            pts.append(x)
            self.nodes_visited += 1
            if cov.is_saturating():
                if cfg.k_min <= size_child <= cfg.k_max and self.minimal_in_place(cov, pts):
                    self.harvest(pts)
            elif size_child < cfg.k_max and is_canonical(self.plane, pts, cfg.variant):
                if collect is not None:
                    collect(list(pts), sig_x)
                else:
                    recurse(pts, sig_x, cov)
            pts.pop()
            cov.remove_point(x)

    def dfs(self, pts: list[int], sig_max: int, cov: CoverageState):
        self.visit_children(pts, sig_max, cov, self.dfs)

    def run_subtree(self, unit: tuple[int, ...]):
        """Full depth-first search below one prefix node."""
        pts = list(unit)
        if len(pts) >= self.cfg.k_max:
            return
        cov = CoverageState(self.plane, pts)
        sig_max = max(int(self.nat2sig[p]) for p in pts)
        self.dfs(pts, sig_max, cov)

    def expand_prefixes(self):
        """Breadth-first pass from the root: harvests shallow classes and
        returns the prefix nodes whose subtrees remain."""
        cfg = self.cfg
        root = self.root()
        cov = CoverageState(self.plane, root)
        if cov.is_saturating():
            # only tiny planes: the frame itself saturates
            if self.minimal_in_place(cov, root):
                self.harvest(root)
            return []
        depth = max(4, min(cfg.prefix_depth, cfg.k_max - 1))
        level: list[tuple[list[int], int]] = [(root, 3)]
        for size in range(4, depth):
            nxt: list[tuple[list[int], int]] = []
            for pts, sig_max in level:
                cov = CoverageState(self.plane, pts)
                self.visit_children(pts, sig_max, cov, None,
                                    collect=lambda child, s: nxt.append((child, s)))
            level = nxt
        return [tuple(pts) for pts, _ in level]


# -- disk-backed harvest store -------------------------------------------

class HarvestStore:
    """Class records keyed by canonical representative; spills sorted runs
    to disk when the in-memory map exceeds the configured cap."""

    def __init__(self, cap: int):
        self.cap = max(1, cap)
        self.mem: dict[tuple[int, ...], dict] = {}
        self.runs: list[str] = []
        self._tmpdir = None

    def add(self, key: tuple[int, ...], record: dict):
        if key not in self.mem:
            self.mem[key] = record
            if len(self.mem) >= self.cap:
                self._flush()

    def _flush(self):
        if self._tmpdir is None:
            self._tmpdir = tempfile.mkdtemp(prefix="pgsat-harvest-")
        path = os.path.join(self._tmpdir, f"run-{len(self.runs):05d}.jsonl")
        with open(path, "w") as fh:
            for key in sorted(self.mem):
                fh.write(json.dumps([list(key), self.mem[key]]) + "\n")
        self.runs.append(path)
        self.mem = {}

    def finalize(self) -> list[dict]:
        def read_run(path):
            with open(path) as fh:
                for line in fh:
                    key, rec = json.loads(line)
                    yield tuple(key), rec

        streams = [read_run(p) for p in self.runs]
        streams.append(iter(sorted(self.mem.items())))
        out = []
        last = None
        for key, rec in heapq.merge(*streams):
            if key != last:
                out.append(rec)
                last = key
        for p in self.runs:
            os.unlink(p)
        if self._tmpdir is not None:
            os.rmdir(self._tmpdir)
        return out


# -- parallel driver ------------------------------------------------------

_worker_state: dict = {}


def _worker_init(cfg_dict: dict):
    cfg = SearchConfig.from_dict(cfg_dict).resolved()
    _worker_state["cfg"] = cfg
    _worker_state["plane"] = plane_for_config(cfg)


def _worker_run(unit):
    cfg = _worker_state["cfg"]
    searcher = _Searcher(_worker_state["plane"], cfg)
    searcher.run_subtree(tuple(unit))
    records = [(list(k), r.to_dict()) for k, r in sorted(searcher.found.items())]
    return list(unit), records, searcher.nodes_visited


class CheckpointError(RuntimeError):
    pass


def _load_checkpoint(path: str, search_hash: str):
    done: dict[tuple[int, ...], list] = {}
    if not os.path.exists(path):
        raise CheckpointError(f"checkpoint file {path} does not exist")
    with open(path) as fh:
        header = json.loads(fh.readline())
        if header.get("search_hash") != search_hash:
            raise CheckpointError(
                f"checkpoint {path} belongs to a different search "
                f"(hash {header.get('search_hash')} != {search_hash})")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            entry = json.loads(line)
            done[tuple(entry["unit"])] = entry["records"]
    return done


def classify(plane: ProjectivePlane, cfg: SearchConfig,
             progress=None) -> list[ClassRecord]:
    """One ClassRecord per equivalence class of minimal 1-saturating set
    containing a frame, for every size in [k_min, k_max]."""
    cfg = cfg.resolved()
    if plane.q != cfg.q:
        raise ValueError("plane and config disagree on q")

    searcher = _Searcher(plane, cfg)
    units = searcher.expand_prefixes()
    store = HarvestStore(cfg.spill_cap)
    for key, rec in searcher.found.items():
        store.add(key, rec.to_dict())

    done_units: dict[tuple[int, ...], list] = {}
    ckpt_fh = None
    if cfg.checkpoint:
        if cfg.resume:
            done_units = _load_checkpoint(cfg.checkpoint, cfg.search_hash())
            for recs in done_units.values():
                for key, rec in recs:
                    store.add(tuple(key), rec)
            ckpt_fh = open(cfg.checkpoint, "a")
        else:
            ckpt_fh = open(cfg.checkpoint, "w")
            ckpt_fh.write(json.dumps({"search_hash": cfg.search_hash(),
                                      "config": cfg.to_dict()}) + "\n")
            ckpt_fh.flush()

    todo = [u for u in units if tuple(u) not in done_units]
    total = len(units)
    completed = total - len(todo)
    log.info("classify q=%d k=[%d,%d] variant=%s: %d prefix units (%d already done)",
             cfg.q, cfg.k_min, cfg.k_max, cfg.variant, total, completed)

    def account(unit, records, visited):
        nonlocal completed
        for key, rec in records:
            store.add(tuple(key), rec)
        if ckpt_fh is not None:
            ckpt_fh.write(json.dumps({"unit": list(unit), "records": records}) + "\n")
            ckpt_fh.flush()
        completed += 1
        if progress is not None:
            progress(completed, total)

    try:
        if cfg.workers == 1 or len(todo) <= 1:
            for unit in todo:
                sub = _Searcher(plane, cfg)
                sub.run_subtree(unit)
                account(unit, [(list(k), r.to_dict()) for k, r in sorted(sub.found.items())],
                        sub.nodes_visited)
        else:
            ctx = mp.get_context("fork")
            with ctx.Pool(cfg.workers, initializer=_worker_init,
                          initargs=(cfg.to_dict(),)) as pool:
                for unit, records, visited in pool.imap_unordered(
                        _worker_run, todo, chunksize=1):
                    account(unit, records, visited)
    finally:
        if ckpt_fh is not None:
            ckpt_fh.close()

    records = [ClassRecord.from_dict(r) for r in store.finalize()]
    records.sort(key=lambda r: (r.size, r.points))
    return records


# -- the exceptional frame-free class ------------------------------------

def line_point_set(plane: ProjectivePlane) -> tuple[int, ...]:
    """One full line plus one external point, deterministically chosen."""
    line_pts = [int(p) for p in plane.points_on_line[0]]
    external = next(i for i in range(plane.n_points) if i not in set(line_pts))
    return tuple(sorted(line_pts + [external]))


def line_point_stab_orders(q: int, h: int) -> tuple[int, int]:
    """|PGL(3,q)| / (q^2 (q^2+q+1)) simplifies to q(q-1)(q^2-1); semilinear is h times that."""
    pgl = q * (q - 1) * (q * q - 1)
    return pgl, h * pgl


def count_line_point_stabilizer(plane: ProjectivePlane) -> tuple[int, int]:
    """Direct stabilizer count for the line-plus-point set.

    Any collineation fixing the set must fix the line setwise and the point,
    so it is pinned by the images of two line points and one generic point.
    All such frame images are enumerated and each induced map is tested on
    the whole set; no closed formula is consulted.
    """
    from .canonical import (_compare_rows, adjugate_batch, apply_batch,
                            frame_matrices, matmul_batch)

    f = plane.field
    q = plane.q
    idx = np.array(line_point_set(plane), dtype=np.int32)
    target = np.sort(plane.nat2sig[idx])

    line_pts = plane.points_on_line[0].astype(np.int32)
    p_idx = 0
    a_idx, b_idx = int(line_pts[0]), int(line_pts[1])
    on0 = plane.on_line[0]

    def off_lines_mask(t1, t2):
        m1 = plane.on_line[plane.line_through[t1, p_idx]]
        m2 = plane.on_line[plane.line_through[t2, p_idx]]
        return ~(on0 | m1 | m2)

    x_idx = int(np.where(off_lines_mask(a_idx, b_idx))[0][0])
    src = np.array([a_idx, b_idx, p_idx, x_idx], dtype=np.int32)

    # candidate images: A', B' on the line, P fixed, X' completing a frame
    dst_list = []
    for a2 in line_pts:
        for b2 in line_pts:
            if a2 == b2:
                continue
            xs = np.where(off_lines_mask(int(a2), int(b2)))[0]
            block = np.empty((len(xs), 4), dtype=np.int32)
            block[:, 0] = a2
            block[:, 1] = b2
            block[:, 2] = p_idx
            block[:, 3] = xs
            dst_list.append(block)
    dst = np.concatenate(dst_list, axis=0)

    count_pgl = 0
    count_all = 0
    chunk = 8192
    for e in range(f.h):
        src_coords = np.take(f.frob32[e], plane.points32[src])[None, :, :]
        a_src = adjugate_batch(f, q, frame_matrices(f, q, src_coords))
        set_coords = np.take(f.frob32[e], plane.points32[idx])[None, :, :]
        for lo in range(0, len(dst), chunk):
            block = dst[lo:lo + chunk]
            dst_mats = frame_matrices(f, q, plane.points32[block])
            mats = matmul_batch(f, q, dst_mats, np.broadcast_to(a_src, dst_mats.shape))
            nat = apply_batch(plane, mats, set_coords)
            rows = np.sort(np.take(plane.nat2sig, nat), axis=1)
            ties = int((_compare_rows(rows, target) == 0).sum())
            if e == 0:
                count_pgl += ties
            count_all += ties
    return count_pgl, count_all


def line_plus_point_record(plane: ProjectivePlane, variant: str | None = None,
                           verify: bool = True) -> ClassRecord:
    """The unique frame-free class: a whole line plus an external point."""
    q = plane.q
    h = plane.field.h
    variant = variant or default_variant(q)
    pts = line_point_set(plane)
    pgl, pgammal = line_point_stab_orders(q, h)
    if verify:
        counted_pgl, counted_all = count_line_point_stabilizer(plane)
        if (counted_pgl, counted_all) != (pgl, pgammal):
            raise RuntimeError(
                f"line-plus-point stabilizer count ({counted_pgl}, {counted_all}) "
                f"disagrees with the closed formula ({pgl}, {pgammal})")
    order = pgl if variant == PGL else pgammal
    if order < 16:
        # only tiny planes land here; identify the group honestly
        elements = _line_point_elements(plane)
        name = label(fingerprint(plane, elements))
    else:
        name = f"G{order}"
    return ClassRecord(points=pts, size=len(pts), stab_order_pgl=pgl,
                       stab_order_pgammal=pgammal, group_label=name,
                       is_complete_arc=False, contains_frame=False)


def _line_point_elements(plane: ProjectivePlane):
    """Materialized stabilizer elements of the line-plus-point set (small q only)."""
    from .bruteforce import enumerate_projectivity_perms
    from .collineations import Collineation
    from itertools import product

    f = plane.field
    pts = set(line_point_set(plane))
    elements = []
    for flat in product(range(f.q), repeat=9):
        lead = next((v for v in flat if v != 0), 0)
        if lead != 1:
            continue
        rows = (flat[0:3], flat[3:6], flat[6:9])
        from .collineations import mat_det, point_permutation
        if mat_det(f, rows) == 0:
            continue
        for e in range(f.h):
            g = Collineation(rows, e)
            perm = point_permutation(plane, g)
            if {int(perm[i]) for i in pts} == pts:
                elements.append(g)
    return elements


def verify_class_counts(plane: ProjectivePlane, records: list[ClassRecord],
                        variant: str, labeled_counts: dict[int, int]) -> bool:
    """Orbit-stabilizer cross-check: sum of |G|/stab per size must equal the
    independently counted number of labeled minimal saturating sets."""
    g_order = group_order(plane.q, variant, plane.field.h)
    by_size: dict[int, int] = {}
    for r in records:
        stab = r.stab_order_pgl if variant == PGL else r.stab_order_pgammal
        if g_order % stab != 0:
            return False
        by_size[r.size] = by_size.get(r.size, 0) + g_order // stab
    sizes = set(by_size) | {k for k, v in labeled_counts.items() if v}
    return all(by_size.get(k, 0) == labeled_counts.get(k, 0) for k in sizes)
