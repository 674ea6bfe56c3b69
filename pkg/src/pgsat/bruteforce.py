"""Brute-force oracles for desk-scale planes (q <= 4).

Everything here recomputes classification facts from first principles with
no shared machinery beyond the incidence tables: saturation by the
definition loops, equivalence classes by generator closure over labeled
sets, stabilizer orders by orbit counting.  The classifier is validated
against these outputs.
"""

from __future__ import annotations

from itertools import combinations, product

import numpy as np

from .collineations import (PGAMMAL, Collineation, group_order,
                            point_permutation)
from .plane import ProjectivePlane


# -- definition-level predicates (independent of CoverageState) ---------

def naive_is_saturating(m: ProjectivePlane, idx) -> bool:
    idx = sorted(idx)
    if len(idx) < 2:
        return False
    covered = set(idx)
    for a, b in combinations(idx, 2):
        covered.update(int(p) for p in m.points_on_line[m.line_through[a, b]])
    return len(covered) == m.n_points


def naive_is_minimal(m: ProjectivePlane, idx) -> bool:
    idx = sorted(idx)
    if not naive_is_saturating(m, idx):
        return False
    for drop in idx:
        if naive_is_saturating(m, [i for i in idx if i != drop]):
            return False
    return True


def enumerate_minimal_saturating(m: ProjectivePlane, max_size: int,
                                 min_size: int = 2) -> dict[int, list[tuple[int, ...]]]:
    """Every labeled minimal 1-saturating set of size min_size..max_size.

    Bit-mask coverage keeps this tractable up to PG(2,4) and size q+2.
    """
    n = m.n_points
    full = m.full_mask
    masks = m.line_mask
    lt = m.line_through
    found: dict[int, list[tuple[int, ...]]] = {k: [] for k in range(min_size, max_size + 1)}

    def saturating(combo) -> bool:
        cov = 0
        for i in range(len(combo)):
            a = combo[i]
            cov |= 1 << a
            for j in range(i + 1, len(combo)):
                cov |= masks[lt[a, combo[j]]]
        return cov == full

    for k in range(min_size, max_size + 1):
        for combo in combinations(range(n), k):
            if not saturating(combo):
                continue
            if any(saturating(combo[:i] + combo[i + 1:]) for i in range(k)):
                continue
            found[k].append(combo)
    return found


# -- explicit group generators and closure -------------------------------

def _gl3_generator_matrices(f) -> list[tuple[tuple[int, ...], ...]]:
    q = f.q
    gens = [
        ((1, 1, 0), (0, 1, 0), (0, 0, 1)),  # transvection
        ((0, 1, 0), (0, 0, 1), (1, 0, 0)),  # coordinate cycle
    ]
    if q > 2:
        # diag(a, 1, 1) for a generating the multiplicative group
        a = next(x for x in range(2, q) if f.element_order(x) == q - 1)
        gens.append(((a, 0, 0), (0, 1, 0), (0, 0, 1)))
    return gens


def group_generator_perms(m: ProjectivePlane, variant: str) -> list[np.ndarray]:
    """Point permutations generating PGL(3,q) or PGammaL(3,q)."""
    f = m.field
    perms = [point_permutation(m, Collineation.create(f, g))
             for g in _gl3_generator_matrices(f)]
    if variant == PGAMMAL and f.h > 1:
        frob = Collineation.create(f, ((1, 0, 0), (0, 1, 0), (0, 0, 1)), 1)
        perms.append(point_permutation(m, frob))
    return perms


def orbit_partition(sets: list[tuple[int, ...]],
                    gens: list[np.ndarray]) -> list[list[tuple[int, ...]]]:
    """Partition labeled sets into orbits under the generated group via closure."""
    index = {s: i for i, s in enumerate(sets)}
    seen = [False] * len(sets)
    orbits = []
    for start in sets:
        if seen[index[start]]:
            continue
        orbit = []
        stack = [start]
        seen[index[start]] = True
        while stack:
            cur = stack.pop()
            orbit.append(cur)
            for perm in gens:
                img = tuple(sorted(int(perm[i]) for i in cur))
                j = index.get(img)
                if j is None:
                    raise RuntimeError("orbit left the enumerated family; "
                                       "group image is not minimal saturating?")
                if not seen[j]:
                    seen[j] = True
                    stack.append(img)
        orbits.append(orbit)
    return orbits


def oracle_classification(m: ProjectivePlane, variant: str,
                          max_size: int) -> dict[int, dict]:
    """Classes, stabilizer orders and labeled counts per size, from scratch.

    Stabilizer orders come from the orbit-stabilizer identity against the
    closed-formula group order, so they are exact integers.
    """
    g_order = group_order(m.q, variant, m.field.h)
    gens = group_generator_perms(m, variant)
    labeled = enumerate_minimal_saturating(m, max_size)
    out: dict[int, dict] = {}
    for k, sets in labeled.items():
        if not sets:
            continue
        orbits = orbit_partition(sets, gens)
        stab_orders = []
        for orbit in orbits:
            if g_order % len(orbit) != 0:
                raise RuntimeError(f"orbit size {len(orbit)} does not divide {g_order}")
            stab_orders.append(g_order // len(orbit))
        out[k] = {
            "labeled": len(sets),
            "classes": len(orbits),
            "stab_orders": sorted(stab_orders),
            "representatives": [min(orbit) for orbit in orbits],
        }
    return out


def enumerate_projectivity_perms(m: ProjectivePlane) -> np.ndarray:
    """Point permutation of every element of PGL(3,q); feasible for q <= 4.

    Matrices are normalized (first nonzero entry 1) so each group element
    appears exactly once.
    """
    f = m.field
    q = f.q
    perms = []
    count = 0
    for flat in product(range(q), repeat=9):
        lead = next((v for v in flat if v != 0), 0)
        if lead != 1:
            continue
        rows = (flat[0:3], flat[3:6], flat[6:9])
        from .collineations import mat_det
        if mat_det(f, rows) == 0:
            continue
        count += 1
        perms.append(point_permutation(m, Collineation(rows, 0)))
    expected = group_order(q, "pgl", f.h)
    if count != expected:
        raise RuntimeError(f"enumerated {count} projectivities, expected {expected}")
    return np.array(perms, dtype=np.int32)
