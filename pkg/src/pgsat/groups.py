"""Structure labels for stabilizer groups given their elements.

Groups arrive as lists of collineations and are analyzed through their point
permutations: composition is a single numpy gather, so even the order-10^4
stabilizers of the exceptional sets fingerprint in well under a second.

Labeling convention: abelian groups are named by invariant factors
(Z4, Z2xZ4, ...); nonabelian groups of order below 16 get their classical
names (S3, D4, D5, D6, Q4 quaternion, Q6 dicyclic), the nonabelian group of
order 21 is Z7:Z3, and everything else falls back to G<order>.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd

import numpy as np

from .collineations import Collineation, point_permutation
from .plane import ProjectivePlane


@dataclass(frozen=True)
class GroupFingerprint:
    order: int
    is_abelian: bool
    element_order_histogram: tuple[tuple[int, int], ...]  # (order, count), sorted
    abelian_invariants: tuple[int, ...] | None  # d1 | d2 | ... ascending
    center_order: int

    def histogram_dict(self) -> dict[int, int]:
        return dict(self.element_order_histogram)


def _perm_order(perm: np.ndarray) -> int:
    """Order of a permutation via lcm of cycle lengths."""
    n = len(perm)
    seen = np.zeros(n, dtype=bool)
    result = 1
    for start in range(n):
        if seen[start]:
            continue
        length = 0
        j = start
        while not seen[j]:
            seen[j] = True
            j = int(perm[j])
            length += 1
        result = result * length // gcd(result, length)
    return result


class _PermGroup:
    """Finite permutation group given as an explicit element list."""

    def __init__(self, perms: np.ndarray):
        self.perms = perms
        self.index = {p.tobytes(): i for i, p in enumerate(perms)}
        if len(self.index) != len(perms):
            raise ValueError("duplicate elements in group input")
        n = perms.shape[1]
        ident = np.arange(n, dtype=perms.dtype)
        if ident.tobytes() not in self.index:
            raise ValueError("input does not contain the identity")
        self.identity_idx = self.index[ident.tobytes()]

    def compose_idx(self, i: int, j: int) -> int | None:
        p = self.perms[i][self.perms[j]]
        return self.index.get(p.tobytes())

    def generators(self) -> list[int]:
        """Greedy generating set; verifies the input is closed on the way."""
        gens: list[int] = []
        reached = {self.identity_idx}
        frontier = [self.identity_idx]
        for cand in range(len(self.perms)):
            if cand in reached:
                continue
            gens.append(cand)
            # close the subgroup generated so far
            frontier = list(reached)
            while frontier:
                cur = frontier.pop()
                for g in gens:
                    nxt = self.compose_idx(g, cur)
                    if nxt is None:
                        raise ValueError("input elements are not closed under composition")
                    if nxt not in reached:
                        reached.add(nxt)
                        frontier.append(nxt)
        if len(reached) != len(self.perms):
            raise ValueError("input elements are not closed under composition")
        return gens


def _prime_factors(n: int) -> list[int]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def _abelian_invariants(order: int, hist: dict[int, int]) -> tuple[int, ...]:
    """Invariant factors of an abelian group from its element-order histogram.

    For each prime p, #(elements whose order divides p^k) equals
    p^(sum_i min(k, l_i)) for the p-primary partition (l_i); the counts
    therefore determine every l_i, and the invariant factors are assembled by
    pairing the largest prime powers across primes.
    """
    factors_by_prime: dict[int, list[int]] = {}
    for p in _prime_factors(order):
        # n_k = #elements of order p^j with j <= k
        m_ks: list[int] = []  # m_k = #parts >= k
        prev = 1
        k = 1
        while True:
            n_k = sum(c for o, c in hist.items() if _is_power_dividing(o, p, k))
            if n_k == prev:
                break
            ratio = n_k // prev
            mk = 0
            while p ** (mk + 1) <= ratio:
                mk += 1
            m_ks.append(mk)
            prev = n_k
            k += 1
        parts: list[int] = [0] * (m_ks[0] if m_ks else 0)
        for kk, count_ge_k in enumerate(m_ks, start=1):
            for i in range(count_ge_k):
                parts[i] = kk
        factors_by_prime[p] = sorted((p ** e for e in parts), reverse=True)

    width = max((len(v) for v in factors_by_prime.values()), default=0)
    invariants = []
    for i in range(width):
        d_i = 1
        for fs in factors_by_prime.values():
            if i < len(fs):
                d_i *= fs[i]
        invariants.append(d_i)
    invariants.sort()
    return tuple(invariants)


def _is_power_dividing(o: int, p: int, k: int) -> bool:
    """True iff o divides p^k, i.e. o is a power of p no larger than p^k."""
    if o > p ** k:
        return False
    while o % p == 0:
        o //= p
    return o == 1


def fingerprint_perms(perms: np.ndarray) -> GroupFingerprint:
    group = _PermGroup(perms)
    gens = group.generators()
    order = len(perms)

    elem_orders = [_perm_order(perms[i]) for i in range(order)]
    hist: dict[int, int] = {}
    for o in elem_orders:
        hist[o] = hist.get(o, 0) + 1

    def commutes(i, j):
        return np.array_equal(perms[i][perms[j]], perms[j][perms[i]])

    is_abelian = all(commutes(a, b) for ai, a in enumerate(gens)
                     for b in gens[ai + 1:])
    center = sum(1 for i in range(order) if all(commutes(i, g) for g in gens))

    invariants = _abelian_invariants(order, hist) if is_abelian else None
    return GroupFingerprint(
        order=order,
        is_abelian=is_abelian,
        element_order_histogram=tuple(sorted(hist.items())),
        abelian_invariants=invariants,
        center_order=center,
    )


def fingerprint(plane: ProjectivePlane, elements: list[Collineation]) -> GroupFingerprint:
    """Fingerprint a stabilizer given its collineation elements (closure verified)."""
    perms = np.array([point_permutation(plane, g) for g in elements], dtype=np.int32)
    return fingerprint_perms(perms)


def label(fp: GroupFingerprint) -> str:
    """Symbolic structure name; G<order> when nothing sharper is warranted."""
    n = fp.order
    if n == 1:
        return "Z1"
    if fp.is_abelian:
        return "x".join(f"Z{d}" for d in fp.abelian_invariants)
    if n == 6:
        return "S3"
    if n == 21:
        return "Z7:Z3"
    hist = fp.histogram_dict()
    if n < 16 and n % 2 == 0:
        half = n // 2
        involutions = hist.get(2, 0)
        dihedral_involutions = half + (1 if half % 2 == 0 else 0)
        if hist.get(half, 0) > 0 and involutions == dihedral_involutions:
            return f"D{half}"
        if n == 8 and involutions == 1:
            return "Q4"
        if n == 12 and involutions == 1:
            return "Q6"
    return f"G{n}"


def label_stabilizer(plane: ProjectivePlane, elements: list[Collineation],
                     verbose: bool = False) -> str:
    fp = fingerprint(plane, elements)
    name = label(fp)
    if verbose:
        hist = ",".join(f"{o}:{c}" for o, c in fp.element_order_histogram)
        return f"{name} [orders {hist}]"
    return name
