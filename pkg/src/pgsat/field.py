"""Lookup-table arithmetic for GF(q), q = p^h <= 32.

Every element is a dense integer in [0, q) encoding the polynomial-basis
representation base p (digit i = coefficient of x^i).  All arithmetic after
construction is a table lookup, which is what the search inner loops need.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_ORDER = 32

# Standard irreducible moduli, coefficients low degree first.
DEFAULT_MODULI = {
    4: (1, 1, 1),            # x^2 + x + 1
    8: (1, 1, 0, 1),         # x^3 + x + 1
    9: (1, 0, 1),            # x^2 + 1
    16: (1, 1, 0, 0, 1),     # x^4 + x + 1
    25: (2, 0, 1),           # x^2 + 2
    27: (1, 2, 0, 1),        # x^3 + 2x + 1
    32: (1, 0, 1, 0, 0, 1),  # x^5 + x^2 + 1
}


class FieldError(ValueError):
    """Bad field parameters.  Carries the offending factor for a reducible modulus."""

    def __init__(self, message, factor=None):
        super().__init__(message)
        self.factor = factor


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def prime_power(q: int) -> tuple[int, int]:
    """Split q into (p, h) with p prime, q = p^h, or raise FieldError."""
    if q < 2:
        raise FieldError(f"field order must be >= 2, got {q}")
    for p in range(2, q + 1):
        if not is_prime(p):
            continue
        if q % p == 0:
            h = 0
            m = q
            while m % p == 0:
                m //= p
                h += 1
            if m != 1:
                raise FieldError(f"{q} is not a prime power")
            return p, h
    raise FieldError(f"{q} is not a prime power")


def _poly_trim(c: list[int]) -> list[int]:
    while c and c[-1] == 0:
        c.pop()
    return c


def _poly_divmod(num: list[int], den: list[int], p: int) -> tuple[list[int], list[int]]:
    """Division of coefficient lists (low degree first) over GF(p); den must be monic-scalable."""
    num = list(num)
    dd = len(den) - 1
    lead_inv = pow(den[-1], p - 2, p)
    quot = [0] * max(len(num) - dd, 0)
    while len(_poly_trim(num)) - 1 >= dd and any(num):
        shift = len(num) - 1 - dd
        factor = (num[-1] * lead_inv) % p
        quot[shift] = factor
        for i, c in enumerate(den):
            num[shift + i] = (num[shift + i] - factor * c) % p
        _poly_trim(num)
    return quot, num


def irreducibility_witness(modulus: tuple[int, ...], p: int) -> list[int] | None:
    """Return a proper monic factor of the modulus over GF(p), or None if irreducible.

    Trial division against every monic polynomial of degree 1..deg/2.
    """
    deg = len(modulus) - 1
    for d in range(1, deg // 2 + 1):
        for code in range(p ** d):
            cand = [(code // p ** i) % p for i in range(d)] + [1]
            _, rem = _poly_divmod(list(modulus), cand, p)
            if not any(rem):
                return cand
    return None


@dataclass(frozen=True)
class FieldSpec:
    """Parameters pinning one concrete construction of GF(p^h)."""

    p: int
    h: int
    q: int
    modulus: tuple[int, ...]  # low degree first, monic, degree h

    def __post_init__(self):
        if not is_prime(self.p):
            raise FieldError(f"characteristic {self.p} is not prime")
        if self.h < 1 or self.p ** self.h != self.q:
            raise FieldError(f"q={self.q} does not equal {self.p}^{self.h}")
        if self.q > MAX_ORDER:
            raise FieldError(f"q={self.q} exceeds the supported bound {MAX_ORDER}")
        if len(self.modulus) != self.h + 1:
            raise FieldError(
                f"modulus degree {len(self.modulus) - 1} != extension degree {self.h}")
        if self.modulus[-1] != 1:
            raise FieldError("modulus must be monic")
        if any(not 0 <= c < self.p for c in self.modulus):
            raise FieldError("modulus coefficients must lie in [0, p)")
        if self.h > 1:
            factor = irreducibility_witness(self.modulus, self.p)
            if factor is not None:
                raise FieldError(
                    f"modulus {list(self.modulus)} is reducible over GF({self.p}); "
                    f"factor {factor}", factor=factor)

    @staticmethod
    def from_order(q: int, modulus=None) -> "FieldSpec":
        p, h = prime_power(q)
        if modulus is None:
            # Prime fields reduce by x itself: plain value arithmetic mod p.
            modulus = (0, 1) if h == 1 else DEFAULT_MODULI[q]
        return FieldSpec(p=p, h=h, q=q, modulus=tuple(modulus))

    def to_dict(self) -> dict:
        return {"p": self.p, "h": self.h, "q": self.q, "modulus": list(self.modulus)}

    @staticmethod
    def from_dict(d: dict) -> "FieldSpec":
        return FieldSpec(p=d["p"], h=d["h"], q=d["q"], modulus=tuple(d["modulus"]))


class FieldTable:
    """Complete arithmetic tables for one GF(q).  Immutable after construction."""

    def __init__(self, spec: FieldSpec):
        self.spec = spec
        self.q = spec.q
        self.p = spec.p
        self.h = spec.h
        q, p, h = self.q, self.p, self.h

        add = np.zeros((q, q), dtype=np.int16)
        mul = np.zeros((q, q), dtype=np.int16)
        for a in range(q):
            da = self._digits(a)
            for b in range(q):
                db = self._digits(b)
                add[a, b] = self._value([(x + y) % p for x, y in zip(da, db)])
                mul[a, b] = self._value(self._polymul(da, db))
        self.add = add
        self.mul = mul
        self.sub = np.zeros((q, q), dtype=np.int16)
        self.neg = np.zeros(q, dtype=np.int16)
        for a in range(q):
            self.neg[a] = self._value([(-d) % p for d in self._digits(a)])
        for a in range(q):
            self.sub[a] = add[a, self.neg]

        inv = np.zeros(q, dtype=np.int16)
        for a in range(1, q):
            hits = np.where(mul[a] == 1)[0]
            if len(hits) != 1:
                raise FieldError(f"element {a} has {len(hits)} inverses; tables inconsistent")
            inv[a] = hits[0]
        self.inv = inv

        frob = np.zeros((h, q), dtype=np.int16)
        frob[0] = np.arange(q)
        if h > 1:
            step = np.array([self._pow(a, p) for a in range(q)], dtype=np.int16)
            for e in range(1, h):
                frob[e] = step[frob[e - 1]]
            if not np.array_equal(step[frob[h - 1]], frob[0]):
                raise FieldError("frobenius does not have order h; tables inconsistent")
        self.frob = frob

        # flat int32 copies for the batched kernels (np.take on these is much
        # faster than 2-d fancy indexing)
        self.mul_flat = self.mul.ravel().astype(np.int32)
        self.add_flat = self.add.ravel().astype(np.int32)
        self.sub_flat = self.sub.ravel().astype(np.int32)
        self.inv32 = self.inv.astype(np.int32)
        self.frob32 = self.frob.astype(np.int32)

    def _digits(self, a: int) -> list[int]:
        return [(a // self.p ** i) % self.p for i in range(self.h)]

    def _value(self, digits: list[int]) -> int:
        return sum(d * self.p ** i for i, d in enumerate(digits))

    def _polymul(self, da: list[int], db: list[int]) -> list[int]:
        p = self.p
        conv = [0] * (2 * self.h - 1)
        for i, x in enumerate(da):
            if x == 0:
                continue
            for j, y in enumerate(db):
                conv[i + j] = (conv[i + j] + x * y) % p
        # reduce modulo the defining polynomial (monic)
        mod = list(self.spec.modulus)
        for d in range(len(conv) - 1, self.h - 1, -1):
            c = conv[d]
            if c == 0:
                continue
            shift = d - self.h
            for i in range(self.h + 1):
                conv[shift + i] = (conv[shift + i] - c * mod[i]) % p
        return conv[: self.h]

    def _pow(self, a: int, e: int) -> int:
        r = 1
        for _ in range(e):
            r = int(self.mul[r, a])
        return r

    def power(self, a: int, e: int) -> int:
        """a^e by square-and-multiply on the tables (e >= 0)."""
        r, base = 1, a
        while e:
            if e & 1:
                r = int(self.mul[r, base])
            base = int(self.mul[base, base])
            e >>= 1
        return r

    def element_order(self, a: int) -> int:
        if a == 0:
            raise FieldError("0 has no multiplicative order")
        r, n = a, 1
        while r != 1:
            r = int(self.mul[r, a])
            n += 1
        return n

    def __repr__(self):
        return f"FieldTable(q={self.q}, modulus={list(self.spec.modulus)})"


def build_field(spec: FieldSpec) -> FieldTable:
    """Construct the full table set for the given field parameters."""
    return FieldTable(spec)


def field_for_order(q: int, modulus=None) -> FieldTable:
    return build_field(FieldSpec.from_order(q, modulus))


def frobenius_power(table: FieldTable, x: int, e: int) -> int:
    """x ^ (p^e) for 0 <= e < h."""
    if not 0 <= e < table.h:
        raise FieldError(f"automorphism exponent {e} outside [0, {table.h})")
    return int(table.frob[e, x])
