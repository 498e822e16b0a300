"""Arithmetic for GF(p^n) with tabulated operations.

Field elements are indices 0..q-1 encoding coefficient vectors in base p,
least significant coefficient first, reduced modulo a fixed monic
irreducible.  The moduli below are pinned so that element indexing is
reproducible across runs; q = p^n up to 81 is covered and larger fields can
supply their own modulus.
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from .errors import PreconditionError

# Fixed monic irreducibles, coefficient lists low degree first (constant, x, ...).
# Each is verified at construction time, so a typo here cannot pass silently.
IRREDUCIBLE_MODULI: dict[tuple[int, int], tuple[int, ...]] = {
    (2, 2): (1, 1, 1),          # t^2 + t + 1
    (2, 3): (1, 1, 0, 1),       # t^3 + t + 1
    (2, 4): (1, 1, 0, 0, 1),    # t^4 + t + 1
    (2, 5): (1, 0, 1, 0, 0, 1),  # t^5 + t^2 + 1
    (2, 6): (1, 1, 0, 0, 0, 0, 1),  # t^6 + t + 1
    (3, 2): (2, 2, 1),          # t^2 + 2t + 2
    (3, 3): (1, 2, 0, 1),       # t^3 + 2t + 1
    (3, 4): (2, 0, 0, 2, 1),    # t^4 + 2t^3 + 2
    (5, 2): (2, 4, 1),          # t^2 + 4t + 2
    (7, 2): (3, 6, 1),          # t^2 + 6t + 3
}


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


def _poly_mod(coeffs: list[int], modulus: Sequence[int], p: int) -> list[int]:
    """Reduce a coefficient list modulo a monic modulus over Z_p."""
    deg_m = len(modulus) - 1
    out = [c % p for c in coeffs]
    for i in range(len(out) - 1, deg_m - 1, -1):
        c = out[i]
        if c:
            for j in range(deg_m + 1):
                out[i - deg_m + j] = (out[i - deg_m + j] - c * modulus[j]) % p
    out = out[:deg_m]
    out += [0] * (deg_m - len(out))
    return out


def _poly_mul(a: Sequence[int], b: Sequence[int], p: int) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, ca in enumerate(a):
        if ca:
            for j, cb in enumerate(b):
                out[i + j] = (out[i + j] + ca * cb) % p
    return out


def _check_irreducible(modulus: Sequence[int], p: int) -> bool:
    """Trial division by all monic polynomials of degree up to n//2."""
    n = len(modulus) - 1
    if n == 1:
        return True
    for d in range(1, n // 2 + 1):
        for code in range(p**d):
            div = []
            c = code
            for _ in range(d):
                div.append(c % p)
                c //= p
            div.append(1)  # monic
            if not any(_poly_mod(list(modulus), div, p)):
                return False
    return True


class GF:
    """The field GF(p^n) with add/mul/inverse/power tables and a generator."""

    def __init__(self, p: int, n: int = 1, modulus: Optional[Sequence[int]] = None):
        if not is_prime(p):
            raise PreconditionError(f"field characteristic {p} is not prime")
        if n < 1:
            raise PreconditionError("field degree must be positive")
        if n == 1:
            modulus = (0, 1)  # plain Z_p, reduction is mod p
        elif modulus is None:
            try:
                modulus = IRREDUCIBLE_MODULI[(p, n)]
            except KeyError:
                raise PreconditionError(
                    f"no built-in modulus for GF({p}^{n}); supply one explicitly"
                ) from None
        modulus = tuple(int(c) % p for c in modulus[:-1]) + (1,)
        if len(modulus) != n + 1:
            raise PreconditionError(f"modulus degree must be {n}")
        if n > 1 and not _check_irreducible(modulus, p):
            raise PreconditionError(f"modulus {modulus} is reducible over Z_{p}")
        self.p = p
        self.n = n
        self.q = p**n
        self.modulus = modulus
        self._build_tables()
        self.generator = self._find_generator()

    # index <-> coefficient vector, least significant first

    def coeffs(self, idx: int) -> tuple[int, ...]:
        out = []
        for _ in range(self.n):
            out.append(idx % self.p)
            idx //= self.p
        return tuple(out)

    def index(self, coeffs: Sequence[int]) -> int:
        out = 0
        for c in reversed(list(coeffs)):
            out = out * self.p + (c % self.p)
        return out

    def _build_tables(self):
        q, p = self.q, self.p
        vecs = [list(self.coeffs(i)) for i in range(q)]
        add = np.zeros((q, q), dtype=np.int64)
        mul = np.zeros((q, q), dtype=np.int64)
        for i in range(q):
            for j in range(q):
                add[i, j] = self.index([(a + b) % p for a, b in zip(vecs[i], vecs[j])])
                mul[i, j] = self.index(_poly_mod(_poly_mul(vecs[i], vecs[j], p), self.modulus, p))
        self.add_table = add
        self.mul_table = mul
        neg = np.zeros(q, dtype=np.int64)
        inv = np.zeros(q, dtype=np.int64)
        for i in range(q):
            neg[i] = self.index([(-c) % p for c in vecs[i]])
            if i:
                hits = np.flatnonzero(mul[i] == 1)
                if len(hits) != 1:
                    raise PreconditionError(f"modulus {self.modulus} is not a field modulus")
                inv[i] = hits[0]
        self.neg_table = neg
        self.inv_table = inv
        # Frobenius x -> x^p, used by the coordinatewise power automorphism
        frob = np.arange(q, dtype=np.int64)
        for _ in range(p - 1):
            frob = mul[frob, np.arange(q)]
        self.frobenius = frob

    def _find_generator(self) -> int:
        for g in range(1, self.q):
            if self.element_order(g) == self.q - 1:
                return g
        raise PreconditionError("multiplicative group has no generator (not a field)")

    def element_order(self, x: int) -> int:
        if x == 0:
            raise PreconditionError("0 has no multiplicative order")
        k, cur = 1, x
        while cur != 1:
            cur = int(self.mul_table[cur, x])
            k += 1
        return k

    def add(self, a, b):
        return self.add_table[a, b]

    def mul(self, a, b):
        return self.mul_table[a, b]

    def neg(self, a):
        return self.neg_table[a]

    def inverse(self, a):
        if np.any(np.asarray(a) == 0):
            raise PreconditionError("0 is not invertible")
        return self.inv_table[a]

    def pow(self, a: int, k: int) -> int:
        out, base = 1, int(a)
        k = int(k)
        if k < 0:
            base = int(self.inverse(base))
            k = -k
        while k:
            if k & 1:
                out = int(self.mul_table[out, base])
            base = int(self.mul_table[base, base])
            k >>= 1
        return out

    def element(self, idx: int) -> "FieldElement":
        return FieldElement(self, int(idx))

    def __repr__(self) -> str:
        return f"GF({self.p}^{self.n})" if self.n > 1 else f"GF({self.p})"


class FieldElement:
    """A field element bound to its GF instance; supports + - * / and powers."""

    __slots__ = ("field", "idx")

    def __init__(self, field: GF, idx: int):
        self.field = field
        self.idx = idx % field.q

    @property
    def coeffs(self) -> tuple[int, ...]:
        return self.field.coeffs(self.idx)

    def _lift(self, other) -> "FieldElement":
        if isinstance(other, FieldElement):
            if other.field is not self.field:
                raise PreconditionError("mixed-field arithmetic")
            return other
        return FieldElement(self.field, int(other))

    def __add__(self, other):
        o = self._lift(other)
        return FieldElement(self.field, int(self.field.add_table[self.idx, o.idx]))

    def __neg__(self):
        return FieldElement(self.field, int(self.field.neg_table[self.idx]))

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __mul__(self, other):
        o = self._lift(other)
        return FieldElement(self.field, int(self.field.mul_table[self.idx, o.idx]))

    def __truediv__(self, other):
        o = self._lift(other)
        return self * FieldElement(self.field, int(self.field.inverse(o.idx)))

    def __pow__(self, k: int):
        return FieldElement(self.field, self.field.pow(self.idx, k))

    def __eq__(self, other):
        return isinstance(other, FieldElement) and other.field is self.field and other.idx == self.idx

    def __hash__(self):
        return hash((id(self.field), self.idx))

    def __repr__(self):
        terms = []
        for k, c in enumerate(self.coeffs):
            if not c:
                continue
            if k == 0:
                terms.append(str(c))
            else:
                base = "t" if k == 1 else f"t^{k}"
                terms.append(base if c == 1 else f"{c}{base}")
        return " + ".join(terms) if terms else "0"


def make_field(p: int, n: int = 1, modulus: Optional[Sequence[int]] = None) -> GF:
    """Field handle with add/mul/inv/pow and a distinguished unit-group generator."""
    return GF(p, n, modulus)
