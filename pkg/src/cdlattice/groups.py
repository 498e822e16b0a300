"""Finite groups on indexed element domains, and subgroup-level primitives.

A group of order n lives on the index domain 0..n-1.  Each subclass knows
how to multiply indices directly from structured element labels (residue
tuples, permutations, matrix entries), vectorized over numpy arrays, so a
full n x n Cayley table is only materialized for orders up to TABLE_BOUND.
Subgroups and raw element subsets are bitmasks over the index domain (see
_bits); a Subgroup additionally carries the closure invariant.

All groups are immutable after construction and every operation here is a
pure function, so concurrent use from multiple threads is safe.  Derived
data (generators, centralizers, conjugacy classes, the subgroup oracle) is
cached on the group instance on first use.
"""

from __future__ import annotations

from typing import Iterable, Optional, Sequence

import numpy as np

from . import _bits
from .errors import CapacityError, DomainError, InternalCheckError, PreconditionError

TABLE_BOUND = 4096    # largest order for which an n x n Cayley table is kept
ORACLE_BOUND = 512    # largest order accepted by the exhaustive subgroup oracle
AUT_BOUND = 64        # largest order accepted by the automorphism search
AUT_COUNT_CAP = 20000  # give up if the automorphism list would exceed this
ASSOC_EXHAUSTIVE_BOUND = 512


class FiniteGroup:
    """Base class for an immutable finite group on element indices 0..order-1.

    Subclasses implement ``mul_arr``/``inv_arr`` (vectorized, numpy
    broadcasting semantics) plus ``label``; scalar ``mul``/``inv`` wrap them.
    """

    name: str = "G"
    order: int = 1
    identity: int = 0

    def __init__(self, name: str, order: int, identity: int = 0):
        self.name = name
        self.order = int(order)
        self.identity = int(identity)
        self._cache: dict = {}

    # -- multiplication law -------------------------------------------------

    def mul_arr(self, a, b) -> np.ndarray:
        raise NotImplementedError

    def inv_arr(self, a) -> np.ndarray:
        raise NotImplementedError

    def mul(self, a: int, b: int) -> int:
        return int(self.mul_arr(a, b))

    def inv(self, a: int) -> int:
        return int(self.inv_arr(a))

    def conj_arr(self, x, g) -> np.ndarray:
        """Conjugate x^g = g^-1 x g, elementwise."""
        return self.mul_arr(self.mul_arr(self.inv_arr(g), x), g)

    def commute_bools(self, g: int) -> np.ndarray:
        """Boolean array marking the elements that commute with g."""
        ar = np.arange(self.order)
        return np.asarray(self.mul_arr(g, ar) == self.mul_arr(ar, g))

    def commute_block(self, gs: np.ndarray) -> np.ndarray:
        """commute_bools for a batch of elements at once, one row each."""
        ar = np.arange(self.order)
        fwd = self.mul_arr(gs[:, None], ar[None, :])
        bwd = self.mul_arr(ar[None, :], gs[:, None])
        return np.asarray(fwd == bwd)

    def label(self, i: int) -> str:
        return str(i)

    # -- bookkeeping ----------------------------------------------------------

    def __len__(self) -> int:
        return self.order

    def __repr__(self) -> str:
        return f"<{self.name}: order {self.order}>"

    def check_index(self, i: int) -> int:
        i = int(i)
        if not 0 <= i < self.order:
            raise DomainError(f"element index {i} outside 0..{self.order - 1} of {self.name}")
        return i

    def _cached(self, key, make):
        try:
            return self._cache[key]
        except KeyError:
            value = make()
            self._cache[key] = value
            return value

    # -- derived data ----------------------------------------------------------

    @property
    def generators(self) -> list[int]:
        """A small generating set, chosen greedily by ascending index."""
        return self._cached("generators", lambda: _greedy_generators(self, range(self.order)))

    def element_orders(self) -> np.ndarray:
        def make():
            n = self.order
            ar = np.arange(n)
            orders = np.zeros(n, dtype=np.int64)
            cur = ar.copy()
            k = 1
            while (orders == 0).any():
                hit = (cur == self.identity) & (orders == 0)
                orders[hit] = k
                if (orders != 0).all():
                    break
                cur = np.asarray(self.mul_arr(cur, ar))
                k += 1
            return orders

        return self._cached("element_orders", make)

    def is_abelian(self) -> bool:
        def make():
            return all(self.commute_bools(g).all() for g in self.generators)

        return self._cached("is_abelian", make)

    def with_table(self) -> "FiniteGroup":
        """Equivalent TableGroup when the order permits one, else self."""
        if isinstance(self, TableGroup) or self.order > TABLE_BOUND:
            return self
        ar = np.arange(self.order)
        table = np.vstack([np.asarray(self.mul_arr(i, ar)) for i in range(self.order)])
        labels = [self.label(i) for i in range(self.order)]
        return TableGroup(table, name=self.name, labels=labels)


class TableGroup(FiniteGroup):
    """Group given by an explicit Cayley table (order capped at TABLE_BOUND)."""

    def __init__(self, table: np.ndarray, name: str = "G", labels: Optional[Sequence[str]] = None):
        table = np.asarray(table, dtype=np.int32)
        n = table.shape[0]
        if table.shape != (n, n):
            raise PreconditionError(f"Cayley table must be square, got {table.shape}")
        if n > TABLE_BOUND:
            raise CapacityError(
                f"order {n} exceeds the Cayley-table bound {TABLE_BOUND}", bound=TABLE_BOUND
            )
        ar = np.arange(n)
        ident = [i for i in range(n) if (table[i] == ar).all() and (table[:, i] == ar).all()]
        if len(ident) != 1:
            raise PreconditionError("table has no unique identity element")
        super().__init__(name, n, ident[0])
        self.table = table
        rows, cols = np.nonzero(table == self.identity)
        inv = np.full(n, -1, dtype=np.int32)
        inv[rows] = cols
        self.inv_table = inv
        self._labels = list(labels) if labels is not None else None

    def mul_arr(self, a, b):
        return self.table[a, b]

    def inv_arr(self, a):
        return self.inv_table[a]

    def commute_bools(self, g: int) -> np.ndarray:
        return self.table[g] == self.table[:, g]

    def label(self, i: int) -> str:
        return self._labels[i] if self._labels is not None else str(i)


class PermutationGroup(FiniteGroup):
    """Group of permutations of 0..degree-1, stored as image rows.

    Element indices follow the lexicographic order of the image rows, which
    is stable across runs.  Used for symmetric groups too large for a table.
    """

    def __init__(self, perms: np.ndarray, name: str = "P"):
        perms = np.asarray(perms, dtype=np.int32)
        order_keys = np.lexsort(perms.T[::-1])
        perms = perms[order_keys]
        n, self.degree = perms.shape
        self.perms = perms
        self._index = {row.tobytes(): i for i, row in enumerate(perms)}
        ident = self._index[np.arange(self.degree, dtype=np.int32).tobytes()]
        super().__init__(name, n, ident)

    def _lookup_rows(self, rows: np.ndarray) -> np.ndarray:
        idx = self._index
        return np.fromiter((idx[row.tobytes()] for row in rows), dtype=np.int64, count=len(rows))

    def mul_arr(self, a, b):
        a, b = np.broadcast_arrays(np.asarray(a), np.asarray(b))
        shape = a.shape
        af, bf = a.ravel(), b.ravel()
        rows = np.take_along_axis(self.perms[af], self.perms[bf], axis=1)
        out = self._lookup_rows(rows).reshape(shape)
        return out if shape else int(out)

    def inv_arr(self, a):
        a = np.asarray(a)
        shape = a.shape
        rows = self.perms[a.ravel()]
        inv_rows = np.argsort(rows, axis=1).astype(np.int32)
        out = self._lookup_rows(inv_rows).reshape(shape)
        return out if shape else int(out)

    def label(self, i: int) -> str:
        return _cycle_notation(self.perms[i])

    @classmethod
    def from_generators(cls, gens: Sequence[np.ndarray], degree: int, name: str = "P"):
        seen = {np.arange(degree, dtype=np.int32).tobytes()}
        frontier = []
        for g in gens:
            g = np.asarray(g, dtype=np.int32)
            if g.tobytes() not in seen:
                seen.add(g.tobytes())
                frontier.append(g)
        gen_rows = [np.asarray(g, dtype=np.int32) for g in gens]
        while frontier:
            nxt = []
            for x in frontier:
                for g in gen_rows:
                    prod = x[g]
                    key = prod.tobytes()
                    if key not in seen:
                        seen.add(key)
                        nxt.append(prod)
            frontier = nxt
        rows = np.vstack([np.frombuffer(k, dtype=np.int32) for k in sorted(seen)])
        return cls(rows, name=name)


def _cycle_notation(perm: np.ndarray) -> str:
    seen = set()
    parts = []
    for start in range(len(perm)):
        if start in seen or perm[start] == start:
            seen.add(start)
            continue
        cyc = [start]
        seen.add(start)
        j = int(perm[start])
        while j != start:
            cyc.append(j)
            seen.add(j)
            j = int(perm[j])
        parts.append("(" + " ".join(str(c) for c in cyc) + ")")
    return "".join(parts) if parts else "()"


class DirectProductGroup(FiniteGroup):
    """Direct product; index packs component indices in mixed radix.

    The last factor varies fastest: index = (...(i1*o2 + i2)*o3 + i3...).
    """

    def __init__(self, factors: Sequence[FiniteGroup], name: Optional[str] = None):
        if not factors:
            raise PreconditionError("direct product needs at least one factor")
        self.factors = list(factors)
        orders = [g.order for g in self.factors]
        strides = []
        acc = 1
        for o in reversed(orders):
            strides.append(acc)
            acc *= o
        self.strides = list(reversed(strides))
        ident = sum(g.identity * s for g, s in zip(self.factors, self.strides))
        super().__init__(name or "x".join(g.name for g in self.factors), acc, ident)

    def split(self, idx) -> list[np.ndarray]:
        idx = np.asarray(idx, dtype=np.int64)
        comps = []
        rem = idx
        for g, s in zip(self.factors, self.strides):
            comps.append(rem // s)
            rem = rem % s
        return comps

    def join(self, comps: Sequence[np.ndarray]) -> np.ndarray:
        out = 0
        for c, s in zip(comps, self.strides):
            out = out + np.asarray(c, dtype=np.int64) * s
        return out

    def mul_arr(self, a, b):
        ca = self.split(a)
        cb = self.split(b)
        return self.join([g.mul_arr(x, y) for g, x, y in zip(self.factors, ca, cb)])

    def inv_arr(self, a):
        return self.join([g.inv_arr(x) for g, x in zip(self.factors, self.split(a))])

    def label(self, i: int) -> str:
        comps = self.split(i)
        return "(" + ",".join(g.label(int(c)) for g, c in zip(self.factors, comps)) + ")"

    @property
    def generators(self) -> list[int]:
        def make():
            gens = []
            for pos, g in enumerate(self.factors):
                for x in g.generators:
                    comps = [h.identity for h in self.factors]
                    comps[pos] = x
                    gens.append(int(self.join(comps)))
            return gens

        return self._cached("generators", make)

    def projection(self, pos: int) -> "GroupMap":
        images = self.split(np.arange(self.order))[pos]
        return GroupMap(self, self.factors[pos], images, name=f"pi{pos}")

    def embedding(self, pos: int) -> "GroupMap":
        g = self.factors[pos]
        images = []
        for x in range(g.order):
            comps = [h.identity for h in self.factors]
            comps[pos] = x
            images.append(int(self.join(comps)))
        return GroupMap(g, self, np.asarray(images), name=f"emb{pos}")


class SemidirectProductGroup(FiniteGroup):
    """Semidirect product [N]T for an action of T on N by automorphisms.

    Index packs (n, t) as n*|T| + t; multiplication twists the right normal
    part by the left acting part: (n1,t1)(n2,t2) = (n1 * t1(n2), t1 t2).
    """

    def __init__(self, normal: FiniteGroup, acting: FiniteGroup, action: "GroupAction",
                 name: Optional[str] = None):
        if action.group is not acting or action.target is not normal:
            raise PreconditionError("action must map the acting group into Aut(normal part)")
        action.check()
        self.normal = normal
        self.acting = acting
        self.action = action
        ident = normal.identity * acting.order + acting.identity
        super().__init__(name or f"[{normal.name}]{acting.name}", normal.order * acting.order, ident)

    def split(self, idx):
        idx = np.asarray(idx, dtype=np.int64)
        return idx // self.acting.order, idx % self.acting.order

    def join(self, n, t):
        return np.asarray(n, dtype=np.int64) * self.acting.order + np.asarray(t, dtype=np.int64)

    def mul_arr(self, a, b):
        n1, t1 = self.split(a)
        n2, t2 = self.split(b)
        twisted = self.action.perms[t1, n2]
        return self.join(self.normal.mul_arr(n1, twisted), self.acting.mul_arr(t1, t2))

    def inv_arr(self, a):
        n, t = self.split(a)
        ti = self.acting.inv_arr(t)
        return self.join(self.action.perms[ti, self.normal.inv_arr(n)], ti)

    def label(self, i: int) -> str:
        n, t = self.split(i)
        return f"({self.normal.label(int(n))}|{self.acting.label(int(t))})"

    @property
    def generators(self) -> list[int]:
        def make():
            gens = [int(self.join(x, self.acting.identity)) for x in self.normal.generators]
            gens += [int(self.join(self.normal.identity, t)) for t in self.acting.generators]
            return gens

        return self._cached("generators", make)


class SubgroupGroup(FiniteGroup):
    """A subgroup of an ambient group, re-indexed to its own 0..m-1 domain.

    Keeps the ambient group for multiplication; translation back uses binary
    search over the sorted ambient index array.
    """

    def __init__(self, ambient: FiniteGroup, ambient_indices: np.ndarray, name: Optional[str] = None):
        amb = np.unique(np.asarray(ambient_indices, dtype=np.int64))
        self.ambient = ambient
        self.ambient_indices = amb
        ident = int(np.searchsorted(amb, ambient.identity))
        if ident >= len(amb) or amb[ident] != ambient.identity:
            raise PreconditionError("subgroup member set must contain the ambient identity")
        super().__init__(name or f"{ambient.name}-sub{len(amb)}", len(amb), ident)

    def _to_local(self, amb_vals: np.ndarray) -> np.ndarray:
        pos = np.searchsorted(self.ambient_indices, amb_vals)
        return pos

    def mul_arr(self, a, b):
        amb = self.ambient.mul_arr(self.ambient_indices[a], self.ambient_indices[b])
        return self._to_local(np.asarray(amb, dtype=np.int64))

    def inv_arr(self, a):
        amb = self.ambient.inv_arr(self.ambient_indices[a])
        return self._to_local(np.asarray(amb, dtype=np.int64))

    def commute_bools(self, g: int) -> np.ndarray:
        ga = self.ambient_indices[g]
        alla = self.ambient_indices
        fwd = self.ambient.mul_arr(ga, alla)
        bwd = self.ambient.mul_arr(alla, ga)
        return np.asarray(fwd) == np.asarray(bwd)

    def commute_block(self, gs: np.ndarray) -> np.ndarray:
        # products compared in ambient coordinates, skipping the re-indexing
        ga = self.ambient_indices[gs]
        alla = self.ambient_indices
        fwd = self.ambient.mul_arr(ga[:, None], alla[None, :])
        bwd = self.ambient.mul_arr(alla[None, :], ga[:, None])
        return np.asarray(fwd == bwd)

    def label(self, i: int) -> str:
        return self.ambient.label(int(self.ambient_indices[i]))


# -- subsets and subgroups ------------------------------------------------------


class Subgroup:
    """A closed subgroup of an ambient group, stored as an index bitmask."""

    __slots__ = ("group", "mask", "order")

    def __init__(self, group: FiniteGroup, mask: int):
        self.group = group
        self.mask = mask
        self.order = mask.bit_count()

    @classmethod
    def from_indices(cls, group: FiniteGroup, indices, *, verify: bool = False) -> "Subgroup":
        mask = _bits.mask_from_indices(indices, group.order)
        sub = cls(group, mask)
        if verify:
            assert_closed(group, mask)
        return sub

    def indices(self) -> np.ndarray:
        return _bits.indices_from_mask(self.mask, self.group.order)

    def __contains__(self, i) -> bool:
        return bool((self.mask >> int(i)) & 1)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Subgroup)
            and other.group is self.group
            and other.mask == self.mask
        )

    def __hash__(self) -> int:
        return hash((id(self.group), self.mask))

    def __le__(self, other: "Subgroup") -> bool:
        return _bits.is_subset(self.mask, other.mask)

    def __lt__(self, other: "Subgroup") -> bool:
        return self.mask != other.mask and self <= other

    def __and__(self, other: "Subgroup") -> "Subgroup":
        return Subgroup(self.group, self.mask & other.mask)

    def __repr__(self) -> str:
        return f"<subgroup of {self.group.name}: order {self.order}>"

    def is_abelian(self) -> bool:
        return _bits.is_subset(self.mask, centralizer(self.group, self).mask)

    def is_trivial(self) -> bool:
        return self.order == 1

    def is_full(self) -> bool:
        return self.order == self.group.order


def trivial_subgroup(G: FiniteGroup) -> Subgroup:
    return Subgroup(G, 1 << G.identity)


def full_subgroup(G: FiniteGroup) -> Subgroup:
    return Subgroup(G, (1 << G.order) - 1)


def _subset_indices(G: FiniteGroup, subset) -> np.ndarray:
    """Accept a Subgroup, a bitmask, or an iterable of indices."""
    if isinstance(subset, Subgroup):
        if subset.group is not G:
            raise PreconditionError("subgroup belongs to a different group")
        return subset.indices()
    if isinstance(subset, int):
        return _bits.indices_from_mask(subset, G.order)
    idx = np.asarray(list(subset), dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= G.order):
        raise DomainError(f"element index outside 0..{G.order - 1} of {G.name}")
    return idx


def assert_closed(G: FiniteGroup, mask: int) -> None:
    """Raise unless mask is a subgroup (identity, inverses, products)."""
    if not (mask >> G.identity) & 1:
        raise InternalCheckError("subgroup mask misses the identity")
    idx = _bits.indices_from_mask(mask, G.order)
    inv = np.asarray(G.inv_arr(idx))
    prods = np.asarray(G.mul_arr(idx[:, None], idx[None, :])).ravel()
    bools = _bits.bools_from_mask(mask, G.order)
    if not bools[inv].all() or not bools[prods].all():
        raise InternalCheckError("element set is not closed under the group law")


# -- closure -------------------------------------------------------------------


def _close(G: FiniteGroup, gens: list[int]) -> int:
    """Bitmask of the subgroup generated by gens (right-multiplication BFS)."""
    n = G.order
    bools = np.zeros(n, dtype=bool)
    bools[G.identity] = True
    if not gens:
        return 1 << G.identity
    garr = np.asarray(gens, dtype=np.int64)
    frontier = np.asarray([G.identity], dtype=np.int64)
    while frontier.size:
        prods = np.asarray(G.mul_arr(frontier[:, None], garr[None, :])).ravel()
        prods = np.unique(prods)
        new = prods[~bools[prods]]
        bools[new] = True
        frontier = new
    return _bits.mask_from_bools(bools)


def _greedy_generators(G: FiniteGroup, candidates: Iterable[int]) -> list[int]:
    """Filter candidates down to a generating list for their closure."""
    gens: list[int] = []
    mask = 1 << G.identity
    for c in candidates:
        c = int(c)
        if (mask >> c) & 1:
            continue
        gens.append(c)
        mask = _close(G, gens)
    return gens


def closure(G: FiniteGroup, seed=()) -> Subgroup:
    """Smallest subgroup containing the seed; the empty seed gives the trivial one."""
    idx = _subset_indices(G, seed)
    for i in idx:
        G.check_index(int(i))
    gens = _greedy_generators(G, idx)
    return Subgroup(G, _close(G, gens))


def generating_indices(G: FiniteGroup, sub: Subgroup) -> list[int]:
    """A small generating list for an existing subgroup."""
    return _greedy_generators(G, sub.indices())


# -- centralizers ----------------------------------------------------------------


def centralizer(G: FiniteGroup, subset) -> Subgroup:
    """Elements commuting with every member of the subset."""
    idx = _subset_indices(G, subset)
    gens = _greedy_generators(G, idx)
    bools = np.ones(G.order, dtype=bool)
    for g in gens:
        bools &= G.commute_bools(g)
    return Subgroup(G, _bits.mask_from_bools(bools))


def center(G: FiniteGroup) -> Subgroup:
    def make():
        bools = np.ones(G.order, dtype=bool)
        for g in G.generators:
            bools &= G.commute_bools(g)
        return Subgroup(G, _bits.mask_from_bools(bools))

    return G._cached("center", make)


def _product_split(G: FiniteGroup):
    """(ambient, member components, factors) when G sits in a direct product
    of table-sized factors, else None."""
    if not isinstance(G, SubgroupGroup) or not isinstance(G.ambient, DirectProductGroup):
        return None
    amb = G.ambient
    if any(f.order > TABLE_BOUND for f in amb.factors):
        return None

    def make():
        return amb.split(G.ambient_indices)

    return amb, G._cached("product_components", make), amb.factors


def _product_element_centralizers(G: FiniteGroup):
    """Element centralizers of a subgroup of a direct product, computed from
    per-factor centralizers: C(g) = G n (C(g1) x ... x C(gk))."""
    split = _product_split(G)
    if split is None:
        return None
    _, comps, factors = split
    fids, frows = [], []
    for f, c in zip(factors, comps):
        ids_f, masks_f = element_centralizers(f)
        rows = np.vstack([_bits.bools_from_mask(m, f.order) for m in masks_f])
        fids.append(ids_f[c])
        frows.append(rows)
    packed = fids[0].astype(np.int64)
    for ids_f, rows in zip(fids[1:], frows[1:]):
        packed = packed * len(rows) + ids_f
    uniq, inverse = np.unique(packed, return_inverse=True)
    masks: list[int] = []
    remap = np.zeros(len(uniq), dtype=np.int64)
    seen: dict[int, int] = {}
    for pos, u in enumerate(uniq):
        code = int(u)
        parts = []
        for rows in reversed(frows):
            parts.append(code % len(rows))
            code //= len(rows)
        parts.reverse()
        bools = frows[0][parts[0]][comps[0]]
        for rows, part, c in zip(frows[1:], parts[1:], comps[1:]):
            bools = bools & rows[part][c]
        mask = _bits.mask_from_bools(bools)
        hit = seen.get(mask)
        if hit is None:
            hit = len(masks)
            seen[mask] = hit
            masks.append(mask)
        remap[pos] = hit
    return remap[inverse], masks


def element_centralizers(G: FiniteGroup) -> tuple[np.ndarray, list[int]]:
    """Per-element centralizer masks, deduplicated.

    Returns (ids, masks) where ids[g] indexes into masks and masks[ids[g]]
    is the bitmask of the centralizer of element g.  This is the expensive
    full sweep behind the Chermak-Delgado machinery, hence cached.
    """

    def make():
        fast = _product_element_centralizers(G)
        if fast is not None:
            return fast
        n = G.order
        ids = np.zeros(n, dtype=np.int64)
        masks: list[int] = []
        seen: dict[int, int] = {}
        block = 64
        nbytes = (n + 7) // 8
        for start in range(0, n, block):
            gs = np.arange(start, min(start + block, n))
            bools = G.commute_block(gs)
            packed = np.packbits(bools, axis=1, bitorder="little")
            raw = packed.tobytes()
            for row, g in enumerate(gs):
                mask = int.from_bytes(raw[row * nbytes:(row + 1) * nbytes], "little")
                pos = seen.get(mask)
                if pos is None:
                    pos = len(masks)
                    seen[mask] = pos
                    masks.append(mask)
                ids[g] = pos
        return ids, masks

    return G._cached("element_centralizers", make)


# -- conjugation, normality ------------------------------------------------------


def conjugate_mask(G: FiniteGroup, mask: int, g: int) -> int:
    idx = _bits.indices_from_mask(mask, G.order)
    return _bits.mask_from_indices(np.asarray(G.conj_arr(idx, g)), G.order)


def is_normal(G: FiniteGroup, sub: Subgroup) -> bool:
    return all(conjugate_mask(G, sub.mask, g) == sub.mask for g in G.generators)


def normal_closure(G: FiniteGroup, H: Subgroup, X) -> Subgroup:
    """Subgroup generated by the conjugates of H by the members of X.

    The convention for empty X is the trivial subgroup (a join over nothing).
    """
    xidx = _subset_indices(G, X)
    if xidx.size == 0:
        return trivial_subgroup(G)
    hidx = H.indices()
    full = (1 << G.order) - 1
    if _bits.mask_from_indices(xidx, G.order) == full:
        # closure of H under conjugation by a generating set of G
        mask = closure(G, hidx).mask
        gens = G.generators
        while True:
            grown = mask
            for g in gens:
                grown |= conjugate_mask(G, mask, g)
            if grown == mask:
                return Subgroup(G, mask)
            mask = closure(G, _bits.indices_from_mask(grown, G.order)).mask
    seed: list[int] = []
    seen_mask = 0
    for x in xidx:
        conj = np.asarray(G.conj_arr(hidx, int(x)))
        m = _bits.mask_from_indices(conj, G.order)
        if _bits.is_subset(m, seen_mask):
            continue
        seen_mask |= m
        seed.extend(int(c) for c in conj)
    return closure(G, seed)


def core(G: FiniteGroup, H: Subgroup, X) -> Subgroup:
    """Intersection of the conjugates of H by the members of X.

    Empty X yields the whole group (an intersection over nothing inside G).
    """
    xidx = _subset_indices(G, X)
    if xidx.size == 0:
        return full_subgroup(G)
    full = (1 << G.order) - 1
    if _bits.mask_from_indices(xidx, G.order) == full:
        # orbit of H under conjugation by generators covers all conjugates
        orbit = {H.mask}
        work = [H.mask]
        while work:
            m = work.pop()
            for g in G.generators:
                c = conjugate_mask(G, m, g)
                if c not in orbit:
                    orbit.add(c)
                    work.append(c)
        out = full
        for m in orbit:
            out &= m
        return Subgroup(G, out)
    out = full
    for x in xidx:
        out &= conjugate_mask(G, H.mask, int(x))
    return Subgroup(G, out)


def conjugacy_classes(G: FiniteGroup) -> list[np.ndarray]:
    """Conjugacy classes as sorted index arrays, ordered by least member."""

    def make():
        n = G.order
        assigned = np.zeros(n, dtype=bool)
        gens = G.generators
        classes = []
        for start in range(n):
            if assigned[start]:
                continue
            member = np.zeros(n, dtype=bool)
            member[start] = True
            frontier = np.asarray([start], dtype=np.int64)
            while frontier.size:
                images = [np.asarray(G.conj_arr(frontier, g)) for g in gens]
                allimg = np.unique(np.concatenate(images)) if images else frontier
                new = allimg[~member[allimg]]
                member[new] = True
                frontier = new
            cls = np.flatnonzero(member)
            assigned[cls] = True
            classes.append(cls)
        return classes

    return G._cached("conjugacy_classes", make)


# -- products and quotients --------------------------------------------------------


def _set_product_mask(G: FiniteGroup, a_idx: np.ndarray, b_idx: np.ndarray) -> int:
    """Bitmask of the element-set product A*B where B is a subgroup.

    Accumulates whole left cosets a*B; any a already covered lies in a
    previously added coset, whose span equals its own, so it can be skipped.
    """
    bools = np.zeros(G.order, dtype=bool)
    for a in a_idx:
        if not bools[a]:
            bools[np.asarray(G.mul_arr(int(a), b_idx))] = True
    return _bits.mask_from_bools(bools)


def subgroup_product(G: FiniteGroup, H: Subgroup, K: Subgroup) -> tuple[int, bool]:
    """The set {hk}, plus whether it is a subgroup (i.e. HK = KH)."""
    hk = _set_product_mask(G, H.indices(), K.indices())
    kh = _set_product_mask(G, K.indices(), H.indices())
    return hk, hk == kh


def quotient(G: FiniteGroup, N: Subgroup) -> tuple[TableGroup, "GroupMap"]:
    """Quotient by a verified normal subgroup, with the projection map.

    Cosets are labeled by their minimum member index; the result is a
    TableGroup, so the coset count must stay within TABLE_BOUND.
    """
    if not is_normal(G, N):
        raise PreconditionError("quotient requires a normal subgroup")
    m = G.order // N.order
    if m > TABLE_BOUND:
        raise CapacityError(
            f"quotient of order {m} exceeds the Cayley-table bound {TABLE_BOUND}",
            bound=TABLE_BOUND,
        )
    n_idx = N.indices()
    elem_to_coset = np.full(G.order, -1, dtype=np.int64)
    reps = []
    for i in range(G.order):
        if elem_to_coset[i] >= 0:
            continue
        coset = np.asarray(G.mul_arr(i, n_idx))
        elem_to_coset[coset] = len(reps)
        reps.append(i)
    reps_arr = np.asarray(reps, dtype=np.int64)
    table = elem_to_coset[np.asarray(G.mul_arr(reps_arr[:, None], reps_arr[None, :]))]
    labels = [f"{G.label(int(r))}N" for r in reps_arr]
    Q = TableGroup(table, name=f"{G.name}/N{N.order}", labels=labels)
    proj = GroupMap(G, Q, elem_to_coset, name="quotient projection")
    return Q, proj


def direct_product(factors: Sequence[FiniteGroup], name: Optional[str] = None) -> DirectProductGroup:
    return DirectProductGroup(factors, name=name)


def semidirect_product(N: FiniteGroup, T: FiniteGroup, action: "GroupAction",
                       name: Optional[str] = None) -> SemidirectProductGroup:
    return SemidirectProductGroup(N, T, action, name=name)


# -- homomorphisms and actions ------------------------------------------------------


class GroupMap:
    """Group homomorphism as an image table on element indices."""

    def __init__(self, source: FiniteGroup, target: FiniteGroup, images, name: str = ""):
        self.source = source
        self.target = target
        self.images = np.asarray(images, dtype=np.int64)
        self.name = name
        if self.images.shape != (source.order,):
            raise PreconditionError("image table length must equal the source order")

    def __call__(self, i: int) -> int:
        return int(self.images[i])

    def apply_arr(self, idx):
        return self.images[idx]

    def compose(self, other: "GroupMap") -> "GroupMap":
        if other.target is not self.source:
            raise PreconditionError("composition requires matching target/source")
        return GroupMap(other.source, self.target, self.images[other.images],
                        name=f"{self.name}*{other.name}")

    def is_bijective(self) -> bool:
        return (
            self.source.order == self.target.order
            and len(np.unique(self.images)) == self.source.order
        )

    def is_automorphism(self) -> bool:
        return self.source is self.target and self.is_bijective()

    def kernel(self) -> Subgroup:
        mask = _bits.mask_from_bools(self.images == self.target.identity)
        return Subgroup(self.source, mask)

    def image_subgroup(self) -> Subgroup:
        return Subgroup(self.target, _bits.mask_from_indices(np.unique(self.images),
                                                             self.target.order))

    def is_surjective(self) -> bool:
        return len(np.unique(self.images)) == self.target.order

    def check(self) -> "GroupMap":
        """Verify the homomorphism property (complete via generator rows)."""
        if self.images[self.source.identity] != self.target.identity:
            raise InternalCheckError(f"map {self.name!r} does not fix the identity")
        ar = np.arange(self.source.order)
        for g in self.source.generators:
            lhs = self.images[np.asarray(self.source.mul_arr(g, ar))]
            rhs = np.asarray(self.target.mul_arr(self.images[g], self.images[ar]))
            if not (lhs == rhs).all():
                raise InternalCheckError(f"map {self.name!r} is not a homomorphism")
        return self

    def __repr__(self) -> str:
        return f"<map {self.source.name} -> {self.target.name}>"


class GroupAction:
    """Action of a group T on a group N by automorphisms.

    perms[t] is the image row of the automorphism assigned to t, so the
    homomorphism condition reads perms[t1*t2] == perms[t1][perms[t2]].
    """

    def __init__(self, group: FiniteGroup, target: FiniteGroup, perms: np.ndarray):
        self.group = group
        self.target = target
        self.perms = np.asarray(perms, dtype=np.int64)
        if self.perms.shape != (group.order, target.order):
            raise PreconditionError("action table must be |T| x |N|")

    @classmethod
    def trivial(cls, group: FiniteGroup, target: FiniteGroup) -> "GroupAction":
        perms = np.tile(np.arange(target.order), (group.order, 1))
        return cls(group, target, perms)

    def automorphism(self, t: int) -> GroupMap:
        return GroupMap(self.target, self.target, self.perms[t], name=f"action[{t}]")

    def check(self) -> "GroupAction":
        """Verify each row is an automorphism and the assignment is a homomorphism."""
        n = self.target.order
        ar = np.arange(n)
        if not (self.perms[self.group.identity] == ar).all():
            raise PreconditionError("action must assign the identity automorphism to 1")
        for t in self.group.generators:
            row = self.perms[t]
            if len(np.unique(row)) != n:
                raise PreconditionError("action row is not a bijection")
            GroupMap(self.target, self.target, row, name=f"action[{t}]").check()
        for g in self.group.generators:
            lhs = self.perms[np.asarray(self.group.mul_arr(g, np.arange(self.group.order)))]
            rhs = self.perms[g][self.perms]
            if not (lhs == rhs).all():
                raise PreconditionError("action is not a homomorphism into Aut(N)")
        return self

    def kernel(self) -> Subgroup:
        fixed = (self.perms == np.arange(self.target.order)).all(axis=1)
        return Subgroup(self.group, _bits.mask_from_bools(fixed))

    def is_faithful(self) -> bool:
        return self.kernel().order == 1

    def kernel_on(self, sub: Subgroup) -> Subgroup:
        """Kernel of the restricted action on an invariant subgroup."""
        idx = sub.indices()
        fixed = (self.perms[:, idx] == idx).all(axis=1)
        return Subgroup(self.group, _bits.mask_from_bools(fixed))

    def invariant_mask(self, mask: int) -> bool:
        idx = _bits.indices_from_mask(mask, self.target.order)
        return all(
            _bits.mask_from_indices(self.perms[t, idx], self.target.order) == mask
            for t in self.group.generators
        )


# -- subgroup enumeration -----------------------------------------------------------


def all_subgroups(G: FiniteGroup, *, bound: int = ORACLE_BOUND) -> list[Subgroup]:
    """Every subgroup exactly once, by bottom-up closure (the brute oracle).

    Starts from all cyclic subgroups and repeatedly extends each known
    subgroup by one outside element, closing and deduplicating, until no new
    subgroup appears.
    """
    if G.order > bound:
        raise CapacityError(
            f"order {G.order} exceeds the subgroup-oracle bound {bound}", bound=bound
        )

    def make():
        n = G.order
        known: dict[int, list[int]] = {1 << G.identity: []}
        frontier: list[tuple[int, list[int]]] = []
        for g in range(n):
            mask = _close(G, [g])
            if mask not in known:
                known[mask] = [g]
                frontier.append((mask, [g]))
        while frontier:
            fresh: list[tuple[int, list[int]]] = []
            for mask, gens in frontier:
                outside = _bits.indices_from_mask(((1 << n) - 1) & ~mask, n)
                for g in outside:
                    ext = gens + [int(g)]
                    grown = _close(G, ext)
                    if grown not in known:
                        known[grown] = ext
                        fresh.append((grown, ext))
            frontier = fresh
        subs = [Subgroup(G, mask) for mask in known]
        subs.sort(key=lambda s: (s.order, s.mask))
        return subs

    return G._cached(("all_subgroups", bound), make)


def _normal_join(G: FiniteGroup, a: Subgroup, b: Subgroup) -> Subgroup:
    # both normal, so the set product is already the join subgroup
    return Subgroup(G, _set_product_mask(G, a.indices(), b.indices()))


def normal_subgroups(G: FiniteGroup) -> list[Subgroup]:
    """All normal subgroups, via joins of conjugacy-class closures.

    Complete because every normal subgroup is the join of the closures of
    the classes it contains; avoids the exhaustive subgroup oracle.
    """

    def make():
        atoms: dict[int, Subgroup] = {}
        for cls in conjugacy_classes(G):
            sub = closure(G, cls)
            atoms.setdefault(sub.mask, sub)
        found: dict[int, Subgroup] = {trivial_subgroup(G).mask: trivial_subgroup(G)}
        work: list[Subgroup] = []
        for sub in atoms.values():
            if sub.mask not in found:
                found[sub.mask] = sub
                work.append(sub)
        while work:
            cur = work.pop()
            for atom in atoms.values():
                if _bits.is_subset(atom.mask, cur.mask):
                    continue
                joined = _normal_join(G, cur, atom)
                if joined.mask not in found:
                    found[joined.mask] = joined
                    work.append(joined)
        subs = sorted(found.values(), key=lambda s: (s.order, s.mask))
        return subs

    return G._cached("normal_subgroups", make)


def is_directly_indecomposable(G: FiniteGroup) -> bool:
    """False exactly when two nontrivial normal subgroups complement each other."""
    if G.order == 1:
        return True
    normals = [s for s in normal_subgroups(G) if 1 < s.order < G.order]
    ident_mask = 1 << G.identity
    by_order: dict[int, list[Subgroup]] = {}
    for s in normals:
        by_order.setdefault(s.order, []).append(s)
    for s in normals:
        other = G.order // s.order
        for t in by_order.get(other, []):
            if s.mask & t.mask == ident_mask:
                # disjoint normal subgroups with full order product span G
                return False
    return True


# -- isomorphisms and automorphisms ----------------------------------------------------


def _image_candidates(G: FiniteGroup, H: FiniteGroup) -> dict[tuple[int, int], np.ndarray]:
    """H-elements bucketed by (element order, conjugacy class size)."""
    orders = H.element_orders()
    class_size = np.zeros(H.order, dtype=np.int64)
    for cls in conjugacy_classes(H):
        class_size[cls] = len(cls)
    buckets: dict[tuple[int, int], list[int]] = {}
    for i in range(H.order):
        buckets.setdefault((int(orders[i]), int(class_size[i])), []).append(i)
    return {k: np.asarray(v) for k, v in buckets.items()}


def _homomorphism_from_images(G: FiniteGroup, gens: list[int], schedule,
                              images: list[int], H: FiniteGroup) -> Optional[np.ndarray]:
    """Extend generator images along a BFS word schedule; None on conflict."""
    phi = np.full(G.order, -1, dtype=np.int64)
    phi[G.identity] = H.identity
    for elem, parent, gpos in schedule:
        val = H.mul(int(phi[parent]), images[gpos])
        if phi[elem] < 0:
            phi[elem] = val
        elif phi[elem] != val:
            return None
    return phi


def _bfs_schedule(G: FiniteGroup, gens: list[int]) -> list[tuple[int, int, int]]:
    """Triples (element, parent, generator position) covering the closure of gens."""
    schedule = []
    seen = np.zeros(G.order, dtype=bool)
    seen[G.identity] = True
    frontier = [G.identity]
    while frontier:
        nxt = []
        for x in frontier:
            for pos, g in enumerate(gens):
                y = G.mul(x, g)
                schedule.append((y, x, pos))
                if not seen[y]:
                    seen[y] = True
                    nxt.append(y)
        frontier = nxt
    return schedule


def _iso_search(G: FiniteGroup, H: FiniteGroup, *, find_all: bool,
                count_cap: int = AUT_COUNT_CAP) -> list[np.ndarray]:
    if G.order != H.order:
        return []
    if sorted(G.element_orders().tolist()) != sorted(H.element_orders().tolist()):
        return []
    gens = G.generators
    if not gens:  # trivial group
        return [np.asarray([H.identity])]
    schedule = _bfs_schedule(G, gens)
    g_orders = G.element_orders()
    g_class_size = np.zeros(G.order, dtype=np.int64)
    for cls in conjugacy_classes(G):
        g_class_size[cls] = len(cls)
    buckets = _image_candidates(G, H)
    cand_lists = []
    for g in gens:
        key = (int(g_orders[g]), int(g_class_size[g]))
        cand_lists.append(buckets.get(key, np.asarray([], dtype=np.int64)))
    table_h = np.vstack([np.asarray(H.mul_arr(i, np.arange(H.order))) for i in range(H.order)])
    table_g = np.vstack([np.asarray(G.mul_arr(i, np.arange(G.order))) for i in range(G.order)])
    found: list[np.ndarray] = []

    def descend(depth: int, images: list[int]):
        if len(found) > count_cap:
            raise CapacityError(
                f"isomorphism count exceeds the cap {count_cap}", bound=count_cap
            )
        if depth == len(gens):
            phi = _homomorphism_from_images(G, gens, schedule, images, H)
            if phi is None or (phi < 0).any():
                return
            if len(np.unique(phi)) != G.order:
                return
            if not (phi[table_g] == table_h[phi][:, phi]).all():
                return
            found.append(phi)
            return
        for cand in cand_lists[depth]:
            images.append(int(cand))
            descend(depth + 1, images)
            images.pop()
            if found and not find_all:
                return

    descend(0, [])
    return found


def find_isomorphism(G: FiniteGroup, H: FiniteGroup, *, bound: int = AUT_BOUND * 8) -> Optional[GroupMap]:
    """An isomorphism G -> H if one exists, else None (small orders only)."""
    if max(G.order, H.order) > bound:
        raise CapacityError(
            f"isomorphism search bound {bound} exceeded", bound=bound
        )
    if G.order != H.order:
        return None
    hits = _iso_search(G, H, find_all=False)
    if not hits:
        return None
    return GroupMap(G, H, hits[0], name="iso").check()


def automorphisms(G: FiniteGroup, *, bound: int = AUT_BOUND) -> list[GroupMap]:
    """The complete automorphism list, by generator-image backtracking."""
    if G.order > bound:
        raise CapacityError(
            f"order {G.order} exceeds the automorphism-search bound {bound}", bound=bound
        )

    def make():
        perms = _iso_search(G, G, find_all=True)
        perms.sort(key=lambda p: p.tolist())
        return [GroupMap(G, G, p, name=f"aut{i}") for i, p in enumerate(perms)]

    return G._cached(("automorphisms", bound), make)


def automorphism_group(G: FiniteGroup, *, bound: int = AUT_BOUND) -> tuple[TableGroup, GroupAction]:
    """Aut(G) as a concrete group together with its natural action on G.

    Elements follow the sorted image-row order of ``automorphisms``;
    multiplication is composition (apply the right map first).
    """

    def make():
        auts = automorphisms(G, bound=bound)
        rows = np.vstack([a.images for a in auts])
        index = {row.tobytes(): i for i, row in enumerate(rows)}
        k = len(auts)
        table = np.zeros((k, k), dtype=np.int32)
        for i in range(k):
            for j in range(k):
                table[i, j] = index[rows[i][rows[j]].tobytes()]
        T = TableGroup(table, name=f"Aut({G.name})")
        action = GroupAction(T, G, rows)
        return T, action

    return G._cached(("automorphism_group", bound), make)


def group_pow(G: FiniteGroup, x: int, k: int) -> int:
    """x^k by square-and-multiply; negative k goes through the inverse."""
    if k < 0:
        x, k = G.inv(x), -k
    out, base = G.identity, int(x)
    while k:
        if k & 1:
            out = G.mul(out, base)
        base = G.mul(base, base)
        k >>= 1
    return out


# -- invariant suite ----------------------------------------------------------------


def check_group(G: FiniteGroup, *, rng: Optional[np.random.Generator] = None) -> None:
    """Verify the group axioms on G; raises InternalCheckError on failure.

    Associativity is exhaustive up to ASSOC_EXHAUSTIVE_BOUND and sampled on
    at least 10*n random triples above it.  Row bijectivity is checked the
    same way.
    """
    n = G.order
    ar = np.arange(n)
    ident = G.identity
    if not (np.asarray(G.mul_arr(ident, ar)) == ar).all():
        raise InternalCheckError(f"{G.name}: left identity law fails")
    if not (np.asarray(G.mul_arr(ar, ident)) == ar).all():
        raise InternalCheckError(f"{G.name}: right identity law fails")
    inv = np.asarray(G.inv_arr(ar))
    if not (np.asarray(G.mul_arr(ar, inv)) == ident).all():
        raise InternalCheckError(f"{G.name}: inverse law fails")
    if n <= ASSOC_EXHAUSTIVE_BOUND:
        bc = np.asarray(G.mul_arr(ar[:, None], ar[None, :]))
        for a in range(n):
            ab = np.asarray(G.mul_arr(a, ar))
            lhs = np.asarray(G.mul_arr(ab[:, None], ar[None, :]))
            rhs = np.asarray(G.mul_arr(a, bc))
            if not (lhs == rhs).all():
                raise InternalCheckError(f"{G.name}: associativity fails at a={a}")
            if len(np.unique(ab)) != n:
                raise InternalCheckError(f"{G.name}: row {a} is not a bijection")
    else:
        rng = rng or np.random.default_rng(0)
        trips = rng.integers(0, n, size=(10 * n, 3))
        lhs = np.asarray(G.mul_arr(G.mul_arr(trips[:, 0], trips[:, 1]), trips[:, 2]))
        rhs = np.asarray(G.mul_arr(trips[:, 0], G.mul_arr(trips[:, 1], trips[:, 2])))
        if not (lhs == rhs).all():
            raise InternalCheckError(f"{G.name}: sampled associativity fails")
        for a in list(G.generators) + list(rng.integers(0, n, size=8)):
            if len(np.unique(np.asarray(G.mul_arr(int(a), ar)))) != n:
                raise InternalCheckError(f"{G.name}: row {a} is not a bijection")
