"""Finite bounded lattices: construction, duality, width, factorization,
and isomorphism testing.

Small lattices are dense (an explicit order matrix with cached meet/join
tables).  Cartesian products and bound adjunctions stay structural, so the
very large predicted lattices can be built, sized, and fingerprinted
without ever materializing a quadratic relation; they densify on demand
below DENSE_BOUND.
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from .errors import CapacityError, PreconditionError

DENSE_BOUND = 4096          # largest size materialized as a matrix
ISO_SIZE_BOUND = 250_000    # sizes beyond this refuse even fingerprint search
ISO_BACKTRACK_BOUND = 5000  # full backtracking only below this size
ISO_NODE_BUDGET = 2_000_000


class AbstractLattice:
    """Base interface: a finite bounded lattice on indices 0..size-1."""

    size: int

    def leq(self, i: int, j: int) -> bool:
        raise NotImplementedError

    @property
    def bottom(self) -> int:
        raise NotImplementedError

    @property
    def top(self) -> int:
        raise NotImplementedError

    def atom_indices(self) -> list[int]:
        raise NotImplementedError

    def coatom_indices(self) -> list[int]:
        raise NotImplementedError

    def height(self) -> int:
        raise NotImplementedError

    def fingerprint(self) -> tuple:
        """Cheap isomorphism invariant: (size, atoms, coatoms, height)."""
        return (self.size, len(self.atom_indices()), len(self.coatom_indices()), self.height())

    def dense(self, bound: int = DENSE_BOUND) -> "DenseLattice":
        raise NotImplementedError

    def __len__(self) -> int:
        return self.size


class DenseLattice(AbstractLattice):
    """Lattice given by its full order relation as a boolean matrix."""

    def __init__(self, leq_matrix: np.ndarray, *, trusted: bool = False):
        M = np.asarray(leq_matrix, dtype=bool)
        m = M.shape[0]
        if M.shape != (m, m):
            raise PreconditionError("order relation must be square")
        self.size = m
        self.matrix = M
        self._cache: dict = {}
        if not trusted:
            self._validate()
        bottoms = np.flatnonzero(M.all(axis=1))
        tops = np.flatnonzero(M.all(axis=0))
        if len(bottoms) != 1 or len(tops) != 1:
            raise PreconditionError("lattice must have unique bottom and top")
        self._bottom = int(bottoms[0])
        self._top = int(tops[0])

    def _validate(self):
        M = self.matrix
        m = self.size
        if not M.diagonal().all():
            raise PreconditionError("order relation is not reflexive")
        if (M & M.T & ~np.eye(m, dtype=bool)).any():
            raise PreconditionError("order relation is not antisymmetric")
        closure = (M.astype(np.uint8) @ M.astype(np.uint8)) > 0
        if (closure & ~M).any():
            raise PreconditionError("order relation is not transitive")
        self.meet_table()  # existence of all meets and joins
        self.join_table()

    def leq(self, i: int, j: int) -> bool:
        return bool(self.matrix[i, j])

    @property
    def bottom(self) -> int:
        return self._bottom

    @property
    def top(self) -> int:
        return self._top

    def _cached(self, key, make):
        try:
            return self._cache[key]
        except KeyError:
            val = make()
            self._cache[key] = val
            return val

    def meet_table(self) -> np.ndarray:
        def make():
            return self._bound_table(down=True)

        return self._cached("meet", make)

    def join_table(self) -> np.ndarray:
        def make():
            return self._bound_table(down=False)

        return self._cached("join", make)

    def _bound_table(self, *, down: bool) -> np.ndarray:
        # The meet of i and j is the unique element whose down-set equals
        # down(i) & down(j); absence of a match means this is not a lattice.
        m = self.size
        D = self.matrix.T.copy() if down else self.matrix.copy()
        lookup = {D[i].tobytes(): i for i in range(m)}
        table = np.zeros((m, m), dtype=np.int32)
        for i in range(m):
            rows = D[i] & D
            for j in range(m):
                hit = lookup.get(rows[j].tobytes())
                if hit is None:
                    kind = "meet" if down else "join"
                    raise PreconditionError(f"pair ({i},{j}) has no {kind}")
                table[i, j] = hit
        return table

    def covers(self) -> np.ndarray:
        """Covering relation (the transitive reduction), covers[i,j] = i covered by j."""

        def make():
            strict = self.matrix & ~np.eye(self.size, dtype=bool)
            via = (strict.astype(np.uint8) @ strict.astype(np.uint8)) > 0
            return strict & ~via

        return self._cached("covers", make)

    def atom_indices(self) -> list[int]:
        return [int(i) for i in np.flatnonzero(self.covers()[self.bottom])]

    def coatom_indices(self) -> list[int]:
        return [int(i) for i in np.flatnonzero(self.covers()[:, self.top])]

    def heights(self) -> np.ndarray:
        def make():
            order = np.argsort(self.matrix.T.sum(axis=1))  # by down-set size
            h = np.zeros(self.size, dtype=np.int64)
            cov = self.covers()
            for i in order:
                below = np.flatnonzero(cov[:, i])
                h[i] = h[below].max() + 1 if below.size else 0
            return h

        return self._cached("heights", make)

    def depths(self) -> np.ndarray:
        def make():
            return self.dual().heights()

        return self._cached("depths", make)

    def height(self) -> int:
        return int(self.heights().max())

    def dual(self) -> "DenseLattice":
        return DenseLattice(self.matrix.T, trusted=True)

    def interval(self, lo: int, hi: int) -> "DenseLattice":
        keep = np.flatnonzero(self.matrix[lo] & self.matrix[:, hi])
        return DenseLattice(self.matrix[np.ix_(keep, keep)], trusted=True)

    def dense(self, bound: int = DENSE_BOUND) -> "DenseLattice":
        return self

    def __repr__(self) -> str:
        return f"<lattice: {self.size} elements>"


class CartesianLattice(AbstractLattice):
    """Cartesian product with componentwise order; index packs mixed radix,
    last factor fastest."""

    def __init__(self, factors: Sequence[AbstractLattice]):
        if not factors:
            raise PreconditionError("product needs at least one factor")
        self.factors = list(factors)
        size = 1
        strides = []
        for f in reversed(self.factors):
            strides.append(size)
            size *= f.size
        self.strides = list(reversed(strides))
        self.size = size

    def split(self, idx: int) -> list[int]:
        out = []
        for f, s in zip(self.factors, self.strides):
            out.append((idx // s) % f.size)
        return out

    def join_index(self, comps: Sequence[int]) -> int:
        return sum(c * s for c, s in zip(comps, self.strides))

    def leq(self, i: int, j: int) -> bool:
        return all(f.leq(a, b) for f, a, b in zip(self.factors, self.split(i), self.split(j)))

    @property
    def bottom(self) -> int:
        return self.join_index([f.bottom for f in self.factors])

    @property
    def top(self) -> int:
        return self.join_index([f.top for f in self.factors])

    def atom_indices(self) -> list[int]:
        out = []
        base = [f.bottom for f in self.factors]
        for pos, f in enumerate(self.factors):
            for a in f.atom_indices():
                comps = list(base)
                comps[pos] = a
                out.append(self.join_index(comps))
        return out

    def coatom_indices(self) -> list[int]:
        out = []
        base = [f.top for f in self.factors]
        for pos, f in enumerate(self.factors):
            for a in f.coatom_indices():
                comps = list(base)
                comps[pos] = a
                out.append(self.join_index(comps))
        return out

    def height(self) -> int:
        return sum(f.height() for f in self.factors)

    def dense(self, bound: int = DENSE_BOUND) -> DenseLattice:
        if self.size > bound:
            raise CapacityError(
                f"lattice of size {self.size} exceeds the dense bound {bound}", bound=bound
            )
        M = np.ones((1, 1), dtype=bool)
        for f in self.factors:
            M = np.kron(M, f.dense(bound).matrix)
        return DenseLattice(M, trusted=True)

    def __repr__(self) -> str:
        return f"<product lattice: {self.size} elements, {len(self.factors)} factors>"


class AdjoinedLattice(AbstractLattice):
    """A lattice with a fresh bottom and top glued on (indices size, size+1)."""

    def __init__(self, inner: AbstractLattice):
        self.inner = inner
        self.size = inner.size + 2

    def leq(self, i: int, j: int) -> bool:
        new_bottom, new_top = self.inner.size, self.inner.size + 1
        if i == new_bottom or j == new_top:
            return True
        if i == new_top:
            return j == new_top
        if j == new_bottom:
            return i == new_bottom
        return self.inner.leq(i, j)

    @property
    def bottom(self) -> int:
        return self.inner.size

    @property
    def top(self) -> int:
        return self.inner.size + 1

    def atom_indices(self) -> list[int]:
        return [self.inner.bottom]

    def coatom_indices(self) -> list[int]:
        return [self.inner.top]

    def height(self) -> int:
        return self.inner.height() + 2

    def dense(self, bound: int = DENSE_BOUND) -> DenseLattice:
        if self.size > bound:
            raise CapacityError(
                f"lattice of size {self.size} exceeds the dense bound {bound}", bound=bound
            )
        m = self.inner.size
        M = np.zeros((m + 2, m + 2), dtype=bool)
        M[:m, :m] = self.inner.dense(bound).matrix
        M[m, :] = True          # new bottom below everything
        M[:, m + 1] = True      # new top above everything
        M[m + 1, m] = False
        M[m + 1, m + 1] = True
        return DenseLattice(M, trusted=True)

    def __repr__(self) -> str:
        return f"<bounded extension: {self.size} elements>"


# -- constructors -----------------------------------------------------------------------


def mk_chain(k: int) -> DenseLattice:
    """Total order on k elements, bottom first."""
    if k < 1:
        raise PreconditionError("chain length must be positive")
    return DenseLattice(np.triu(np.ones((k, k), dtype=bool)), trusted=True)


def mk_quasi_antichain(n: int) -> DenseLattice:
    """M_n: bottom, n pairwise incomparable middles, top; M_0 is a point.

    M_1 is the 3-chain, matching the convention that the one-point lattice
    is M_0 and a unique middle element still counts as width 1.
    """
    if n < 0:
        raise PreconditionError("width must be nonnegative")
    if n == 0:
        return mk_chain(1)
    m = n + 2
    M = np.eye(m, dtype=bool)
    M[0, :] = True
    M[:, m - 1] = True
    return DenseLattice(M, trusted=True)


def cartesian(*factors: AbstractLattice) -> CartesianLattice:
    return CartesianLattice(factors)


def adjoin_bounds(inner: AbstractLattice) -> AdjoinedLattice:
    return AdjoinedLattice(inner)


def from_leq_matrix(matrix: np.ndarray) -> DenseLattice:
    """Validating constructor for externally supplied order relations."""
    return DenseLattice(matrix, trusted=False)


# -- basic queries -----------------------------------------------------------------------


def atoms(L: AbstractLattice) -> list[int]:
    return L.atom_indices()


def coatoms(L: AbstractLattice) -> list[int]:
    return L.coatom_indices()


def covers_matrix(L: AbstractLattice) -> np.ndarray:
    return L.dense().covers()


def quasi_antichain_width(L: AbstractLattice) -> Optional[int]:
    """The width n when L is M_n, else None.

    Once every atom is also a coatom, any non-bound element is forced to be
    an atom, so checking the atom set against the coatom set suffices.  The
    2-chain has its only atom equal to the top, hence reports None.
    """
    if L.size == 1:
        return 0
    atom_set = set(L.atom_indices())
    if not atom_set or not atom_set <= set(L.coatom_indices()):
        return None
    if L.size != len(atom_set) + 2:
        return None
    return len(atom_set)


def is_modular(L: AbstractLattice) -> tuple[bool, Optional[tuple[int, int, int]]]:
    """Exhaustive modular-law check; returns a violating triple on failure."""
    D = L.dense()
    meet, join = D.meet_table(), D.join_table()
    M = D.matrix
    m = D.size
    ar = np.arange(m)
    for b in range(m):
        lhs = join[:, meet[b]]            # lhs[a, c] = a v (b ^ c)
        rhs = meet[join[:, b]][:, ar]     # rhs[a, c] = (a v b) ^ c
        bad = M & (lhs != rhs)
        if bad.any():
            a, c = np.argwhere(bad)[0]
            return False, (int(a), int(b), int(c))
    return True, None


def complemented_elements(L: AbstractLattice) -> list[int]:
    """Indices admitting a complement (meet at bottom, join at top)."""
    D = L.dense()
    meet, join = D.meet_table(), D.join_table()
    has = (meet == D.bottom) & (join == D.top)
    return [int(i) for i in np.flatnonzero(has.any(axis=1))]


# -- isomorphism -------------------------------------------------------------------------


def _refine_colors(D: DenseLattice) -> np.ndarray:
    """Stable coloring refined by down/up color multisets (1-WL on the order)."""
    m = D.size
    colors = np.zeros(m, dtype=np.int64)
    base = list(zip(D.matrix.T.sum(axis=1), D.matrix.sum(axis=1), D.heights(), D.depths()))
    _, colors = np.unique(np.asarray(base), axis=0, return_inverse=True)
    for _ in range(m):
        signatures = []
        for i in range(m):
            down = tuple(sorted(colors[np.flatnonzero(D.matrix[:, i])].tolist()))
            up = tuple(sorted(colors[np.flatnonzero(D.matrix[i])].tolist()))
            signatures.append((int(colors[i]), down, up))
        uniq = {sig: pos for pos, sig in enumerate(sorted(set(signatures)))}
        new = np.asarray([uniq[sig] for sig in signatures], dtype=np.int64)
        if len(set(new.tolist())) == len(set(colors.tolist())):
            colors = new
            break
        colors = new
    return colors


def _search_isomorphism(A: DenseLattice, B: DenseLattice, *,
                        budget: int = ISO_NODE_BUDGET) -> Optional[list[int]]:
    """Backtracking order-isomorphism search with color classes; None is
    definitive (the search space was exhausted)."""
    m = A.size
    ca, cb = _refine_colors(A), _refine_colors(B)
    if sorted(ca.tolist()) != sorted(cb.tolist()):
        return None
    by_color: dict[int, list[int]] = {}
    for j in range(m):
        by_color.setdefault(int(cb[j]), []).append(j)
    # most constrained first: smallest class, then largest degree
    order = sorted(range(m), key=lambda i: (len(by_color[int(ca[i])]),
                                            -int(A.matrix[i].sum() + A.matrix[:, i].sum())))
    mapping = np.full(m, -1, dtype=np.int64)
    used = np.zeros(m, dtype=bool)
    Ma, Mb = A.matrix, B.matrix
    nodes = 0

    def descend(depth: int) -> bool:
        nonlocal nodes
        if depth == m:
            return True
        i = order[depth]
        for j in by_color[int(ca[i])]:
            if used[j]:
                continue
            nodes += 1
            if nodes > budget:
                raise CapacityError(
                    f"isomorphism search exceeded the node budget {budget}",
                    bound=budget,
                )
            ok = True
            for d in range(depth):
                i2 = order[d]
                j2 = mapping[i2]
                if Ma[i, i2] != Mb[j, j2] or Ma[i2, i] != Mb[j2, j]:
                    ok = False
                    break
            if ok:
                mapping[i] = j
                used[j] = True
                if descend(depth + 1):
                    return True
                used[j] = False
                mapping[i] = -1
        return False

    if descend(0):
        return [int(x) for x in mapping]
    return None


def is_isomorphic(L1: AbstractLattice, L2: AbstractLattice, *,
                  budget: int = ISO_NODE_BUDGET) -> Optional[list[int]]:
    """A bijection witness when the lattices are isomorphic, else None.

    Fingerprints (size first) resolve most pairs; mismatches are definitive
    without any search.  Ties beyond the backtracking size bound raise a
    capacity error rather than guessing.
    """
    if max(L1.size, L2.size) > ISO_SIZE_BOUND:
        raise CapacityError(
            f"lattice size exceeds the isomorphism bound {ISO_SIZE_BOUND}",
            bound=ISO_SIZE_BOUND,
        )
    if L1.fingerprint() != L2.fingerprint():
        return None
    if L1.size > ISO_BACKTRACK_BOUND:
        raise CapacityError(
            f"backtracking limited to {ISO_BACKTRACK_BOUND} elements",
            bound=ISO_BACKTRACK_BOUND,
        )
    return _search_isomorphism(L1.dense(), L2.dense(), budget=budget)


def is_self_dual(L: AbstractLattice, *, budget: int = ISO_NODE_BUDGET) -> Optional[list[int]]:
    """An order-reversing bijection witness, or None when there is none."""
    D = L.dense()
    return _search_isomorphism(D, D.dual(), budget=budget)


# -- factorization -----------------------------------------------------------------------


def find_factor_pair(L: AbstractLattice) -> Optional[tuple[int, int]]:
    """A complemented pair (a, b) making x -> (x ^ a, x ^ b) an isomorphism
    onto the product of the intervals below a and b, or None."""
    D = L.dense()
    m = D.size
    if m <= 1:
        return None
    meet, join = D.meet_table(), D.join_table()
    down_sizes = D.matrix.T.sum(axis=1)
    bot, top = D.bottom, D.top
    for a in range(m):
        if a in (bot, top):
            continue
        partners = np.flatnonzero((meet[a] == bot) & (join[a] == top))
        for b in partners:
            b = int(b)
            if b in (bot, top):
                continue
            if int(down_sizes[a]) * int(down_sizes[b]) != m:
                continue
            fa, fb = meet[:, a], meet[:, b]
            keys = fa.astype(np.int64) * m + fb
            if len(np.unique(keys)) != m:
                continue
            expected = D.matrix[np.ix_(fa, fa)] & D.matrix[np.ix_(fb, fb)]
            if (expected == D.matrix).all():
                return int(a), b
    return None


def factorize(L: AbstractLattice) -> list[DenseLattice]:
    """Indecomposable Cartesian factors, canonically ordered.

    Splits on complemented pairs whose meet projections reassemble the
    lattice, recursing on the two intervals; a lattice with no such pair is
    returned whole.
    """
    D = L.dense()
    pair = find_factor_pair(D)
    if pair is None:
        return [D]
    a, b = pair
    left = D.interval(D.bottom, a)
    right = D.interval(D.bottom, b)
    out = factorize(left) + factorize(right)
    out.sort(key=lambda f: (f.size, f.fingerprint()))
    return out
