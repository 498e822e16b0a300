"""The Chermak-Delgado measure and lattice, membership predicates, the
lattice-driven direct splitting, and the structural audit suite.

The fast path computes the lattice from the intersection closure of element
centralizers: every maximum-measure subgroup is a centralizer (it equals
the centralizer of its centralizer), so the closure family is guaranteed to
contain the whole lattice.  The exhaustive oracle over all subgroups exists
solely to validate that computation on small groups.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _bits, lattices
from .errors import CapacityError, InternalCheckError, PreconditionError
from .groups import (
    ORACLE_BOUND,
    FiniteGroup,
    Subgroup,
    all_subgroups,
    center,
    centralizer,
    conjugate_mask,
    core,
    element_centralizers,
    full_subgroup,
    generating_indices,
    is_directly_indecomposable,
    is_normal,
    normal_closure,
    subgroup_product,
    trivial_subgroup,
)

FAMILY_CAP = 200_000   # largest centralizer-closure family before giving up
ORDER_GUARD = 2**31    # measures fit comfortably in 64 bits below this order


@dataclass
class MeasuredSubgroup:
    """A subgroup with its centralizer and measure |H| * |C_G(H)|."""

    subgroup: Subgroup
    centralizer: Subgroup
    measure: int

    @property
    def order(self) -> int:
        return self.subgroup.order


def measure(G: FiniteGroup, H: Subgroup) -> MeasuredSubgroup:
    """Exact measure of H in G with the centralizer cached alongside."""
    if G.order > ORDER_GUARD:
        raise CapacityError(f"group order exceeds the measure guard {ORDER_GUARD}",
                            bound=ORDER_GUARD)
    C = centralizer(G, H)
    return MeasuredSubgroup(H, C, H.order * C.order)


class CentralizerFamily:
    """Intersection closure of the element centralizers of G.

    Contains the whole group, the center, and every subgroup H satisfying
    H = C_G(C_G(H)); in particular every maximum-measure subgroup.
    """

    def __init__(self, G: FiniteGroup, cent_ids: np.ndarray, cent_masks: list[int],
                 masks: list[int]):
        self.group = G
        self.cent_ids = cent_ids
        self.cent_masks = cent_masks
        self.masks = masks

    def centralizer_mask(self, mask: int) -> int:
        """C_G(set) as the meet of the per-element centralizers inside it."""
        idx = _bits.indices_from_mask(mask, self.group.order)
        out = (1 << self.group.order) - 1
        for cid in np.unique(self.cent_ids[idx]):
            out &= self.cent_masks[cid]
        return out


def _mask_closure(gen_masks: list[int], full: int, cap: int) -> set[int]:
    """Intersection closure of bitmasks; work items meet generators only."""
    family = set(gen_masks)
    family.add(full)
    work = list(family)
    while work:
        x = work.pop()
        for y in gen_masks:
            z = x & y
            if z not in family:
                family.add(z)
                if len(family) > cap:
                    raise CapacityError(
                        f"centralizer family exceeds the cap {cap}", bound=cap
                    )
                work.append(z)
    return family


def _product_family_masks(G: FiniteGroup, cap: int) -> Optional[list[int]]:
    """Family fast path for subgroups of direct products.

    A member centralizer is G n (A1 x ... x Ak) with each A_i in the factor
    closure family, and intersections meet componentwise; so the closure runs
    over packed per-factor family indices with tabulated factor meets, and
    masks are materialized once at the end.
    """
    from .groups import _product_split, element_centralizers as _ec

    split = _product_split(G)
    if split is None:
        return None
    _, comps, factors = split
    fam_idx_of = []     # per factor: element -> family index of its centralizer
    fam_rows = []       # per factor: family masks as bool rows
    meets = []          # per factor: meet table over family indices
    for f, c in zip(factors, comps):
        ids_f, cents_f = _ec(f)
        ffull = (1 << f.order) - 1
        fam = sorted(_mask_closure(cents_f, ffull, cap))
        pos = {m: i for i, m in enumerate(fam)}
        k = len(fam)
        meet = np.zeros((k, k), dtype=np.int64)
        for i in range(k):
            for j in range(k):
                meet[i, j] = pos[fam[i] & fam[j]]
        cent_pos = np.asarray([pos[m] for m in cents_f], dtype=np.int64)
        fam_idx_of.append(cent_pos[ids_f[c]])
        fam_rows.append(np.vstack([_bits.bools_from_mask(m, f.order) for m in fam]))
        meets.append(meet)

    radices = [len(rows) for rows in fam_rows]

    def pack(parts):
        out = parts[0].astype(np.int64)
        for p, r in zip(parts[1:], radices[1:]):
            out = out * r + p
        return out

    gen_codes = np.unique(pack(fam_idx_of))
    gen_parts = []
    rem = gen_codes.copy()
    for r in reversed(radices):
        gen_parts.append(rem % r)
        rem = rem // r
    gen_parts.reverse()

    full_code = 0
    for r, rows in zip(radices, fam_rows):
        full_idx = [i for i in range(r) if rows[i].all()]
        full_code = full_code * r + full_idx[0]
    known = set(int(c) for c in gen_codes)
    known.add(int(full_code))
    work = list(known)
    while work:
        t = work.pop()
        parts = []
        rem = t
        for r in reversed(radices):
            parts.append(rem % r)
            rem //= r
        parts.reverse()
        zp = [meets[i][parts[i], gen_parts[i]] for i in range(len(radices))]
        for z in np.unique(pack(zp)):
            z = int(z)
            if z not in known:
                known.add(z)
                if len(known) > cap:
                    raise CapacityError(
                        f"centralizer family exceeds the cap {cap}", bound=cap
                    )
                work.append(z)

    masks = set()
    for t in known:
        parts = []
        rem = t
        for r in reversed(radices):
            parts.append(rem % r)
            rem //= r
        parts.reverse()
        bools = fam_rows[0][parts[0]][comps[0]]
        for rows, p, c in zip(fam_rows[1:], parts[1:], comps[1:]):
            bools = bools & rows[p][c]
        masks.add(_bits.mask_from_bools(bools))
    return sorted(masks, key=lambda m: (m.bit_count(), m))


def centralizer_family(G: FiniteGroup, *, cap: int = FAMILY_CAP) -> CentralizerFamily:
    """Close the set {C_G(g)} u {G} under pairwise intersection.

    Intersecting work items against the generating centralizers only is
    enough: any intersection of generators is reachable incrementally.
    """

    def make():
        ids, cents = element_centralizers(G)
        masks = _product_family_masks(G, cap)
        if masks is None:
            full = (1 << G.order) - 1
            masks = sorted(_mask_closure(cents, full, cap),
                           key=lambda m: (m.bit_count(), m))
        return CentralizerFamily(G, ids, cents, masks)

    return G._cached(("centralizer_family", cap), make)


class CDLattice:
    """The family of maximum-measure subgroups, ordered by inclusion.

    Construction verifies the structural invariants (common measure, meet
    and join closure, centralizer duality, least element properties), so a
    CDLattice in hand is a certificate, not a claim.
    """

    def __init__(self, G: FiniteGroup, members: list[MeasuredSubgroup], mstar: int,
                 leq: np.ndarray):
        self.group = G
        self.members = members
        self.mstar = mstar
        self.leq = leq

    def __len__(self) -> int:
        return len(self.members)

    def mask_set(self) -> set[int]:
        return {m.subgroup.mask for m in self.members}

    def masks(self) -> list[int]:
        return [m.subgroup.mask for m in self.members]

    def index_of(self, mask: int) -> int:
        for i, m in enumerate(self.members):
            if m.subgroup.mask == mask:
                return i
        raise KeyError("mask is not a member")

    @property
    def bottom(self) -> MeasuredSubgroup:
        return self.members[0]

    @property
    def top(self) -> MeasuredSubgroup:
        return self.members[-1]

    def atoms(self) -> list[int]:
        return lattices.atoms(self.abstract())

    def coatoms(self) -> list[int]:
        return lattices.coatoms(self.abstract())

    def abstract(self) -> lattices.DenseLattice:
        """Forget the group structure, keep the inclusion order."""
        return self.group._cached(
            ("cd_abstract", len(self.members)),
            lambda: lattices.DenseLattice(self.leq.copy()),
        )

    def same_members(self, other: "CDLattice") -> bool:
        return self.mask_set() == other.mask_set()

    def __repr__(self) -> str:
        return (f"<CD lattice of {self.group.name}: {len(self.members)} members, "
                f"m* = {self.mstar}>")


def _assemble_lattice(G: FiniteGroup, pairs: list[tuple[int, int]], mstar: int) -> CDLattice:
    """Order the maximizers, then verify every structural invariant."""
    pairs = sorted(set(pairs), key=lambda mc: (mc[0].bit_count(), mc[0]))
    masks = [m for m, _ in pairs]
    mask_pos = {m: i for i, m in enumerate(masks)}
    cent_of = {m: c for m, c in pairs}

    for m, c in pairs:
        if m.bit_count() * c.bit_count() != mstar:
            raise InternalCheckError("member does not attain the maximum measure")
        if c not in mask_pos:
            raise InternalCheckError("member centralizer escapes the member set")
        if cent_of[c] != m:
            raise InternalCheckError("centralizer duality C(C(H)) = H fails")

    k = len(masks)
    for i in range(k):
        for j in range(i + 1, k):
            if masks[i] & masks[j] not in mask_pos:
                raise InternalCheckError("member set is not meet-closed")

    # Join closure without forming products: the smallest member above H u K
    # is the meet of all members above it, and it equals the set product HK
    # exactly when its order is |H||K|/|H n K|.
    orders = [m.bit_count() for m in masks]
    for i in range(k):
        for j in range(i + 1, k):
            union = masks[i] | masks[j]
            join_mask = None
            for m in masks:
                if _bits.is_subset(union, m):
                    join_mask = m if join_mask is None else join_mask & m
            if join_mask is None or join_mask not in mask_pos:
                raise InternalCheckError("member set has a pair with no join")
            inter = (masks[i] & masks[j]).bit_count()
            if join_mask.bit_count() * inter != orders[i] * orders[j]:
                raise InternalCheckError("join of members is not their set product")

    bottom = masks[0]
    for m in masks:
        bottom &= m
    if bottom != masks[0]:
        raise InternalCheckError("least member is not below every member")
    bottom_sub = Subgroup(G, bottom)
    if not _bits.is_subset(bottom, cent_of[bottom]):
        raise InternalCheckError("least member is not abelian")
    if not is_normal(G, bottom_sub):
        raise InternalCheckError("least member is not normal")
    if not _bits.is_subset(center(G).mask, bottom):
        raise InternalCheckError("least member does not contain the center")
    top = masks[-1]
    if any(not _bits.is_subset(m, top) for m in masks):
        raise InternalCheckError("greatest member is not above every member")

    leq = np.zeros((k, k), dtype=bool)
    for i in range(k):
        for j in range(k):
            leq[i, j] = _bits.is_subset(masks[i], masks[j])

    members = [
        MeasuredSubgroup(Subgroup(G, m), Subgroup(G, cent_of[m]), mstar) for m in masks
    ]
    return CDLattice(G, members, mstar, leq)


def cd_lattice(G: FiniteGroup, *, cap: int = FAMILY_CAP) -> CDLattice:
    """The maximum-measure sublattice, from the centralizer closure family."""

    def make():
        if G.order > ORDER_GUARD:
            raise CapacityError(f"group order exceeds the measure guard {ORDER_GUARD}",
                                bound=ORDER_GUARD)
        family = centralizer_family(G, cap=cap)
        best = -1
        pairs: list[tuple[int, int]] = []
        for mask in family.masks:
            cmask = family.centralizer_mask(mask)
            m = mask.bit_count() * cmask.bit_count()
            if m > best:
                best = m
                pairs = [(mask, cmask)]
            elif m == best:
                pairs.append((mask, cmask))
        return _assemble_lattice(G, pairs, best)

    return G._cached(("cd_lattice", cap), make)


def cd_lattice_oracle(G: FiniteGroup, *, bound: int = ORACLE_BOUND) -> CDLattice:
    """Same lattice, computed by exhaustive measure over all subgroups."""

    def make():
        subs = all_subgroups(G, bound=bound)
        best = -1
        pairs: list[tuple[int, int]] = []
        for H in subs:
            C = centralizer(G, H)
            m = H.order * C.order
            if m > best:
                best = m
                pairs = [(H.mask, C.mask)]
            elif m == best:
                pairs.append((H.mask, C.mask))
        return _assemble_lattice(G, pairs, best)

    return G._cached(("cd_lattice_oracle", bound), make)


def cd_subgroup(G: FiniteGroup) -> Subgroup:
    """The least maximum-measure subgroup (abelian, normal, contains the center)."""
    return cd_lattice(G).bottom.subgroup


def is_cd_simple(G: FiniteGroup) -> bool:
    """Whether the lattice is exactly {1, G} (degenerate trivial group included)."""
    expected = {1 << G.identity, (1 << G.order) - 1}
    return cd_lattice(G).mask_set() == expected


def is_cd_minimal(G: FiniteGroup) -> bool:
    """Trivial least member plus direct indecomposability."""
    if cd_lattice(G).bottom.order != 1:
        return False
    return is_directly_indecomposable(G)


def split_from_lattice(G: FiniteGroup) -> Optional[tuple[Subgroup, Subgroup]]:
    """Recover a direct-product splitting of G from a lattice factorization.

    Requires the trivial subgroup to be a member.  When the abstract lattice
    splits as a Cartesian product, the members sitting at (top1, bottom2)
    and (bottom1, top2) are verified complementary normal subgroups and
    returned; an indecomposable lattice yields None.
    """
    L = cd_lattice(G)
    if L.bottom.order != 1:
        raise PreconditionError("splitting requires the trivial subgroup as a member")
    pair = lattices.find_factor_pair(L.abstract())
    if pair is None:
        return None
    a, b = pair
    H = L.members[a].subgroup
    K = L.members[b].subgroup
    ident = 1 << G.identity
    if H.mask & K.mask != ident:
        raise InternalCheckError("factor members are not disjoint")
    if H.order * K.order != G.order:
        raise InternalCheckError("factor members do not span the group")
    prod_mask, permuting = subgroup_product(G, H, K)
    if not permuting or prod_mask != (1 << G.order) - 1:
        raise InternalCheckError("factor members do not multiply out to the group")
    if not is_normal(G, H) or not is_normal(G, K):
        raise InternalCheckError("factor members are not normal")
    return H, K


# -- structural audit -----------------------------------------------------------------


@dataclass
class AuditCheck:
    """One audited structural fact: pass, fail, or skipped with a reason."""

    name: str
    status: str  # "pass" | "fail" | "skipped"
    detail: str = ""


def _two_primes(n: int) -> bool:
    count = 0
    d = 2
    while d * d <= n:
        if n % d == 0:
            count += 1
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        count += 1
    return count >= 2


def _member_is_cyclic(G: FiniteGroup, sub: Subgroup) -> bool:
    orders = G.element_orders()[sub.indices()]
    return bool((orders == sub.order).any())


def property_audit(G: FiniteGroup, *, oracle_bound: int = ORACLE_BOUND) -> list[AuditCheck]:
    """Audit the computed lattice against the expected structural facts.

    Checks that need the exhaustive subgroup oracle are skipped (with a
    reason) above its bound; checks whose premise does not hold are reported
    as skipped rather than vacuously passing.
    """
    L = cd_lattice(G)
    checks: list[AuditCheck] = []
    members = L.members
    k = len(members)
    full_mask = (1 << G.order) - 1
    ident_mask = 1 << G.identity
    trivial_in = ident_mask in L.mask_set()
    full_in = full_mask in L.mask_set()

    def add(name: str, ok: bool, detail: str = ""):
        checks.append(AuditCheck(name, "pass" if ok else "fail", detail))

    def skip(name: str, reason: str):
        checks.append(AuditCheck(name, "skipped", reason))

    # descent: for members H and arbitrary K, K below the closure of the
    # K-conjugates of H forces K below H; properly above H it stays proper.
    if G.order <= oracle_bound:
        ok = True
        detail = ""
        subs = all_subgroups(G, bound=oracle_bound)
        for mem in members:
            H = mem.subgroup
            for K in subs:
                HK = normal_closure(G, H, K)
                if _bits.is_subset(K.mask, HK.mask) and not _bits.is_subset(K.mask, H.mask):
                    ok, detail = False, f"|H| = {H.order}, |K| = {K.order}"
                    break
                if H < K and not HK < K:
                    ok, detail = False, f"closure not proper: |H| = {H.order}"
                    break
            if not ok:
                break
        add("descent", ok, detail)
    else:
        skip("descent", f"order {G.order} above the oracle bound {oracle_bound}")

    ok = all(
        normal_closure(G, mem.subgroup, full_mask).order < G.order
        for mem in members
        if mem.subgroup.order < G.order
    )
    add("proper-normal-closure", ok)

    Z = center(G)
    ok = True
    for mem in members:
        Ksub = mem.subgroup
        if Z < Ksub:
            co = core(G, Ksub, full_mask)
            if not (Z < co):
                ok = False
                break
    add("core-above-center", ok)

    covers = lattices.covers_matrix(L.abstract())
    ok = True
    for i in range(k):
        for j in range(k):
            if covers[i, j]:
                H, K = members[i].subgroup, members[j].subgroup
                gens = generating_indices(G, K)
                if any(conjugate_mask(G, H.mask, g) != H.mask for g in gens):
                    ok = False
    add("covering-normality", ok)

    if full_in:
        edge = [members[i].subgroup for i in L.atoms()] + [members[i].subgroup for i in L.coatoms()]
        add("atom-coatom-normal", all(is_normal(G, s) for s in edge))
    else:
        skip("atom-coatom-normal", "whole group is not a member")

    ok = True
    for i in range(k):
        for j in range(k):
            if i != j and L.leq[i, j]:
                K, H = members[i], members[j]
                if H.order * K.centralizer.order != K.order * H.centralizer.order:
                    ok = False
    add("index-transfer", ok)

    if trivial_in:
        nontriv = [m.subgroup for m in members if 1 < m.order]
        add("no-p-group-members",
            all(_two_primes(s.order) for s in nontriv))
        proper = [m.subgroup for m in members if m.order < G.order]
        add("no-prime-power-index",
            all(_two_primes(G.order // s.order) for s in proper))
        add("no-cyclic-members",
            not any(_member_is_cyclic(G, s) for s in nontriv))
    else:
        for name in ("no-p-group-members", "no-prime-power-index", "no-cyclic-members"):
            skip(name, "trivial subgroup is not a member")

    minimal = trivial_in and is_directly_indecomposable(G)
    if minimal and not is_cd_simple(G):
        atom_idx, coatom_idx = L.atoms(), L.coatoms()
        ok = all(L.leq[a, b] for a in atom_idx for b in coatom_idx)
        add("atoms-below-coatoms", ok)
        ok = True
        for a in atom_idx:
            A = members[a].subgroup
            if not (A.is_abelian() and is_normal(G, A) and _two_primes(A.order)):
                ok = False
        add("atoms-abelian-two-primes", ok)
    else:
        reason = "group is not CD-minimal" if not minimal else "lattice is {1, G}"
        skip("atoms-below-coatoms", reason)
        skip("atoms-abelian-two-primes", reason)

    return checks
