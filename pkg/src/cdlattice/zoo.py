"""Concrete group constructions: named small groups, unitriangular matrix
groups and their scaling/power automorphisms, the triple-quaternion quotient,
and the subdirect-product builder for compound CD-minimal examples.

Element indexing conventions are fixed per constructor (documented on each)
so that serialized subgroups are reproducible across runs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations
from typing import Optional, Sequence

import numpy as np

from . import _bits
from .errors import CapacityError, InternalCheckError, PreconditionError
from .fields import GF, make_field
from .groups import (
    FiniteGroup,
    GroupAction,
    GroupMap,
    PermutationGroup,
    Subgroup,
    SubgroupGroup,
    TableGroup,
    all_subgroups,
    automorphisms,
    center,
    direct_product,
    quotient,
    semidirect_product,
    trivial_subgroup,
)

THM2_AMBIENT_CAP = 200_000  # largest direct-product ambient the pullback will scan


# -- named small groups ---------------------------------------------------------------
# Two-parameter presentations are packed as index = i * (order of second part) + j.


def cyclic(k: int) -> TableGroup:
    """Z_k in additive notation; index i is the residue i."""
    if k < 1:
        raise PreconditionError("cyclic group order must be positive")
    ar = np.arange(k)
    table = (ar[:, None] + ar[None, :]) % k
    return TableGroup(table, name=f"Z{k}", labels=[str(i) for i in range(k)])


def elementary_abelian(p: int, k: int) -> TableGroup:
    """(Z_p)^k; index encodes the vector in base p, first coordinate lowest."""
    field = make_field(p, 1)
    q = p**k
    digits = np.zeros((q, k), dtype=np.int64)
    rem = np.arange(q)
    for pos in range(k):
        digits[:, pos] = rem % p
        rem = rem // p
    weights = p ** np.arange(k)
    table = np.zeros((q, q), dtype=np.int64)
    for i in range(q):
        table[i] = ((digits[i][None, :] + digits) % p) @ weights
    labels = ["(" + ",".join(str(d) for d in digits[i]) + ")" for i in range(q)]
    del field
    return TableGroup(table, name=f"E{p}^{k}", labels=labels)


def symmetric(n: int) -> FiniteGroup:
    """S_n on points 0..n-1; elements in lexicographic image-row order."""
    if not 1 <= n <= 8:
        raise PreconditionError("symmetric groups are supported for 1 <= n <= 8")
    rows = np.array(list(permutations(range(n))), dtype=np.int32)
    perm = PermutationGroup(rows, name=f"S{n}")
    return perm.with_table() if perm.order <= 720 else perm


def dihedral(n: int) -> TableGroup:
    """Dihedral group of order 2n; index = 2*rotation + flip."""
    if n < 1:
        raise PreconditionError("dihedral parameter must be positive")
    idx = np.arange(2 * n)
    i1, j1 = (idx // 2)[:, None], (idx % 2)[:, None]
    i2, j2 = (idx // 2)[None, :], (idx % 2)[None, :]
    sign = 1 - 2 * j1
    table = ((i1 + sign * i2) % n) * 2 + (j1 ^ j2)
    labels = [f"r{i}" if j == 0 else f"r{i}s" for i, j in zip(idx // 2, idx % 2)]
    return TableGroup(table, name=f"D{2 * n}", labels=labels)


def quaternion8() -> TableGroup:
    """Q8 as x^a y^b with x^4 = 1, y^2 = x^2, y^-1 x y = x^-1; index = 2a + b."""
    idx = np.arange(8)
    a1, b1 = (idx // 2)[:, None], (idx % 2)[:, None]
    a2, b2 = (idx // 2)[None, :], (idx % 2)[None, :]
    plain = ((a1 + a2) % 4) * 2 + b2                      # b1 == 0
    carry = 2 * (b2 & 1)                                  # y^2 = x^2 when both flips
    flip = ((a1 - a2 + carry) % 4) * 2 + (1 - b2)         # b1 == 1
    table = np.where(b1 == 0, plain, flip)
    labels = ["1", "j", "i", "k", "-1", "-j", "-i", "-k"]
    return TableGroup(table, name="Q8", labels=labels)


def qd16() -> TableGroup:
    """Quasidihedral group of order 16: r^8 = s^2 = 1, s r s = r^3; index = 2i + j."""
    idx = np.arange(16)
    i1, j1 = (idx // 2)[:, None], (idx % 2)[:, None]
    i2, j2 = (idx // 2)[None, :], (idx % 2)[None, :]
    twist = np.where(j1 == 1, 3, 1)
    table = ((i1 + twist * i2) % 8) * 2 + (j1 ^ j2)
    labels = [f"r{i}" if j == 0 else f"r{i}s" for i, j in zip(idx // 2, idx % 2)]
    return TableGroup(table, name="QD16", labels=labels)


def extraspecial(p: int, kind: str) -> FiniteGroup:
    """Extraspecial group of order p^3.

    kind "+" is the dihedral / exponent-p type, "-" the quaternion /
    exponent-p^2 type (aliases: d8, q8, exp-p, exp-p2).
    """
    kind = {"d8": "+", "q8": "-", "exp-p": "+", "exp-p2": "-"}.get(kind, kind)
    if kind not in ("+", "-"):
        raise PreconditionError(f"unknown extraspecial kind {kind!r}")
    if p == 2:
        return dihedral(4) if kind == "+" else quaternion8()
    if kind == "+":
        g = unitriangular(p, 1)
        g.name = f"ES{p}+"
        return g
    # exponent p^2: <a, b | a^(p^2) = b^p = 1, b a b^-1 = a^(1+p)>; index = i*p + j
    psq = p * p
    idx = np.arange(psq * p)
    i1, j1 = (idx // p)[:, None], (idx % p)[:, None]
    i2, j2 = (idx // p)[None, :], (idx % p)[None, :]
    twist = pow(1 + p, 1, psq) ** j1 % psq
    table = ((i1 + twist * i2) % psq) * p + (j1 + j2) % p
    labels = [f"a{i}b{j}" if j else f"a{i}" for i, j in zip(idx // p, idx % p)]
    return TableGroup(table, name=f"ES{p}-", labels=labels)


# -- unitriangular groups --------------------------------------------------------------


class UnitriangularGroup(FiniteGroup):
    """Lower unitriangular 3x3 matrices over GF(q), on the below-diagonal
    entries (a, b, c); index = a*q^2 + b*q + c.

    The entrywise law is (a1,b1,c1)(a2,b2,c2) = (a1+a2, b1+b2+c1*a2, c1+c2);
    the center is the set of (0, b, 0).
    """

    def __init__(self, p: int, n: int, field: Optional[GF] = None):
        self.field = field or make_field(p, n)
        q = self.field.q
        super().__init__(f"UT(3,{q})", q**3, 0)

    def split(self, idx):
        q = self.field.q
        idx = np.asarray(idx, dtype=np.int64)
        return idx // (q * q), (idx // q) % q, idx % q

    def join(self, a, b, c):
        q = self.field.q
        return (np.asarray(a, dtype=np.int64) * q + np.asarray(b, dtype=np.int64)) * q + np.asarray(
            c, dtype=np.int64
        )

    def mul_arr(self, x, y):
        F = self.field
        a1, b1, c1 = self.split(x)
        a2, b2, c2 = self.split(y)
        a = F.add_table[a1, a2]
        b = F.add_table[F.add_table[b1, b2], F.mul_table[c1, a2]]
        c = F.add_table[c1, c2]
        return self.join(a, b, c)

    def inv_arr(self, x):
        # (a,b,c)^-1 = (-a, ca - b, -c)
        F = self.field
        a, b, c = self.split(x)
        na = F.neg_table[a]
        nc = F.neg_table[c]
        nb = F.add_table[F.mul_table[c, a], F.neg_table[b]]
        return self.join(na, nb, nc)

    def label(self, i: int) -> str:
        a, b, c = self.split(i)
        return f"[{self.field.element(int(a))!r};{self.field.element(int(b))!r};{self.field.element(int(c))!r}]"

    def center_indices(self) -> np.ndarray:
        q = self.field.q
        return np.arange(q) * q


def unitriangular(p: int, n: int) -> UnitriangularGroup:
    return UnitriangularGroup(p, n)


# -- action components for the subdirect construction -----------------------------------


@dataclass
class ComponentTriple:
    """A p-group with an acting group by automorphisms, ready for the
    subdirect builder; named_generators records distinguished acting
    elements (e.g. the scaling and power maps r, s)."""

    P: FiniteGroup
    T: FiniteGroup
    action: GroupAction
    name: str = ""
    named_generators: dict = field(default_factory=dict)
    aux: dict = field(default_factory=dict)


def prop9_action(p: int, n: int) -> ComponentTriple:
    """UT(3, p^n) with the acting group generated by the unit scaling r
    ((a,b,c) -> (xa, xb, c) for a fixed unit-group generator x) and the
    coordinatewise p-th power s; their group has order n*(p^n - 1) and
    satisfies s^-1 r s = r^p.
    """
    P = unitriangular(p, n)
    F = P.field
    q = F.q
    ar = np.arange(P.order)
    a, b, c = P.split(ar)
    x = F.generator
    r_row = P.join(F.mul_table[x, a], F.mul_table[x, b], c)
    s_row = P.join(F.frobenius[a], F.frobenius[b], F.frobenius[c])
    T, index_of = _permutation_closure([r_row, s_row], names=["r", "s"], name=f"T({p},{n})")
    action = GroupAction(T, P, T.perm_rows).check()
    expected = n * (q - 1)
    if T.order != expected:
        raise InternalCheckError(f"acting group has order {T.order}, expected {expected}")
    triple = ComponentTriple(P, T, action, name=f"prop9({p},{n})",
                             named_generators=index_of)
    _check_scaling_relations(triple, p, q, n)
    return triple


def _check_scaling_relations(triple: ComponentTriple, p: int, q: int, n: int) -> None:
    from .groups import group_pow

    T = triple.T
    r = triple.named_generators["r"]
    s = triple.named_generators["s"]
    orders = T.element_orders()
    if int(orders[r]) != q - 1 or int(orders[s]) != n:
        raise InternalCheckError("scaling/power generators have wrong orders")
    lhs = T.mul(T.mul(T.inv(s), r), s)
    if lhs != group_pow(T, r, p):
        raise InternalCheckError("conjugation relation s^-1 r s = r^p fails")


class _PermTableGroup(TableGroup):
    """Table group whose elements are permutation rows of some domain."""

    perm_rows: np.ndarray


def _permutation_closure(gen_rows: Sequence[np.ndarray], names: Sequence[str],
                         name: str) -> tuple[_PermTableGroup, dict]:
    """Close permutation rows under composition; BFS order from the identity.

    Returns the group (mul = composition, apply right map first) and the
    indices of the named generator rows.
    """
    degree = len(gen_rows[0])
    ident = np.arange(degree, dtype=np.int64)
    rows = [ident]
    index = {ident.tobytes(): 0}
    frontier = [ident]
    gen_rows = [np.asarray(g, dtype=np.int64) for g in gen_rows]
    while frontier:
        nxt = []
        for row in frontier:
            for g in gen_rows:
                prod = row[g]
                key = prod.tobytes()
                if key not in index:
                    index[key] = len(rows)
                    rows.append(prod)
                    nxt.append(prod)
        frontier = nxt
    k = len(rows)
    if k > 4096:
        raise CapacityError(f"permutation closure of order {k} exceeds the table bound", bound=4096)
    table = np.zeros((k, k), dtype=np.int32)
    for i in range(k):
        for j in range(k):
            table[i, j] = index[rows[i][rows[j]].tobytes()]
    group = _PermTableGroup.__new__(_PermTableGroup)
    TableGroup.__init__(group, table, name=name)
    group.perm_rows = np.vstack(rows)
    named = {nm: index[np.asarray(g).tobytes()] for nm, g in zip(names, gen_rows)}
    return group, named


def minimal_component(p: int) -> ComponentTriple:
    """Elementary abelian (Z_p)^2 acted on by the required small subgroup of
    its automorphism group: everything for p = 2, a Sylow 2-subgroup
    (generated by an order-8 map r and an order-2 map s with s r s = r^3)
    for p = 3.
    """
    P = elementary_abelian(p, 2)
    auts = automorphisms(P)
    if p == 2:
        rows = [a.images for a in auts]
        T, _ = _permutation_closure(rows, names=[], name="Aut(E2^2)")
        action = GroupAction(T, P, T.perm_rows).check()
        return ComponentTriple(P, T, action, name="minimal(2)")
    if p != 3:
        raise PreconditionError("minimal components exist for p in {2, 3} only")
    by_order: dict[int, list[np.ndarray]] = {}
    for a in auts:
        k, cur = 1, a.images
        ident = np.arange(P.order)
        while not (cur == ident).all():
            cur = a.images[cur]
            k += 1
        by_order.setdefault(k, []).append(a.images)
    for r_row in by_order.get(8, []):
        r3 = r_row[r_row[r_row]]
        for s_row in by_order.get(2, []):
            if (s_row[r_row[s_row]] == r3).all():
                T, named = _permutation_closure([r_row, s_row], names=["r", "s"],
                                                name="SylP2(Aut(E3^2))")
                if T.order == 16:
                    action = GroupAction(T, P, T.perm_rows).check()
                    return ComponentTriple(P, T, action, name="minimal(3)",
                                           named_generators=named)
    raise InternalCheckError("no quasidihedral acting group found in Aut((Z3)^2)")


def brewster_component() -> ComponentTriple:
    """The quotient of Q8 x Q8 x Q8 by the diagonal of the centers, with the
    coordinate-permutation action of S3."""
    Q = quaternion8()
    amb = direct_product([Q, Q, Q], name="Q8^3")
    zq = center(Q).indices()
    noncentral = int(zq[zq != Q.identity][0])
    diag = Subgroup.from_indices(
        amb, [amb.identity, int(amb.join([noncentral] * 3))]
    )
    P, proj = quotient(amb, diag)
    P.name = "Q8^3/D"
    s3 = PermutationGroup(np.array(list(permutations(range(3))), dtype=np.int32), name="S3")
    comps = amb.split(np.arange(amb.order))
    perms = np.zeros((s3.order, P.order), dtype=np.int64)
    for t in range(s3.order):
        sigma = s3.perms[t]
        moved = [None] * 3
        for src in range(3):
            moved[int(sigma[src])] = comps[src]
        permuted = amb.join(moved)
        perms[t, proj.images] = proj.images[permuted]
    action = GroupAction(s3, P, perms).check()
    return ComponentTriple(P, s3, action, name="brewster",
                           aux={"ambient": amb, "projection": proj, "q8": Q})


# -- the subdirect product builder --------------------------------------------------------


@dataclass
class HypothesisClause:
    name: str
    ok: bool
    detail: str


@dataclass
class HypothesisReport:
    """Structured result of the component admissibility check."""

    clauses: list[HypothesisClause]
    normal_part: Optional[Subgroup] = None     # H with [P]H of index 2 in [P]T
    complement: Optional[Subgroup] = None      # K of order 2 with T = [H]K

    @property
    def passed(self) -> bool:
        return all(c.ok for c in self.clauses)

    def failures(self) -> list[str]:
        return [c.name for c in self.clauses if not c.ok]


def hypothesis_check(P: FiniteGroup, T: FiniteGroup, action: GroupAction,
                     expected_prime: int, expected_center_rank: int = 2) -> HypothesisReport:
    """Check a component against the subdirect construction's requirements.

    Clauses: P is a p-group for the expected prime; P attains the maximum
    measure in its own lattice; the center is elementary abelian of the
    expected rank; T splits as [H]K with the required orders (|H| = 3 for
    p = 2, |H| = 8 for p = 3, |K| = 2); the action restricted to the center
    is faithful and irreducible.
    """
    from . import cd

    clauses: list[HypothesisClause] = []

    def add(name: str, ok: bool, detail: str = ""):
        clauses.append(HypothesisClause(name, bool(ok), detail))

    p = expected_prime
    order = P.order
    is_p = order > 1
    while is_p and order % p == 0:
        order //= p
    add("p-group", is_p and order == 1, f"|P| = {P.order}")

    lattice = cd.cd_lattice(P)
    full_mask = (1 << P.order) - 1
    add("ambient-in-lattice", full_mask in lattice.mask_set(), f"{len(lattice.members)} members")

    Z = center(P)
    rank_ok = Z.order == p**expected_center_rank
    if rank_ok:
        zorders = P.element_orders()[Z.indices()]
        rank_ok = bool((zorders[zorders > 1] == p).all())
    add("center-elementary-rank", rank_ok, f"|Z(P)| = {Z.order}")

    expected_h = 3 if p == 2 else 8
    found_h = found_k = None
    for H in all_subgroups(T):
        if H.order != expected_h or not _is_normal_in(T, H):
            continue
        for K in all_subgroups(T):
            if K.order != 2 or (H.mask & K.mask).bit_count() != 1:
                continue
            if H.order * K.order == T.order:
                found_h, found_k = H, K
                break
        if found_h is not None:
            break
    add("acting-group-structure", found_h is not None,
        f"|T| = {T.order}, wanted [H]K with |H| = {expected_h}, |K| = 2")

    try:
        action.check()
        add("action-valid", True)
    except PreconditionError as exc:
        add("action-valid", False, str(exc))

    add("faithful-on-center", action.kernel_on(Z).order == 1)

    zidx = Z.indices()
    zgrp = SubgroupGroup(P, zidx)
    reducible = False
    for sub in all_subgroups(zgrp):
        if 1 < sub.order < Z.order:
            lifted = _bits.mask_from_indices(zidx[sub.indices()], P.order)
            if action.invariant_mask(lifted):
                reducible = True
                break
    add("irreducible-on-center", not reducible)

    return HypothesisReport(clauses, normal_part=found_h, complement=found_k)


def _is_normal_in(G: FiniteGroup, sub: Subgroup) -> bool:
    from .groups import conjugate_mask

    return all(conjugate_mask(G, sub.mask, g) == sub.mask for g in G.generators)


def theorem2_build(components: Sequence[ComponentTriple], *,
                   ambient_cap: int = THM2_AMBIENT_CAP) -> SubgroupGroup:
    """Assemble the subdirect product S from three admissible components.

    S lives inside G1 x G2 x G3 (G_i = [P_i]T_i) as the pullback of the
    three canonical order-2 quotients G_i -> G_i/[P_i]H_i, i.e. all triples
    whose parities agree.  The construction is verified before returning:
    |S| = |G1||G2||G3|/4, every projection is onto, S meets each factor in
    exactly [P_i]H_i, and S meets K1 x K2 x K3 in the diagonal.
    """
    if len(components) != 3:
        raise PreconditionError("the subdirect builder takes exactly three components")
    expected_primes = (2, 2, 3)
    reports = []
    for comp, p in zip(components, expected_primes):
        report = hypothesis_check(comp.P, comp.T, comp.action, p)
        if not report.passed:
            raise PreconditionError(
                f"component {comp.name or comp.P.name} fails: {', '.join(report.failures())}"
            )
        reports.append(report)

    factors = []
    parities = []
    complements = []
    for comp, report in zip(components, reports):
        G = semidirect_product(comp.P, comp.T, comp.action,
                               name=f"[{comp.P.name}]{comp.T.name}")
        h_bools = _bits.bools_from_mask(report.normal_part.mask, comp.T.order)
        t_part = np.arange(G.order) % comp.T.order
        parities.append(~h_bools[t_part])
        k_idx = report.complement.indices()
        k_elem = int(k_idx[k_idx != comp.T.identity][0])
        complements.append(int(G.join(comp.P.identity, k_elem)))
        factors.append(G)

    ambient = direct_product(factors, name="G1xG2xG3")
    if ambient.order > ambient_cap:
        raise CapacityError(
            f"pullback ambient of order {ambient.order} exceeds the cap {ambient_cap}",
            bound=ambient_cap,
        )
    comps = ambient.split(np.arange(ambient.order))
    par = [parities[i][comps[i]] for i in range(3)]
    member = (par[0] == par[1]) & (par[1] == par[2])
    S = SubgroupGroup(ambient, np.flatnonzero(member), name="S")

    if S.order * 4 != ambient.order:
        raise InternalCheckError("pullback has wrong index in the ambient product")
    sub_comps = ambient.split(S.ambient_indices)
    for i, G in enumerate(factors):
        if len(np.unique(sub_comps[i])) != G.order:
            raise InternalCheckError(f"projection {i} of the pullback is not onto")
    for i, G in enumerate(factors):
        embedded = [g.identity for g in factors]
        inside = []
        for x in range(G.order):
            embedded[i] = x
            inside.append(int(ambient.join(embedded)))
        flags = member[np.asarray(inside)]
        expect = ~parities[i]
        if not (flags == expect).all():
            raise InternalCheckError(f"pullback meets factor {i} in the wrong subgroup")
    diag = []
    for bits_ in range(8):
        tup = [
            complements[i] if (bits_ >> i) & 1 else factors[i].identity
            for i in range(3)
        ]
        if member[int(ambient.join(tup))]:
            diag.append(bits_)
    if diag != [0, 7]:
        raise InternalCheckError("pullback does not meet the complements diagonally")

    S.components = list(components)
    S.component_reports = reports
    S.component_factors = factors
    return S


def s0() -> SubgroupGroup:
    """The flagship CD-minimal group of order 20736, from the minimal
    elementary abelian components."""
    S = theorem2_build([minimal_component(2), minimal_component(2), minimal_component(3)])
    S.name = "S0"
    return S


# -- dispatch used by the spec parser -----------------------------------------------------


def named_group(atom: str, *params) -> FiniteGroup:
    builders = {
        "cyclic": cyclic,
        "elemabelian": elementary_abelian,
        "sym": symmetric,
        "dih": dihedral,
        "q8": quaternion8,
        "qd16": qd16,
        "extraspecial": extraspecial,
        "ut": unitriangular,
    }
    try:
        build = builders[atom]
    except KeyError:
        raise PreconditionError(f"unknown group atom {atom!r}") from None
    return build(*params)
