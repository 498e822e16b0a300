"""Verification suites: every advertised structural fact as a checkable claim.

Each claim runs independently and reports pass/fail/skipped with evidence;
the CLI and the acceptance tests share these implementations.  Claim
execution is pure, so suites parallelize over a thread pool, and output
ordering is canonical (by claim id) regardless of scheduling.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import _bits, cd, corpus, lattices, zoo
from .errors import CDLatticeError, CapacityError
from .groups import (
    Subgroup,
    all_subgroups,
    find_isomorphism,
    group_pow,
    is_directly_indecomposable,
    subgroup_product,
)

SUITES = ("core", "paper", "table12")


@dataclass
class ClaimResult:
    claim_id: str
    status: str            # "pass" | "fail" | "skipped"
    evidence: str = ""
    seconds: float = 0.0

    def as_dict(self) -> dict:
        return {
            "claim_id": self.claim_id,
            "status": self.status,
            "evidence": self.evidence,
            "seconds": round(self.seconds, 3),
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "ClaimResult":
        return cls(payload["claim_id"], payload["status"], payload["evidence"],
                   payload["seconds"])


@dataclass
class RunConfig:
    suites: tuple[str, ...] = SUITES
    max_order: int = 128
    threads: int = field(default_factory=lambda: int(os.environ.get("CDLAT_THREADS", "1")))
    include_flagship: bool = True


def _claim(claim_id: str, fn: Callable[[], tuple[bool, str]]) -> ClaimResult:
    start = time.time()
    try:
        ok, evidence = fn()
        status = "pass" if ok else "fail"
    except CapacityError as exc:
        status, evidence = "skipped", f"capacity: {exc}"
    return ClaimResult(claim_id, status, evidence, time.time() - start)


# -- core suite ------------------------------------------------------------------------


def claim_oracle_equivalence(max_order: int = 128) -> ClaimResult:
    def run():
        groups_list = corpus.oracle_corpus(max_order)
        mismatches = []
        for spec, G in groups_list:
            fast = cd.cd_lattice(G)
            slow = cd.cd_lattice_oracle(G)
            if not fast.same_members(slow) or fast.mstar != slow.mstar:
                mismatches.append(spec)
        if mismatches:
            return False, f"disagreement on {mismatches}"
        return True, f"{len(groups_list)} groups agree member-for-member"

    return _claim("oracle-equiv", run)


def _audit_claims(max_order: int) -> list[ClaimResult]:
    """Aggregate the per-group structural audit across the corpus."""
    start = time.time()
    rows: dict[str, list[tuple[str, cd.AuditCheck]]] = {}
    for spec, G in corpus.full_corpus(include_flagship=True):
        for check in cd.property_audit(G):
            rows.setdefault(check.name, []).append((spec, check))
    out = []
    for name in sorted(rows):
        entries = rows[name]
        failures = [spec for spec, c in entries if c.status == "fail"]
        ran = sum(1 for _, c in entries if c.status == "pass")
        skipped = sum(1 for _, c in entries if c.status == "skipped")
        if failures:
            result = ClaimResult(f"audit-{name}", "fail", f"failing groups: {failures}")
        elif ran == 0:
            result = ClaimResult(f"audit-{name}", "skipped", "no group met the premise")
        else:
            result = ClaimResult(f"audit-{name}", "pass",
                                 f"{ran} groups checked, {skipped} skipped")
        out.append(result)
    elapsed = time.time() - start
    for r in out:
        r.seconds = elapsed / max(len(out), 1)
    return out


def claim_product_lattices() -> ClaimResult:
    def run():
        checked = 0
        for spec, G in corpus.product_corpus():
            L = cd.cd_lattice(G)
            comps = G.split(np.arange(G.order))
            factor_lats = [cd.cd_lattice(f) for f in G.factors]
            expected = set()
            for combo in np.ndindex(*[len(fl.members) for fl in factor_lats]):
                bools = np.ones(G.order, dtype=bool)
                for pos, (fl, c) in enumerate(zip(factor_lats, combo)):
                    member_bools = _bits.bools_from_mask(
                        fl.members[c].subgroup.mask, G.factors[pos].order)
                    bools &= member_bools[comps[pos]]
                expected.add(_bits.mask_from_bools(bools))
            if expected != L.mask_set():
                return False, f"{spec}: product law fails"
            bottoms = all(fl.bottom.order == 1 for fl in factor_lats)
            if bottoms != (L.bottom.order == 1):
                return False, f"{spec}: trivial-bottom equivalence fails"
            checked += 1
        return checked >= 10, f"{checked} direct products verified"

    return _claim("product-lattices", run)


def claim_split_recovery() -> ClaimResult:
    def run():
        G = corpus.get_group("prod(sym(4),sym(4))")
        split = cd.split_from_lattice(G)
        if split is None:
            return False, "no split found for the square of the smallest CD-simple group"
        H, K = split
        s4 = corpus.get_group("sym(4)")
        for part in (H, K):
            from .groups import SubgroupGroup

            sub = SubgroupGroup(G, part.indices())
            if find_isomorphism(sub, s4) is None:
                return False, "recovered factor is not the expected group"
        if cd.split_from_lattice(corpus.get_group("sym(4)")) is not None:
            return False, "indecomposable group reported a split"
        S = corpus.get_group("s0")
        if cd.split_from_lattice(S) is not None:
            return False, "unique-atom lattice reported a split"
        return True, "square splits into its two factors; chains report none"

    return _claim("split-recovery", run)


def claim_abelian_factorization() -> ClaimResult:
    def run():
        checked = 0
        for spec, G in corpus.full_corpus(include_flagship=False, max_order=512):
            L = cd.cd_lattice(G)
            if L.bottom.order != 1 or G.order == 1:
                continue
            abelians = [s for s in all_subgroups(G) if s.is_abelian()]
            for i, A in enumerate(abelians):
                for B in abelians[i:]:
                    inter = (A.mask & B.mask).bit_count()
                    if A.order * B.order == G.order * inter:
                        mask, _ = subgroup_product(G, A, B)
                        if mask == (1 << G.order) - 1:
                            return False, f"{spec} factors as a product of abelians"
            checked += 1
        return True, f"no abelian factorization among {checked} trivial-bottom groups"

    return _claim("abelian-factorization", run)


def claim_modularity() -> ClaimResult:
    def run():
        for spec, G in corpus.full_corpus():
            ok, witness = lattices.is_modular(cd.cd_lattice(G).abstract())
            if not ok:
                return False, f"{spec}: violating triple {witness}"
        return True, "every computed lattice is modular"

    return _claim("modularity", run)


def claim_self_duality() -> ClaimResult:
    def run():
        for spec, G in corpus.full_corpus():
            L = cd.cd_lattice(G).abstract()
            witness = lattices.is_self_dual(L)
            if witness is None:
                return False, f"{spec}: no order-reversing bijection"
            w = np.asarray(witness)
            rev = L.matrix[np.ix_(w, w)]
            if not (rev == L.matrix.T).all():
                return False, f"{spec}: reported witness does not reverse the order"
        return True, "every computed lattice is self-dual (witnesses verified)"

    return _claim("self-duality", run)


def claim_complement_bounds() -> ClaimResult:
    def run():
        checked = 0
        for spec, G in corpus.full_corpus():
            L = cd.cd_lattice(G)
            if L.bottom.order != 1 or len(L.members) <= 2:
                continue
            if not is_directly_indecomposable(G):
                continue
            A = L.abstract()
            comp = set(lattices.complemented_elements(A))
            if comp != {A.bottom, A.top}:
                return False, f"{spec}: middle members have complements"
            checked += 1
        return True, f"{checked} indecomposable trivial-bottom lattices checked"

    return _claim("complement-bounds", run)


def claim_centralizer_product_law() -> ClaimResult:
    def run():
        for spec, G in corpus.full_corpus(max_order=2048):
            L = cd.cd_lattice(G)
            members = L.members
            for i in range(len(members)):
                for j in range(i + 1, len(members)):
                    H, K = members[i], members[j]
                    hk_mask, permuting = subgroup_product(G, H.subgroup, K.subgroup)
                    if not permuting:
                        return False, f"{spec}: members fail HK = KH"
                    inter = H.subgroup & K.subgroup
                    c_inter = L.members[L.index_of(inter.mask)].centralizer
                    ck_mask, _ = subgroup_product(G, H.centralizer, K.centralizer)
                    if ck_mask != c_inter.mask:
                        return False, f"{spec}: C(H n K) != C(H) C(K)"
        return True, "meet/centralizer exchange law holds on all member pairs"

    return _claim("centralizer-product-law", run)


# -- paper suite ------------------------------------------------------------------------


def claim_s4_two_chain() -> ClaimResult:
    def run():
        G = corpus.get_group("sym(4)")
        L = cd.cd_lattice(G)
        ok = (L.mask_set() == {1 << G.identity, (1 << G.order) - 1}
              and cd.is_cd_simple(G) and cd.is_cd_minimal(G))
        return ok, f"members {sorted(m.order for m in L.members)}, simple = {cd.is_cd_simple(G)}"

    return _claim("cd-simple-s4", run)


def _center_up_set(G) -> set[int]:
    from .groups import center

    z = center(G).mask
    return {s.mask for s in all_subgroups(G) if _bits.is_subset(z, s.mask)}


def claim_extraspecial_lattices() -> ClaimResult:
    def run():
        expected = {
            "q8": 3, "extraspecial(2,+)": 3, "extraspecial(2,-)": 3,
            "extraspecial(3,+)": 4, "extraspecial(3,-)": 4,
        }
        for spec, width in expected.items():
            G = corpus.get_group(spec)
            L = cd.cd_lattice(G)
            if L.mask_set() != _center_up_set(G):
                return False, f"{spec}: lattice is not the subgroups above the center"
            got = lattices.quasi_antichain_width(L.abstract())
            if got != width:
                return False, f"{spec}: width {got}, expected {width}"
        return True, "center-up lattices with widths 3,3,3,4,4"

    return _claim("extraspecial-lattices", run)


def claim_ut_widths() -> ClaimResult:
    def run():
        rows = [(2, 1, 3), (3, 1, 4), (2, 2, 5), (5, 1, 6), (3, 2, 10)]
        for p, n, width in rows:
            G = corpus.get_group(f"ut({p},{n})")
            L = cd.cd_lattice(G)
            got = lattices.quasi_antichain_width(L.abstract())
            if got != width:
                return False, f"ut({p},{n}): width {got}, expected {width}"
            middles = [m for m in L.members if 1 < m.order < G.order]
            if not all(m.subgroup.is_abelian() for m in middles):
                return False, f"ut({p},{n}): non-abelian middle member"
        return True, "widths 3,4,5,6,10 with abelian middles"

    return _claim("unitriangular-widths", run)


def claim_scaling_actions() -> ClaimResult:
    def run():
        t22 = zoo.prop9_action(2, 2)
        if t22.T.order != 6 or t22.T.is_abelian():
            return False, f"(2,2): acting group order {t22.T.order}"
        if find_isomorphism(t22.T, corpus.get_group("sym(3)")) is None:
            return False, "(2,2): acting group is not the symmetric group on 3 points"
        t32 = zoo.prop9_action(3, 2)
        T = t32.T
        r, s = t32.named_generators["r"], t32.named_generators["s"]
        orders = T.element_orders()
        if T.order != 16 or orders[r] != 8 or orders[s] != 2:
            return False, f"(3,2): |T| = {T.order}, |r| = {orders[r]}, |s| = {orders[s]}"
        if T.mul(T.mul(s, r), s) != group_pow(T, r, 3):
            return False, "(3,2): relation s r s = r^3 fails"
        if find_isomorphism(T, corpus.get_group("qd16")) is None:
            return False, "(3,2): acting group is not quasidihedral"
        for triple, p in ((t22, 2), (t32, 3)):
            report = zoo.hypothesis_check(triple.P, triple.T, triple.action, p)
            if not report.passed:
                return False, f"{triple.name}: {report.failures()}"
        return True, "orders 6 and 16, presentation and action clauses verified"

    return _claim("scaling-power-actions", run)


def claim_brewster() -> ClaimResult:
    def run():
        bw = zoo.brewster_component()
        P = bw.P
        if P.order != 256:
            return False, f"|P| = {P.order}"
        L = cd.cd_lattice(P)
        if len(L.members) != 125:
            return False, f"{len(L.members)} members"
        amb, proj, Q = bw.aux["ambient"], bw.aux["projection"], bw.aux["q8"]
        q_lat = cd.cd_lattice(Q)
        comps = amb.split(np.arange(amb.order))
        expected = set()
        for x in q_lat.members:
            bx = _bits.bools_from_mask(x.subgroup.mask, Q.order)
            for y in q_lat.members:
                by = _bits.bools_from_mask(y.subgroup.mask, Q.order)
                for z in q_lat.members:
                    bz = _bits.bools_from_mask(z.subgroup.mask, Q.order)
                    inside = bx[comps[0]] & by[comps[1]] & bz[comps[2]]
                    image = np.unique(proj.images[np.flatnonzero(inside)])
                    expected.add(int(_bits.mask_from_indices(image, P.order)))
        if expected != L.mask_set():
            return False, "lattice differs from the componentwise images"
        A = L.abstract()
        m3 = lattices.mk_quasi_antichain(3)
        if lattices.is_isomorphic(A, lattices.cartesian(m3, m3, m3)) is None:
            return False, "lattice is not the cube of the width-3 quasi-antichain"
        factors = lattices.factorize(A)
        if [f.size for f in factors] != [5, 5, 5]:
            return False, f"factor sizes {[f.size for f in factors]}"
        if any(lattices.is_isomorphic(f, m3) is None for f in factors):
            return False, "a factor is not the width-3 quasi-antichain"
        return True, "125 members, componentwise images, cube of width-3 antichains"

    return _claim("triple-quaternion-quotient", run)


def claim_flagship() -> ClaimResult:
    def run():
        S = corpus.get_group("s0")
        if S.order != 20736 or S.order != 2**8 * 3**4:
            return False, f"|S| = {S.order}"
        L = cd.cd_lattice(S)
        orders = [m.order for m in L.members]
        if orders != [1, 144, 20736]:
            return False, f"member orders {orders}"
        atom = L.members[1].subgroup
        if not atom.is_abelian():
            return False, "middle member is not abelian"
        if L.mstar != 20736 or cd.cd_subgroup(S).order != 1:
            return False, f"m* = {L.mstar}, bottom order {cd.cd_subgroup(S).order}"
        if not cd.is_cd_minimal(S) or cd.is_cd_simple(S):
            return False, "membership predicates disagree"
        A = L.abstract()
        if lattices.is_isomorphic(A, lattices.mk_chain(3)) is None:
            return False, "lattice is not the 3-chain"
        if len(lattices.factorize(A)) != 1:
            return False, "lattice is decomposable"
        return True, "order 20736, lattice 1 < A < S with |A| = 144, CD-minimal"

    return _claim("flagship-s0", run)


_COMPONENTS_2 = ("minimal(2)", "prop9(2,2)", "brewster")
_COMPONENTS_3 = ("minimal(3)", "prop9(3,2)")


def _component(spec: str) -> zoo.ComponentTriple:
    builders = {
        "minimal(2)": lambda: zoo.minimal_component(2),
        "minimal(3)": lambda: zoo.minimal_component(3),
        "prop9(2,2)": lambda: zoo.prop9_action(2, 2),
        "prop9(3,2)": lambda: zoo.prop9_action(3, 2),
        "brewster": zoo.brewster_component,
    }
    key = ("component", spec)
    cache = corpus._instances
    if key not in cache:
        cache[key] = builders[spec]()
    return cache[key]


def predicted_lattice(c1: str, c2: str, c3: str) -> lattices.AbstractLattice:
    """The expected lattice of a compound build: the bounded extension of the
    product of the component lattices."""
    parts = [cd.cd_lattice(_component(c).P).abstract() for c in (c1, c2, c3)]
    return lattices.adjoin_bounds(lattices.cartesian(*parts))


def claim_extension_combos() -> ClaimResult:
    def run():
        count = 0
        for c1 in _COMPONENTS_2:
            for c2 in _COMPONENTS_2:
                for c3 in _COMPONENTS_3:
                    t1, t2, t3 = _component(c1), _component(c2), _component(c3)
                    for t, p in ((t1, 2), (t2, 2), (t3, 3)):
                        report = zoo.hypothesis_check(t.P, t.T, t.action, p)
                        if not report.passed:
                            return False, f"{t.name}: {report.failures()}"
                    a = t1.P.order.bit_length() - 1
                    b = t2.P.order.bit_length() - 1
                    c = 0
                    order3 = t3.P.order
                    while order3 > 1:
                        order3 //= 3
                        c += 1
                    size = (t1.P.order * t1.T.order * t2.P.order * t2.T.order
                            * t3.P.order * t3.T.order) // 4
                    if size != 2 ** (a + b + 4) * 3 ** (c + 2):
                        return False, f"({c1},{c2},{c3}): order {size} off the formula"
                    predicted = predicted_lattice(c1, c2, c3)
                    expect_size = (len(cd.cd_lattice(t1.P).members)
                                   * len(cd.cd_lattice(t2.P).members)
                                   * len(cd.cd_lattice(t3.P).members) + 2)
                    if predicted.size != expect_size:
                        return False, f"({c1},{c2},{c3}): predicted lattice size"
                    if len(predicted.atom_indices()) != 1:
                        return False, f"({c1},{c2},{c3}): predicted lattice has extra atoms"
                    count += 1
        return True, f"{count} combos: components admissible, orders match the formula"

    return _claim("extension-combos", run)


# -- table12 suite ------------------------------------------------------------------------


def table12_lattices() -> list[tuple[str, lattices.AbstractLattice]]:
    """The twelve predicted lattices, one per unordered 2-component pair and
    3-component choice."""
    out = []
    pairs = [(i, j) for i in range(3) for j in range(i, 3)]
    for i, j in pairs:
        for c3 in _COMPONENTS_3:
            c1, c2 = _COMPONENTS_2[i], _COMPONENTS_2[j]
            out.append((f"{c1}|{c2}|{c3}", predicted_lattice(c1, c2, c3)))
    return out


def claim_table12_distinct() -> ClaimResult:
    def run():
        entries = table12_lattices()
        if len(entries) != 12:
            return False, f"{len(entries)} lattices built"
        sizes = sorted(L.size for _, L in entries)
        for i in range(len(entries)):
            for j in range(i + 1, len(entries)):
                if lattices.is_isomorphic(entries[i][1], entries[j][1]) is not None:
                    return False, f"{entries[i][0]} and {entries[j][0]} are isomorphic"
        return True, f"12 pairwise distinct lattices, sizes {sizes}"

    return _claim("table12-distinct", run)


# -- suite runner -------------------------------------------------------------------------


def run_suites(config: RunConfig) -> list[ClaimResult]:
    jobs: list[Callable[[], object]] = []
    if "core" in config.suites:
        jobs.append(lambda: claim_oracle_equivalence(config.max_order))
        jobs.append(lambda: _audit_claims(config.max_order))
        jobs.append(claim_product_lattices)
        jobs.append(claim_split_recovery)
        jobs.append(claim_abelian_factorization)
        jobs.append(claim_modularity)
        jobs.append(claim_self_duality)
        jobs.append(claim_complement_bounds)
        jobs.append(claim_centralizer_product_law)
    if "paper" in config.suites:
        jobs.append(claim_s4_two_chain)
        jobs.append(claim_extraspecial_lattices)
        jobs.append(claim_ut_widths)
        jobs.append(claim_scaling_actions)
        jobs.append(claim_brewster)
        jobs.append(claim_flagship)
        jobs.append(claim_extension_combos)
    if "table12" in config.suites:
        jobs.append(claim_table12_distinct)

    results: list[ClaimResult] = []
    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            for item in pool.map(lambda f: f(), jobs):
                results.extend(item if isinstance(item, list) else [item])
    else:
        for job in jobs:
            item = job()
            results.extend(item if isinstance(item, list) else [item])
    results.sort(key=lambda r: r.claim_id)
    return results
