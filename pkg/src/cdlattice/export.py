"""DOT and JSON serialization for computed lattices and claim reports.

The JSON schema keeps files small by storing member generator indices
rather than full membership; pass full_membership=True to add base64
bitsets (little-endian 64-bit words).  The DOT edge set is exactly the
covering relation of the lattice.
"""

from __future__ import annotations

import json
from typing import Optional

import numpy as np

from . import _bits, lattices
from .cd import CDLattice
from .groups import FiniteGroup, Subgroup, generating_indices


def _prime_factorization(n: int) -> list[tuple[int, int]]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            e = 0
            while n % d == 0:
                n //= d
                e += 1
            out.append((d, e))
        d += 1
    if n > 1:
        out.append((n, 1))
    return out


def structure_tag(G: FiniteGroup, sub: Subgroup) -> str:
    """Short structural label: order factorization plus abelian flavor."""
    if sub.order == 1:
        return "1"
    factored = "*".join(
        f"{p}^{e}" if e > 1 else str(p) for p, e in _prime_factorization(sub.order)
    )
    if not sub.is_abelian():
        return factored
    orders = G.element_orders()[sub.indices()]
    primes = [p for p, _ in _prime_factorization(sub.order)]
    exponent = int(np.lcm.reduce(orders))
    squarefree = all(exponent % (p * p) for p in primes)
    flavor = "elab" if squarefree else "ab"
    return f"{factored} {flavor}"


def cd_to_dot(L: CDLattice, *, title: Optional[str] = None) -> str:
    """Hasse diagram as a DOT digraph; edges point upward along covers."""
    covers = L.abstract().covers()
    lines = ["digraph cd {", "  rankdir=BT;"]
    if title:
        lines.append(f'  label="{title} (m* = {L.mstar})";')
    for i, mem in enumerate(L.members):
        tag = structure_tag(L.group, mem.subgroup)
        lines.append(f'  n{i} [label="{mem.order}: {tag}"];')
    for i, j in np.argwhere(covers):
        lines.append(f"  n{i} -> n{j};")
    lines.append("}")
    return "\n".join(lines)


def cd_to_json(L: CDLattice, spec: str, *, full_membership: bool = False) -> dict:
    covers = L.abstract().covers()
    members = []
    for mem in L.members:
        entry = {
            "order": mem.order,
            "generator_indices": [int(g) for g in generating_indices(L.group, mem.subgroup)],
            "centralizer_index": L.index_of(mem.centralizer.mask),
        }
        if full_membership:
            entry["membership"] = _bits.mask_to_b64(mem.subgroup.mask, L.group.order)
        members.append(entry)
    return {
        "group": {"spec": spec, "order": L.group.order},
        "mstar": L.mstar,
        "members": members,
        "leq": [[int(i), int(j)] for i, j in np.argwhere(covers)],
    }


def lattice_from_json(payload: dict) -> tuple[lattices.DenseLattice, dict]:
    """Rebuild the abstract lattice from serialized covering pairs."""
    m = len(payload["members"])
    M = np.eye(m, dtype=bool)
    for i, j in payload["leq"]:
        M[i, j] = True
    # transitive closure of the covers
    while True:
        more = M | ((M.astype(np.uint8) @ M.astype(np.uint8)) > 0)
        if (more == M).all():
            break
        M = more
    return lattices.from_leq_matrix(M), payload


def write_json(path: str, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_json(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)
