"""The group corpus that the verification suites sweep.

Groups are named by their spec expressions and built lazily through the
parser (which doubles as an end-to-end exercise of the surface syntax);
instances are shared process-wide since groups are immutable.
"""

from __future__ import annotations

from typing import Optional

from . import specs
from .groups import FiniteGroup

# Order <= 128: the oracle-equivalence set.
ORACLE_SPECS: list[str] = [
    "cyclic(1)", "cyclic(2)", "cyclic(3)", "cyclic(4)", "cyclic(6)", "cyclic(8)",
    "cyclic(12)",
    "elemabelian(2,2)", "elemabelian(2,3)", "elemabelian(3,2)", "elemabelian(5,2)",
    "sym(3)", "sym(4)",
    "dih(4)", "dih(5)", "dih(6)", "dih(7)", "dih(8)", "dih(12)",
    "q8", "qd16",
    "extraspecial(2,+)", "extraspecial(2,-)", "extraspecial(3,+)", "extraspecial(3,-)",
    "ut(2,1)", "ut(3,1)", "ut(2,2)", "ut(5,1)",
    "prod(sym(3),sym(3))", "prod(q8,q8)", "prod(cyclic(2),sym(4))",
    "prod(q8,sym(3))", "prod(cyclic(3),q8)", "prod(dih(4),dih(4))",
    "prod(sym(3),cyclic(4))",
]

# Direct products (with orders up to 1024) for the product-law sweeps.
PRODUCT_SPECS: list[str] = [
    "prod(sym(3),sym(3))", "prod(q8,q8)", "prod(cyclic(2),sym(4))",
    "prod(q8,sym(3))", "prod(cyclic(3),q8)", "prod(dih(4),dih(4))",
    "prod(sym(3),cyclic(4))", "prod(sym(4),sym(4))", "prod(q8,qd16)",
    "prod(sym(4),sym(3))", "prod(sym(4),q8)", "prod(ut(2,1),ut(3,1))",
]

# Larger members analyzed by the fast path only.
EXTENDED_SPECS: list[str] = [
    "ut(3,2)", "brewster", "prod(sym(4),sym(4))",
]

FLAGSHIP_SPEC = "s0"

_instances: dict[str, FiniteGroup] = {}


def get_group(spec: str) -> FiniteGroup:
    try:
        return _instances[spec]
    except KeyError:
        group = specs.build(spec).group
        _instances[spec] = group
        return group


def oracle_corpus(max_order: Optional[int] = None) -> list[tuple[str, FiniteGroup]]:
    limit = 128 if max_order is None else max_order
    out = []
    for spec in ORACLE_SPECS:
        g = get_group(spec)
        if g.order <= limit:
            out.append((spec, g))
    return out


def product_corpus(max_order: int = 1024) -> list[tuple[str, FiniteGroup]]:
    out = []
    for spec in PRODUCT_SPECS:
        g = get_group(spec)
        if g.order <= max_order:
            out.append((spec, g))
    return out


def full_corpus(*, include_flagship: bool = True,
                max_order: Optional[int] = None) -> list[tuple[str, FiniteGroup]]:
    names = list(dict.fromkeys(ORACLE_SPECS + PRODUCT_SPECS + EXTENDED_SPECS))
    if include_flagship:
        names.append(FLAGSHIP_SPEC)
    out = []
    for spec in names:
        g = get_group(spec)
        if max_order is None or g.order <= max_order:
            out.append((spec, g))
    return out
