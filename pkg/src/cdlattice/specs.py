"""The group-spec expression language used by the CLI.

Grammar (arguments split on ',' or ';' interchangeably):

    expr    := atom | call
    call    := name '(' arg (sep arg)* ')'
    arg     := expr | integer | sign | name '=' name
    atom    := q8 | qd16 | brewster | s0 | aut

Group-valued atoms and calls: cyclic(k), elemabelian(p,k), sym(n), dih(n),
q8, qd16, extraspecial(p,+|-), ut(p,n), brewster, s0, prod(e,...),
sdp(n;t;action=trivial|inv), sdp(n;aut), quo(e;center), prop9(p,n),
minimal(p), thm2(c1;c2;c3).  brewster, prop9 and minimal evaluate to the
underlying p-group when used in group position, and carry their acting
group and action for use inside thm2.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from . import zoo
from .errors import PreconditionError, SpecSyntaxError
from .groups import FiniteGroup, GroupAction, center, direct_product, quotient, semidirect_product

_TOKEN = re.compile(r"\s*([A-Za-z_][A-Za-z_0-9]*|\d+|[(),;=+-])")


@dataclass
class SpecNode:
    name: str
    args: list = field(default_factory=list)
    kwargs: dict = field(default_factory=dict)
    pos: int = 0

    def render(self) -> str:
        if not self.args and not self.kwargs:
            return self.name
        parts = [a.render() if isinstance(a, SpecNode) else str(a) for a in self.args]
        parts += [f"{k}={v}" for k, v in self.kwargs.items()]
        return f"{self.name}({','.join(parts)})"


class _Tokens:
    def __init__(self, text: str):
        self.text = text
        self.items: list[tuple[str, int]] = []
        pos = 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if not m:
                if text[pos:].strip():
                    raise SpecSyntaxError(f"unexpected character {text[pos]!r}", pos)
                break
            self.items.append((m.group(1), m.start(1)))
            pos = m.end()
        self.cursor = 0

    def peek(self) -> Optional[tuple[str, int]]:
        return self.items[self.cursor] if self.cursor < len(self.items) else None

    def next(self) -> tuple[str, int]:
        item = self.peek()
        if item is None:
            raise SpecSyntaxError("unexpected end of input", len(self.text))
        self.cursor += 1
        return item


def parse_spec(text: str) -> SpecNode:
    """Parse a spec expression; raises SpecSyntaxError with a position."""
    toks = _Tokens(text)
    node = _parse_expr(toks)
    extra = toks.peek()
    if extra is not None:
        raise SpecSyntaxError(f"unexpected trailing {extra[0]!r}", extra[1])
    return node


def _parse_expr(toks: _Tokens) -> SpecNode:
    tok, pos = toks.next()
    if not tok[0].isalpha() and tok[0] != "_":
        raise SpecSyntaxError(f"expected a name, found {tok!r}", pos)
    node = SpecNode(tok, pos=pos)
    nxt = toks.peek()
    if nxt is None or nxt[0] != "(":
        return node
    toks.next()
    while True:
        node_or_val = _parse_arg(toks, node)
        if node_or_val is not None:
            node.args.append(node_or_val)
        tok, pos = toks.next()
        if tok == ")":
            return node
        if tok not in (",", ";"):
            raise SpecSyntaxError(f"expected ',' or ')' after argument, found {tok!r}", pos)


def _parse_arg(toks: _Tokens, parent: SpecNode):
    tok, pos = toks.peek() or ("", len(toks.text))
    if tok.isdigit():
        toks.next()
        return int(tok)
    if tok in ("+", "-"):
        toks.next()
        return tok
    if tok == ")":
        raise SpecSyntaxError("empty argument", pos)
    node = _parse_expr(toks)
    nxt = toks.peek()
    if nxt is not None and nxt[0] == "=" and not node.args:
        toks.next()
        val, vpos = toks.next()
        if not val[0].isalpha():
            raise SpecSyntaxError(f"expected a keyword value, found {val!r}", vpos)
        parent.kwargs[node.name] = val
        return None
    return node


@dataclass
class BuildResult:
    """Evaluated spec: always a group, optionally an acting component."""

    group: FiniteGroup
    triple: Optional[zoo.ComponentTriple] = None


_ARITIES = {
    "cyclic": (1, 1), "elemabelian": (2, 2), "sym": (1, 1), "dih": (1, 1),
    "q8": (0, 0), "qd16": (0, 0), "extraspecial": (2, 2), "ut": (2, 2),
    "brewster": (0, 0), "s0": (0, 0), "prop9": (2, 2), "minimal": (1, 1),
    "prod": (1, None), "sdp": (2, 3), "quo": (2, 2), "thm2": (3, 3),
}


def evaluate(node: SpecNode) -> BuildResult:
    """Build the group (and component data where applicable) for a parsed spec."""
    name = node.name
    if name not in _ARITIES:
        raise SpecSyntaxError(f"unknown atom {name!r}", node.pos)
    lo, hi = _ARITIES[name]
    if len(node.args) < lo or (hi is not None and len(node.args) > hi):
        raise SpecSyntaxError(f"{name} takes {lo if lo == hi else f'{lo}..{hi}'} arguments",
                              node.pos)

    def ints(k):
        vals = node.args[:k]
        for v in vals:
            if not isinstance(v, int):
                raise SpecSyntaxError(f"{name} expects integer arguments", node.pos)
        return vals

    try:
        if name in ("cyclic", "sym", "dih"):
            return BuildResult(zoo.named_group(name, *ints(1)))
        if name in ("elemabelian", "ut"):
            return BuildResult(zoo.named_group(name, *ints(2)))
        if name in ("q8", "qd16"):
            return BuildResult(zoo.named_group(name))
        if name == "extraspecial":
            p = ints(1)[0]
            kind = node.args[1]
            if not isinstance(kind, str):
                raise SpecSyntaxError("extraspecial kind must be + or -", node.pos)
            return BuildResult(zoo.extraspecial(p, kind))
        if name == "prop9":
            triple = zoo.prop9_action(*ints(2))
            return BuildResult(triple.P, triple)
        if name == "minimal":
            triple = zoo.minimal_component(*ints(1))
            return BuildResult(triple.P, triple)
        if name == "brewster":
            triple = zoo.brewster_component()
            return BuildResult(triple.P, triple)
        if name == "s0":
            return BuildResult(zoo.s0())
        if name == "prod":
            factors = [_subgroup_expr(a, node) for a in node.args]
            return BuildResult(direct_product([r.group for r in factors]))
        if name == "quo":
            base = _subgroup_expr(node.args[0], node)
            which = node.args[1]
            if not isinstance(which, SpecNode) or which.name != "center" or which.args:
                raise SpecSyntaxError("quo supports quotients by 'center' only", node.pos)
            Q, _ = quotient(base.group, center(base.group))
            return BuildResult(Q)
        if name == "thm2":
            comps = []
            for a in node.args:
                res = _subgroup_expr(a, node)
                if res.triple is None:
                    raise SpecSyntaxError(
                        "thm2 components must carry an action (prop9, minimal, brewster)",
                        a.pos if isinstance(a, SpecNode) else node.pos)
                comps.append(res.triple)
            return BuildResult(zoo.theorem2_build(comps))
        if name == "sdp":
            return _evaluate_sdp(node)
    except PreconditionError:
        raise
    raise SpecSyntaxError(f"cannot evaluate {name!r}", node.pos)


def _subgroup_expr(arg, parent: SpecNode) -> BuildResult:
    if not isinstance(arg, SpecNode):
        raise SpecSyntaxError(f"{parent.name} expects group expressions", parent.pos)
    return evaluate(arg)


def _evaluate_sdp(node: SpecNode) -> BuildResult:
    from .groups import automorphism_group

    normal = _subgroup_expr(node.args[0], node).group
    if len(node.args) == 2 and isinstance(node.args[1], SpecNode) \
            and node.args[1].name == "aut" and not node.args[1].args:
        T, action = automorphism_group(normal)
        return BuildResult(semidirect_product(normal, T, action))
    acting = _subgroup_expr(node.args[1], node).group
    kind = node.kwargs.get("action", "trivial")
    if kind == "trivial":
        action = GroupAction.trivial(acting, normal)
    elif kind == "inv":
        if not normal.is_abelian() or acting.order != 2:
            raise PreconditionError("action=inv needs an abelian normal part and |T| = 2")
        import numpy as np

        perms = np.vstack([np.arange(normal.order),
                           np.asarray(normal.inv_arr(np.arange(normal.order)))])
        ident_first = np.argsort([acting.identity, 1 - acting.identity])
        action = GroupAction(acting, normal, perms[ident_first])
    else:
        raise SpecSyntaxError(f"unknown sdp action {kind!r}", node.pos)
    return BuildResult(semidirect_product(normal, acting, action))


def build(text: str) -> BuildResult:
    """Parse and evaluate in one step."""
    return evaluate(parse_spec(text))
