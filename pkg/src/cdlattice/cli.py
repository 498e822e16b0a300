"""Command-line front end.

    cdlat cd <spec> [--oracle] [--dot FILE] [--json FILE] [--full-membership]
    cdlat lattice <json> [--modular] [--selfdual] [--factorize]
    cdlat verify [--suite core|paper|table12|all] [--max-order N]
                 [--threads K] [--report FILE]

Exit codes: 0 ok, 1 claim failure, 2 parse or precondition error,
3 capacity bound exceeded, 4 internal consistency mismatch.  CDLAT_THREADS
sets the default thread count for verify.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import cd, claims, export, lattices, specs
from .errors import (
    CapacityError,
    DomainError,
    InternalCheckError,
    PreconditionError,
    SpecSyntaxError,
)

EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_CAPACITY = 3
EXIT_MISMATCH = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cdlat",
        description="Exact Chermak-Delgado lattices of finite groups.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_cd = sub.add_parser("cd", help="compute the lattice of a group expression",
                          epilog=specs.__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p_cd.add_argument("spec", help="group expression, e.g. 'q8' or 'prod(sym(4),sym(4))'")
    p_cd.add_argument("--oracle", action="store_true",
                      help="cross-check against the exhaustive subgroup oracle")
    p_cd.add_argument("--dot", metavar="FILE", help="write the Hasse diagram as DOT")
    p_cd.add_argument("--json", metavar="FILE", help="write the serialized lattice")
    p_cd.add_argument("--full-membership", action="store_true",
                      help="include base64 membership bitsets in the JSON")

    p_lat = sub.add_parser("lattice", help="analyze a serialized lattice")
    p_lat.add_argument("file", help="JSON file produced by 'cdlat cd --json'")
    p_lat.add_argument("--modular", action="store_true")
    p_lat.add_argument("--selfdual", action="store_true")
    p_lat.add_argument("--factorize", action="store_true")

    p_ver = sub.add_parser("verify", help="run the verification suites")
    p_ver.add_argument("--suite", default="all",
                       choices=["core", "paper", "table12", "all"])
    p_ver.add_argument("--max-order", type=int, default=128,
                       help="oracle-equivalence order cutoff (default 128)")
    p_ver.add_argument("--threads", type=int,
                       default=int(os.environ.get("CDLAT_THREADS", "1")))
    p_ver.add_argument("--report", metavar="FILE", help="write the machine-readable report")
    return parser


def _cmd_cd(args) -> int:
    result = specs.build(args.spec)
    G = result.group
    L = cd.cd_lattice(G)
    if args.oracle:
        oracle = cd.cd_lattice_oracle(G)
        if not L.same_members(oracle) or L.mstar != oracle.mstar:
            print("ORACLE DISAGREEMENT: closure and exhaustive computations differ",
                  file=sys.stderr)
            return EXIT_MISMATCH
    A = L.abstract()
    width = lattices.quasi_antichain_width(A)
    print(f"group: {G.name}  |G| = {G.order}")
    print(f"m* = {L.mstar}")
    print(f"members: {len(L.members)}")
    print(f"cd subgroup order: {L.bottom.order}")
    print(f"atoms: {len(L.atoms())}  coatoms: {len(L.coatoms())}")
    print(f"quasi-antichain width: {width if width is not None else '-'}")
    print(f"cd-simple: {cd.is_cd_simple(G)}")
    print(f"cd-minimal: {cd.is_cd_minimal(G)}")
    if args.oracle:
        print("oracle check: agreed")
    if args.dot:
        with open(args.dot, "w", encoding="utf-8") as fh:
            fh.write(export.cd_to_dot(L, title=args.spec) + "\n")
        print(f"wrote {args.dot}")
    if args.json:
        export.write_json(args.json,
                          export.cd_to_json(L, args.spec,
                                            full_membership=args.full_membership))
        print(f"wrote {args.json}")
    return 0


def _cmd_lattice(args) -> int:
    payload = export.read_json(args.file)
    L, meta = export.lattice_from_json(payload)
    print(f"lattice: {L.size} elements (group order {meta['group']['order']})")
    width = lattices.quasi_antichain_width(L)
    print(f"quasi-antichain width: {width if width is not None else '-'}")
    if args.modular:
        ok, witness = lattices.is_modular(L)
        print(f"modular: {ok}" + ("" if ok else f"  violating triple: {witness}"))
    if args.selfdual:
        witness = lattices.is_self_dual(L)
        print(f"self-dual: {witness is not None}")
    if args.factorize:
        factors = lattices.factorize(L)
        print(f"factors: {[f.size for f in factors]}")
    return 0


def _cmd_verify(args) -> int:
    names = claims.SUITES if args.suite == "all" else (args.suite,)
    config = claims.RunConfig(suites=tuple(names), max_order=args.max_order,
                              threads=args.threads)
    results = claims.run_suites(config)
    width = max(len(r.claim_id) for r in results)
    for r in results:
        print(f"{r.claim_id:<{width}}  {r.status.upper():<7}  {r.seconds:7.2f}s  {r.evidence}")
    failed = [r for r in results if r.status == "fail"]
    skipped = [r for r in results if r.status == "skipped"]
    print(f"{len(results)} claims: {len(results) - len(failed) - len(skipped)} passed, "
          f"{len(failed)} failed, {len(skipped)} skipped")
    if args.report:
        export.write_json(args.report, {"claims": [r.as_dict() for r in results]})
        print(f"wrote {args.report}")
    return EXIT_FAIL if failed else 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "cd":
            return _cmd_cd(args)
        if args.command == "lattice":
            return _cmd_lattice(args)
        return _cmd_verify(args)
    except (SpecSyntaxError, PreconditionError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CapacityError as exc:
        print(f"capacity: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except InternalCheckError as exc:
        print(f"internal check failed: {exc}", file=sys.stderr)
        return EXIT_MISMATCH


if __name__ == "__main__":
    raise SystemExit(main())
