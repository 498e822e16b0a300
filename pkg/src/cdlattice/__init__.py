"""Exact Chermak-Delgado lattices of finite groups.

Construct groups (named families, matrix groups, products, quotients,
subdirect builds), compute their Chermak-Delgado lattices exactly, analyze
the resulting abstract lattices, and run the verification suites from the
command line via ``cdlat``.
"""

from .cd import (
    CDLattice,
    MeasuredSubgroup,
    cd_lattice,
    cd_lattice_oracle,
    cd_subgroup,
    centralizer_family,
    is_cd_minimal,
    is_cd_simple,
    measure,
    property_audit,
    split_from_lattice,
)
from .errors import (
    CapacityError,
    CDLatticeError,
    DomainError,
    InternalCheckError,
    PreconditionError,
    SpecSyntaxError,
)
from .fields import GF, FieldElement, make_field
from .groups import (
    FiniteGroup,
    GroupAction,
    GroupMap,
    Subgroup,
    all_subgroups,
    automorphisms,
    center,
    centralizer,
    closure,
    conjugacy_classes,
    core,
    direct_product,
    find_isomorphism,
    is_directly_indecomposable,
    normal_closure,
    normal_subgroups,
    quotient,
    semidirect_product,
    subgroup_product,
)
from .lattices import (
    AbstractLattice,
    DenseLattice,
    adjoin_bounds,
    atoms,
    cartesian,
    coatoms,
    complemented_elements,
    factorize,
    is_isomorphic,
    is_modular,
    is_self_dual,
    mk_chain,
    mk_quasi_antichain,
    quasi_antichain_width,
)
from .specs import build, parse_spec
from .zoo import (
    ComponentTriple,
    brewster_component,
    dihedral,
    elementary_abelian,
    extraspecial,
    hypothesis_check,
    minimal_component,
    prop9_action,
    quaternion8,
    qd16,
    s0,
    symmetric,
    theorem2_build,
    unitriangular,
)

__version__ = "0.1.0"
