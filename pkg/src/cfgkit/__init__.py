"""Recognition of lattices generated by chip-firing games."""
from .engine import (
    LabeledSpace,
    MultiGraph,
    closed_components,
    fire,
    firable,
    generate_space,
    is_simple,
    reachable,
)
from .feasibility import (
    E,
    IneqSystem,
    LinearConstraint,
    Solution,
    VarId,
    W,
    build_E,
    build_E_prime,
    build_Omega,
    integerize,
    solve_nonneg,
)
from .lattice import (
    SINK,
    CoverDag,
    IrreducibleContext,
    Lattice,
    UldCertificate,
    analyze,
    check_uld,
    compute_context,
    is_distributive,
    parse_lattice,
    parse_poset,
    validate_lattice,
)
from .recognize import (
    GameWitness,
    Recognition,
    build_script_g,
    is_acyclic,
    recognize,
    recognize_acfg,
    recognize_asm,
    recognize_cfg,
    simple_only_sufficient,
)
from .verify import canonical_encoding, spaces_isomorphic, verify_witness

__version__ = "0.1.0"
