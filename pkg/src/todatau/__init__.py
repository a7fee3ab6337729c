"""Exact tau-function engine and coprimeness auditor for discrete Toda lattices."""

from .backend import KERNEL_NAME
from .laurent import (
    DivisionError,
    LaurentPoly,
    SubstitutionError,
    VarRegistry,
    ZeroSubstitutionError,
)
from .gcdtools import (
    IrreducibilityEvidence,
    RationalFunction,
    coprime,
    gcd,
    irreducibility_evidence,
    rational_coprime,
    reduce_fraction,
    unit_normalize,
)
from .evolve import (
    BoundaryError,
    CellDivisionError,
    DegenerateError,
    IVRows,
    IVState,
    Molecule,
    Periodic,
    PeriodicConstants,
    SemiInfinite,
    SingularityError,
    TauGrid,
    constants_from_iv,
    evolve,
    iv_state_from_values,
    iv_state_symbolic,
    molecule_from_values,
    molecule_symbolic,
    periodic_from_iv_values,
    periodic_special_x,
    periodic_symbolic,
    semi_from_values,
    semi_symbolic,
    step_iv_open,
    step_iv_periodic,
    tau_to_iv,
    tilde_transform,
)
from .audit import (
    AuditReport,
    Region,
    audit_irreducibility,
    audit_iv_coprime,
    audit_laurent,
    audit_laurent_raw_periodic,
    audit_pairwise_coprime,
    stamp_config,
)
from .identities import (
    CATALOG,
    FScanResult,
    IdentityCase,
    catalog_names,
    eval_F,
    factored_F,
    oracle_F,
    resolve_name,
    scan_F_positivity,
    verify_all,
    verify_identity,
)

__version__ = "0.1.0"

__all__ = [
    "KERNEL_NAME",
    "DivisionError",
    "LaurentPoly",
    "SubstitutionError",
    "VarRegistry",
    "ZeroSubstitutionError",
    "IrreducibilityEvidence",
    "RationalFunction",
    "coprime",
    "gcd",
    "irreducibility_evidence",
    "rational_coprime",
    "reduce_fraction",
    "unit_normalize",
    "BoundaryError",
    "CellDivisionError",
    "DegenerateError",
    "IVRows",
    "IVState",
    "Molecule",
    "Periodic",
    "PeriodicConstants",
    "SemiInfinite",
    "SingularityError",
    "TauGrid",
    "constants_from_iv",
    "evolve",
    "iv_state_from_values",
    "iv_state_symbolic",
    "molecule_from_values",
    "molecule_symbolic",
    "periodic_from_iv_values",
    "periodic_special_x",
    "periodic_symbolic",
    "semi_from_values",
    "semi_symbolic",
    "step_iv_open",
    "step_iv_periodic",
    "tau_to_iv",
    "tilde_transform",
    "AuditReport",
    "Region",
    "audit_irreducibility",
    "audit_iv_coprime",
    "audit_laurent",
    "audit_laurent_raw_periodic",
    "audit_pairwise_coprime",
    "stamp_config",
    "CATALOG",
    "FScanResult",
    "IdentityCase",
    "catalog_names",
    "eval_F",
    "factored_F",
    "oracle_F",
    "resolve_name",
    "scan_F_positivity",
    "verify_all",
    "verify_identity",
    "__version__",
]
