"""Finite model of mod-p Selmer groups and bipartite Kolyvagin systems.

The package builds a desk-scale stand-in for the Galois-cohomological
setting in which bipartite Kolyvagin systems live: one hyperbolic plane
per auxiliary prime, a Lagrangian for the global classes, Selmer groups as
intersections, and the two reciprocity laws as checkable biconditionals.
Every structural identity is enforced at run time and cross-checked by an
exhaustive enumeration oracle in the test harness.
"""

from .errors import (
    AmbientMismatch,
    BoundExceeded,
    CeilingExceeded,
    DualityViolation,
    LengthMismatch,
    ParityMismatch,
    PrimeInProduct,
    PrimesExhausted,
    ProfileIncomplete,
    SelmerLabError,
    UnknownPrime,
)
from .gf import FpSubspace, contains, full_space, intersect, kernel, rref, solve, subspace_sum, zero_subspace
from .hyperbolic import (
    HyperbolicSpace,
    Lagrangian,
    duality_defect,
    is_isotropic,
    orthogonal_complement,
    pair,
    random_lagrangian,
    standard_lagrangian,
)
from .selmer import (
    Condition,
    DichotomyCase,
    ParityReport,
    RhombusReport,
    SearchMode,
    SelmerInstance,
    SquarefreeProduct,
    all_products,
    as_product,
    condition_subspace,
    find_fresh_prime,
    loc,
    parity_class,
    rhombus,
    selmer_group,
    selmer_variant,
    sign_class,
)
from .bipartite import (
    BasisExtraction,
    BipartiteSystem,
    EquivalenceReport,
    NontrivialityReport,
    Path,
    SupportScan,
    ViolationCertificate,
    basis_extract,
    canonical_system,
    check_equivalences,
    connect_path,
    heart,
    nontriviality,
    scan_heart_supports,
    uniqueness_check,
    validate_path,
    validate_system,
    verify_rl1,
    verify_rl2,
    zero_system,
)
from .oracle import OracleTable, brute_oracle
from .harness import (
    CampaignConfig,
    CampaignReport,
    examine_instance,
    generate_instance,
    instance_from_json,
    instance_to_json,
    report_from_json,
    report_to_json,
    run_campaign,
    system_from_json,
    system_to_json,
)

__version__ = "0.1.0"
