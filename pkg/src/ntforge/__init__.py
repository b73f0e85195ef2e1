"""ntforge: exact right-LCM semigroup combinatorics, Wick calculus, and
truncated Fock engines for Nica-Toeplitz algebras."""

__version__ = "0.1.0"

from .semigroups import (
    AbsorptionMonoid,
    DirectSumN,
    Element,
    FiniteGroup,
    FreeProduct,
    RightLcmSemigroup,
    SemigroupHom,
    UnitExtension,
    check_controlled_map,
    controlled_abelianization,
    cyclic_group,
    free_monoid,
    klein_group,
    make_group,
    make_semigroup,
    symmetric_group_3,
)
from .segments import (
    Segment,
    check_partition,
    initial_segments,
    partition_member,
    segment_of,
)
from .precategory import (
    Arrow,
    ColorIdeal,
    ColoredProductSystem,
    ZeroTensorBackend,
    check_essential,
    check_factorization,
    check_nondegenerate,
    check_well_aligned,
    full_ideal,
)
from .wick import (
    GradingMap,
    NTElement,
    abelianization_grading,
    core_norm,
    diagonal_expectation,
    nt_adjoint,
    nt_identity,
    nt_monomial,
    nt_mul,
)
from .fock import (
    Truncation,
    check_divisor_closure,
    check_reducing_condition,
    fock_norm,
    fock_source_restricted,
    lift,
    projection_QT,
    projection_Qw,
    transcendental_expectation,
)
from .analysis import (
    ConcreteRep,
    ProjectionFamily,
    aperiodicity_search,
    check_condition_C,
    check_condition_Cprime,
    check_graded,
    check_projection_equalities,
    check_projection_semilattice,
    check_toeplitz_covariance,
    degenerate_example_rep,
    extend_representation,
    fock_rep,
)
from .bundles import (
    BlockAction,
    BundleFiberFamily,
    CrossedProductBackend,
    bundle_from_precategory,
    check_bundle_laws,
    group_algebra_bundle,
    precategory_from_bundle,
    regular_representation,
    regular_spectrum,
    semidirect_bundle,
    swap_action,
    trivial_action,
)
from .scenario import Scenario, run_scenario

__all__ = [
    "AbsorptionMonoid",
    "Arrow",
    "BlockAction",
    "BundleFiberFamily",
    "ColorIdeal",
    "ColoredProductSystem",
    "ConcreteRep",
    "CrossedProductBackend",
    "DirectSumN",
    "Element",
    "FiniteGroup",
    "FreeProduct",
    "GradingMap",
    "NTElement",
    "ProjectionFamily",
    "RightLcmSemigroup",
    "Scenario",
    "Segment",
    "SemigroupHom",
    "Truncation",
    "UnitExtension",
    "ZeroTensorBackend",
    "abelianization_grading",
    "aperiodicity_search",
    "bundle_from_precategory",
    "check_bundle_laws",
    "check_condition_C",
    "check_condition_Cprime",
    "check_controlled_map",
    "check_divisor_closure",
    "check_essential",
    "check_factorization",
    "check_graded",
    "check_nondegenerate",
    "check_partition",
    "check_projection_equalities",
    "check_projection_semilattice",
    "check_reducing_condition",
    "check_toeplitz_covariance",
    "check_well_aligned",
    "controlled_abelianization",
    "core_norm",
    "cyclic_group",
    "degenerate_example_rep",
    "diagonal_expectation",
    "extend_representation",
    "fock_norm",
    "fock_rep",
    "fock_source_restricted",
    "free_monoid",
    "full_ideal",
    "group_algebra_bundle",
    "initial_segments",
    "klein_group",
    "lift",
    "make_group",
    "make_semigroup",
    "nt_adjoint",
    "nt_identity",
    "nt_monomial",
    "nt_mul",
    "partition_member",
    "precategory_from_bundle",
    "projection_QT",
    "projection_Qw",
    "regular_representation",
    "regular_spectrum",
    "run_scenario",
    "segment_of",
    "semidirect_bundle",
    "swap_action",
    "symmetric_group_3",
    "transcendental_expectation",
    "trivial_action",
]
