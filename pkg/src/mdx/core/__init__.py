from .checks import Report, Sampler, check_star, sample, verify
from .engine import (
    AscOracle,
    BruteForceAsc,
    EngineRun,
    ResidualState,
    Step,
    asc_violations,
    decompose,
    dominates,
    epsilon,
    iteration_bound,
    run_engine,
)
from .lift import lift_marginals
from .types import (
    EMPTY,
    ONE,
    ZERO,
    AffineRequirements,
    CallbackRequirements,
    Decomposition,
    ExplicitFamily,
    GroundSet,
    Instance,
    Marginals,
    Requirements,
    SetFamily,
    TableRequirements,
    Violation,
    as_fraction,
    fraction_str,
    most_violated_by_enumeration,
)

__all__ = [
    "AffineRequirements",
    "AscOracle",
    "BruteForceAsc",
    "CallbackRequirements",
    "Decomposition",
    "EMPTY",
    "EngineRun",
    "ExplicitFamily",
    "GroundSet",
    "Instance",
    "Marginals",
    "ONE",
    "Report",
    "Requirements",
    "ResidualState",
    "Sampler",
    "SetFamily",
    "Step",
    "TableRequirements",
    "Violation",
    "ZERO",
    "as_fraction",
    "asc_violations",
    "check_star",
    "decompose",
    "dominates",
    "epsilon",
    "fraction_str",
    "iteration_bound",
    "lift_marginals",
    "most_violated_by_enumeration",
    "run_engine",
    "sample",
    "verify",
]
