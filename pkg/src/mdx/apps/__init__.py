"""Application solvers: deterrence security games, robust coverage, committee rounding."""
from .committee import CommitteeInstance, CommitteeSampler, committee_round
from .coverage import CoverageInstance, CoverageResult, solve_robust_coverage
from .security import SecurityGameInstance, SecurityResult, solve_security_game

__all__ = [
    "CommitteeInstance",
    "CommitteeSampler",
    "CoverageInstance",
    "CoverageResult",
    "SecurityGameInstance",
    "SecurityResult",
    "committee_round",
    "solve_robust_coverage",
    "solve_security_game",
]
