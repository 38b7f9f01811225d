"""Exact decompositions of marginal vectors into distributions over subsets.

Given a ground set E, a family of subsets with requirements pi and per-element
marginals rho, the library finds a distribution over subsets of E with the
prescribed marginals that hits every member P with probability at least pi_P.
"""
from .core import (
    Decomposition,
    ExplicitFamily,
    GroundSet,
    Instance,
    Marginals,
    TableRequirements,
    check_star,
    decompose,
    lift_marginals,
    sample,
    verify,
)
from .errors import MdxError

__all__ = [
    "Decomposition",
    "ExplicitFamily",
    "GroundSet",
    "Instance",
    "Marginals",
    "MdxError",
    "TableRequirements",
    "check_star",
    "decompose",
    "lift_marginals",
    "sample",
    "verify",
]
