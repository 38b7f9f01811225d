from __future__ import annotations

import random
from collections.abc import Mapping
from dataclasses import dataclass
from fractions import Fraction
from math import lcm

from ..errors import FamilyNotEnumerable
from .types import ONE, ZERO, Decomposition, Instance, Violation


@dataclass(frozen=True)
class Report:
    normalized: bool
    nonnegative: bool
    marginal_ok: bool
    hitting_ok: bool
    worst_violation: Fraction | None
    worst_member: frozenset | None
    marginal_errors: dict

    @property
    def ok(self) -> bool:
        return self.normalized and self.nonnegative and self.marginal_ok and self.hitting_ok


def verify(inst: Instance, rho: Mapping[str, Fraction], z: Decomposition) -> Report:
    """Exact check of normalization, marginals and every hitting constraint.

    ``worst_violation`` is the maximum over members of pi_P minus the hitting
    probability of P (non-positive when all constraints hold).
    """
    if not inst.enumerable:
        raise FamilyNotEnumerable("verify needs an enumerable family")
    marg = z.marginals()
    errors = {e: marg[e] - rho[e] for e in inst.ground if marg[e] != rho[e]}
    worst = worst_member = None
    for P in inst.members():
        slack = inst.pi(P) - z.hitting(P)
        if worst is None or slack > worst:
            worst, worst_member = slack, P
    return Report(
        normalized=z.total() == ONE,
        nonnegative=all(x >= 0 for x in z.weights.values()),
        marginal_ok=not errors,
        hitting_ok=worst is None or worst <= 0,
        worst_violation=worst,
        worst_member=worst_member,
        marginal_errors=errors,
    )


def check_star(inst: Instance, rho: Mapping[str, Fraction]) -> Violation | None:
    """Return the most violated covering inequality, or None if rho satisfies all of them."""
    worst = inst.most_violated(rho)
    if worst is None or worst.gap <= 0:
        return None
    return worst


def sample(z: Decomposition, seed: int | random.Random) -> frozenset:
    """Draw one support set with probability equal to its weight (weights are renormalized)."""
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    return Sampler(z).draw(rng)


class Sampler:
    """Exact integer sampler over a decomposition's support."""

    def __init__(self, z: Decomposition):
        items = z.items()
        if not items:
            raise ValueError("cannot sample from an empty decomposition")
        scale = lcm(*(x.denominator for _, x in items))
        self.sets = [s for s, _ in items]
        self.cumulative = []
        acc = 0
        for _, x in items:
            acc += int(x * scale)
            self.cumulative.append(acc)
        self.total = acc

    def draw(self, rng: random.Random) -> frozenset:
        u = rng.randrange(self.total)
        lo, hi = 0, len(self.cumulative) - 1
        while lo < hi:
            mid = (lo + hi) // 2
            if self.cumulative[mid] > u:
                hi = mid
            else:
                lo = mid + 1
        return self.sets[lo]


def hitting_slack(inst: Instance, z: Decomposition) -> dict[frozenset, Fraction]:
    return {P: z.hitting(P) - inst.pi(P) for P in inst.members()}


__all__ = ["Report", "verify", "check_star", "sample", "Sampler", "hitting_slack"]
