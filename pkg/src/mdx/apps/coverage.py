"""Robust randomized weighted coverage with an unknown scenario.

Selecting S covers the union of the U_e for e in S.  Scenario w pays
r^w over covered items minus c^w over selected elements; the goal is a
distribution over S maximizing the worst expected profit.  For balanced
coverage systems an LP over (rho, pi, t) is exact, and a perfect
decomposition of rho realizes its value.
"""
from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction

from ..balanced import Hypergraph, find_odd_special_cycle, perfect_decompose
from ..core.types import ONE, ZERO, Decomposition, GroundSet, as_fraction
from ..errors import NotBalanced, OracleFailure, ValidationError
from ..exactlp import LinearProgram, solve


@dataclass
class CoverageInstance:
    universe: Sequence[str]
    covers: Mapping[str, Sequence[str]]
    scenarios: list = field(default_factory=list)  # (reward per item, cost per element)

    def __post_init__(self):
        self.universe = list(self.universe)
        self.ground = GroundSet(self.covers)
        items = set(self.universe)
        self.covers = {e: frozenset(self.covers[e]) for e in self.ground}
        for e, us in self.covers.items():
            if not us <= items:
                raise ValidationError(f"element {e!r} covers unknown items {sorted(us - items)}")
        if not self.scenarios:
            raise ValidationError("at least one scenario is required")
        scen = []
        for rewards, costs in self.scenarios:
            r = {u: as_fraction(rewards.get(u, 0)) for u in self.universe}
            c = {e: as_fraction(costs.get(e, 0)) for e in self.ground}
            if any(v < 0 for v in r.values()) or any(v < 0 for v in c.values()):
                raise ValidationError("scenario rewards and costs must be nonnegative")
            scen.append((r, c))
        self.scenarios = scen

    def item_member(self, u: str) -> frozenset:
        return frozenset(e for e in self.ground if u in self.covers[e])

    def members(self) -> list[frozenset]:
        """Distinct nonempty item members P_u = {e : u in U_e}."""
        seen: dict[frozenset, None] = {}
        for u in self.universe:
            P = self.item_member(u)
            if P:
                seen.setdefault(P, None)
        return list(seen)

    def hypergraph(self) -> Hypergraph:
        return Hypergraph(self.ground, self.members())

    def profit(self, scenario: int, S: frozenset) -> Fraction:
        r, c = self.scenarios[scenario]
        covered = set().union(*(self.covers[e] for e in S)) if S else set()
        return sum((r[u] for u in covered), ZERO) - sum((c[e] for e in S), ZERO)

    def worst_expected(self, z: Decomposition) -> Fraction:
        return min(z.expectation(lambda S, w=w: self.profit(w, S)) for w in range(len(self.scenarios)))


@dataclass
class CoverageResult:
    rho: dict
    pi: dict
    t: Fraction
    decomposition: Decomposition
    worst: Fraction


def coverage_lp(inst: CoverageInstance) -> tuple[LinearProgram, list, list]:
    """The LP in (t, rho, pi); returns it with the element and member orders."""
    ground = list(inst.ground)
    members = inst.members()
    n_e, n_p = len(ground), len(members)
    width = 1 + n_e + n_p
    lp = LinearProgram(
        [ONE] + [ZERO] * (n_e + n_p),
        sense="max",
        bounds=[(None, None)] + [(ZERO, ONE)] * (n_e + n_p),
    )
    pos = {P: 1 + n_e + j for j, P in enumerate(members)}
    for r, c in inst.scenarios:
        row = [ZERO] * width
        row[0] = ONE
        for i, e in enumerate(ground):
            row[1 + i] = c[e]
        for u in inst.universe:
            P = inst.item_member(u)
            if P:
                row[pos[P]] -= r[u]
        lp.add(row, "<=", ZERO)
    for P in members:
        row = [ZERO] * width
        row[pos[P]] = ONE
        for i, e in enumerate(ground):
            if e in P:
                row[1 + i] = -ONE
        lp.add(row, "<=", ZERO)
    return lp, ground, members


def solve_robust_coverage(inst: CoverageInstance) -> CoverageResult:
    h = inst.hypergraph()
    cycle = find_odd_special_cycle(h)
    if cycle is not None:
        raise NotBalanced("the coverage system contains an odd special cycle", cycle=cycle)
    lp, ground, members = coverage_lp(inst)
    sol = solve(lp)
    if not sol.optimal:
        raise OracleFailure(f"coverage LP is {sol.status}")
    x = sol.point
    t = x[0]
    rho = {e: x[1 + i] for i, e in enumerate(ground)}
    pi = {P: x[1 + len(ground) + j] for j, P in enumerate(members)}
    z = perfect_decompose(h, rho)
    worst = inst.worst_expected(z)
    if worst < t:
        raise OracleFailure(f"decomposition earns {worst} < LP value {t}")
    return CoverageResult(rho, pi, t, z, worst)
