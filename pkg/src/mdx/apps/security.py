"""Cheapest inspection strategy that deters every attack.

The attacker's reward r_P for a strategy P and the detection penalty beta
give requirements pi = r / beta.  Optimal marginals minimize the expected
inspection cost over the covering polytope; they are then decomposed into a
distribution over inspected sets with exactly that cost.
"""
from __future__ import annotations

from collections import deque
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from ..asc_lattice import RootedCutLattice, decompose_lattice, lattice_instance
from ..asc_supermodular import SupermodularAsc, SupermodularOracle, supermodular_instance
from ..core.engine import run_engine
from ..core.types import ONE, ZERO, Decomposition, GroundSet, Instance, Marginals, as_fraction
from ..errors import NotDeterable, OracleFailure, ValidationError
from ..exactlp import LinearProgram, solve

MAX_CUTTING_ROUNDS = 10_000


def tree_paths(nodes: Sequence[str], edges: Mapping[str, tuple[str, str]]) -> dict[frozenset, frozenset]:
    """Edge set of the unique path between every pair of tree nodes."""
    if len(edges) != len(nodes) - 1:
        raise ValidationError("a tree on n nodes has n - 1 edges")
    adj = {v: [] for v in nodes}
    for e, (u, v) in edges.items():
        if u not in adj or v not in adj:
            raise ValidationError(f"edge {e!r} has an unknown endpoint")
        adj[u].append((e, v))
        adj[v].append((e, u))
    paths = {}
    for s in nodes:
        via = {s: frozenset()}
        q = deque([s])
        while q:
            u = q.popleft()
            for e, v in adj[u]:
                if v not in via:
                    via[v] = via[u] | {e}
                    q.append(v)
        if len(via) != len(nodes):
            raise ValidationError("the tree must be connected")
        for t in nodes:
            if s < t:
                paths[frozenset((s, t))] = via[t]
    return paths


@dataclass
class SecurityGameInstance:
    """A deterrence game; build with :meth:`smuggling`, :meth:`energy` or :meth:`from_oracle`."""

    mode: str
    ground: GroundSet
    costs: dict
    supermodular: SupermodularOracle | None = None
    lattice: RootedCutLattice | None = None

    def __post_init__(self):
        self.costs = {e: as_fraction(self.costs.get(e, 0)) for e in self.ground}
        if any(c < 0 for c in self.costs.values()):
            raise ValidationError("inspection costs must be nonnegative")

    @classmethod
    def smuggling(cls, nodes, edges, rewards: Mapping, beta, costs) -> "SecurityGameInstance":
        """Smuggling on a tree: reward alpha for each node pair whose tree path lies in P."""
        beta = as_fraction(beta)
        if beta <= 0:
            raise ValidationError("beta must be positive")
        ground = GroundSet(edges)
        paths = tree_paths(list(nodes), edges)
        alpha = {}
        for pair, a in rewards.items():
            key = frozenset(pair)
            if key not in paths:
                raise ValidationError(f"reward for {sorted(pair)} is not on a pair of distinct tree nodes")
            a = as_fraction(a)
            if a < 0:
                raise ValidationError("rewards must be nonnegative")
            alpha[key] = alpha.get(key, ZERO) + a
        if sum(alpha.values(), ZERO) / beta > ONE:
            raise ValidationError("total reward exceeds the penalty, so some requirement exceeds 1")

        def pi(P, alpha=alpha, paths=paths, beta=beta):
            return sum((a for pair, a in alpha.items() if paths[pair] <= P), ZERO) / beta

        return cls("supermodular", ground, dict(costs), supermodular=SupermodularOracle(ground, pi))

    @classmethod
    def energy(cls, nodes, edges, root, alpha, beta, costs) -> "SecurityGameInstance":
        """Sabotage of an energy network: reward alpha_v for every node cut off from the root."""
        lat = RootedCutLattice(nodes, edges, root, alpha=alpha, beta=beta)
        if any(v < 0 for v in lat.alpha.values()):
            raise ValidationError("node rewards must be nonnegative")
        if lat.pi(lat.top()) > ONE:
            raise ValidationError("total reward exceeds the penalty, so some requirement exceeds 1")
        return cls("lattice", lat.ground, dict(costs), lattice=lat)

    @classmethod
    def from_oracle(cls, oracle: SupermodularOracle, costs) -> "SecurityGameInstance":
        return cls("supermodular", oracle.ground, dict(costs), supermodular=oracle)

    def instance(self) -> Instance:
        if self.mode == "supermodular":
            return supermodular_instance(self.supermodular)
        return lattice_instance(self.lattice)

    def constraints(self) -> list[tuple[frozenset, Fraction]]:
        """Every covering row with positive requirement."""
        inst = self.instance()
        return [(P, inst.pi(P)) for P in inst.members() if inst.pi(P) > 0]


@dataclass
class SecurityResult:
    rho: dict
    decomposition: Decomposition
    cost: Fraction
    lp_value: Fraction
    rounds: int


def optimal_marginals(inst: SecurityGameInstance) -> tuple[dict, Fraction, int]:
    """Minimize c . rho over rho in [0,1]^E with every covering row, by cutting planes."""
    ground = list(inst.ground)
    rows = inst.constraints()
    for P, p in rows:
        if not P:
            raise NotDeterable("the empty strategy has positive reward; no inspection can deter it")
    active: list[tuple[frozenset, Fraction]] = []
    for rounds in range(1, MAX_CUTTING_ROUNDS + 1):
        lp = LinearProgram([inst.costs[e] for e in ground], bounds=[(ZERO, ONE)] * len(ground))
        for P, p in active:
            lp.add([ONE if e in P else ZERO for e in ground], ">=", p)
        sol = solve(lp)
        if not sol.optimal:
            raise NotDeterable(f"deterrence LP is {sol.status}")
        rho = dict(zip(ground, sol.point))
        worst = None
        for P, p in rows:
            gap = p - sum((rho[e] for e in P), ZERO)
            if gap > 0 and (worst is None or gap > worst[0]):
                worst = (gap, P, p)
        if worst is None:
            return rho, sol.value, rounds
        active.append((worst[1], worst[2]))
    raise OracleFailure("cutting planes did not converge")


def solve_security_game(inst: SecurityGameInstance, debug: bool = False) -> SecurityResult:
    rho, value, rounds = optimal_marginals(inst)
    marg = Marginals(inst.ground, rho)
    if inst.mode == "supermodular":
        z = run_engine(inst.instance(), marg, SupermodularAsc(inst.supermodular), debug=debug).decomposition
    else:
        z = decompose_lattice(inst.lattice, marg, debug=debug)
    cost = z.expectation(lambda S: sum((inst.costs[e] for e in S), ZERO))
    if cost != value:
        raise OracleFailure(f"decomposition cost {cost} differs from the LP optimum {value}")
    return SecurityResult(rho, z, cost, value, rounds)


def smuggling_pairs(nodes: Sequence[str]) -> list[frozenset]:
    return [frozenset(p) for p in combinations(sorted(nodes), 2)]
