"""Lattice polyhedra: two-phase greedy, greedy supports and their ASCs, separation,
Carathéodory peeling into extreme points, and the rooted-cut lattice of a graph.

A lattice oracle only has to answer "largest member inside a given element
set" and evaluate requirements; ``leq``/``meet``/``join`` and member
enumeration are used for checks and for peeling at desk scale.
"""
from __future__ import annotations

from collections import deque
from collections.abc import Callable, Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from .core.engine import ResidualState, run_engine
from .core.lift import lift_marginals
from .core.types import (
    ONE,
    ZERO,
    Decomposition,
    GroundSet,
    Instance,
    Marginals,
    Requirements,
    SetFamily,
    Violation,
    as_fraction,
)
from .errors import NotInYStar, OracleFailure, OracleInconsistent, ValidationError
from .exactlp import LinearProgram, solve

CG_ITERATION_LIMIT = 10_000


class LatticeOracle:
    """Interface of a lattice family with requirements.

    Subclasses implement ``max_member``, ``pi``, ``leq`` and, for checks and
    peeling, ``members``, ``meet`` and ``join``.
    """

    ground: GroundSet
    enumerable = True

    def max_member(self, allowed: frozenset) -> frozenset | None:
        raise NotImplementedError

    def pi(self, member: frozenset) -> Fraction:
        raise NotImplementedError

    def leq(self, P: frozenset, Q: frozenset) -> bool:
        raise NotImplementedError

    def members(self) -> Iterator[frozenset]:
        raise NotImplementedError

    def meet(self, P, Q) -> frozenset:
        raise NotImplementedError

    def join(self, P, Q) -> frozenset:
        raise NotImplementedError

    def top(self) -> frozenset | None:
        return self.max_member(frozenset(self.ground))


class ExplicitLattice(LatticeOracle):
    """A lattice given by its member list, an order (default inclusion) and requirements."""

    def __init__(
        self,
        ground: GroundSet,
        members: Iterable[Iterable[str]],
        pi: Mapping | Callable[[frozenset], object],
        leq: Callable[[frozenset, frozenset], bool] | None = None,
    ):
        self.ground = ground
        seen: dict[frozenset, None] = {}
        for m in members:
            seen.setdefault(ground.subset(m), None)
        self._members = list(seen)
        self._leq = leq or (lambda P, Q: P <= Q)
        if callable(pi):
            self._pi = {m: as_fraction(pi(m)) for m in self._members}
        else:
            self._pi = {frozenset(k): as_fraction(v) for k, v in pi.items()}
        missing = [m for m in self._members if m not in self._pi]
        if missing:
            raise ValidationError(f"no requirement for members {[ground.ordered(m) for m in missing]}")

    def members(self):
        return iter(self._members)

    def pi(self, member):
        return self._pi[member]

    def leq(self, P, Q):
        return P == Q or self._leq(P, Q)

    def _extreme(self, candidates: list[frozenset], upper: bool) -> frozenset | None:
        for c in candidates:
            if all((self.leq(o, c) if upper else self.leq(c, o)) for o in candidates):
                return c
        if candidates:
            raise OracleInconsistent("member set has no unique extreme element")
        return None

    def max_member(self, allowed):
        return self._extreme([m for m in self._members if m <= allowed], upper=True)

    def meet(self, P, Q):
        return self._extreme([m for m in self._members if self.leq(m, P) and self.leq(m, Q)], True)

    def join(self, P, Q):
        return self._extreme([m for m in self._members if self.leq(P, m) and self.leq(Q, m)], False)


class RootedCutLattice(LatticeOracle):
    """Cuts delta(U) for U not containing the root, ordered by containment of U.

    ``edges`` maps edge identifiers (the ground elements) to unordered node
    pairs; the graph must be connected.  Requirements are ``alpha(U) / beta``
    or, with ``value``, an arbitrary function of the node set U.
    """

    def __init__(
        self,
        nodes: Sequence[str],
        edges: Mapping[str, tuple[str, str]],
        root: str,
        alpha: Mapping[str, object] | None = None,
        beta=1,
        value: Callable[[frozenset], object] | None = None,
        ground: GroundSet | None = None,
    ):
        self.nodes = tuple(nodes)
        if root not in self.nodes:
            raise ValidationError(f"root {root!r} is not a node")
        self.root = root
        self.ground = GroundSet(edges) if ground is None else ground
        self.edges = {e: tuple(edges[e]) for e in self.ground}
        for e, (u, v) in self.edges.items():
            if u not in self.nodes or v not in self.nodes:
                raise ValidationError(f"edge {e!r} has an unknown endpoint")
            if u == v:
                raise ValidationError(f"edge {e!r} is a loop")
        self.adj = {v: [] for v in self.nodes}
        for e, (u, v) in self.edges.items():
            self.adj[u].append((e, v))
            self.adj[v].append((e, u))
        if len(self._component(frozenset(self.ground))) != len(self.nodes):
            raise ValidationError("the graph must be connected")
        self.beta = as_fraction(beta)
        if self.beta <= 0:
            raise ValidationError("beta must be positive")
        self.alpha = {v: as_fraction(x) for v, x in (alpha or {}).items()}
        self._value = value
        self._u_cache: dict[frozenset, frozenset] = {}
        self._pi_cache: dict[frozenset, Fraction] = {}

    def _component(self, usable: frozenset) -> set:
        seen = {self.root}
        q = deque([self.root])
        while q:
            u = q.popleft()
            for e, v in self.adj[u]:
                if e in usable and v not in seen:
                    seen.add(v)
                    q.append(v)
        return seen

    def cut(self, U: Iterable[str]) -> frozenset:
        U = frozenset(U)
        return frozenset(e for e, (u, v) in self.edges.items() if (u in U) != (v in U))

    def side(self, member: frozenset) -> frozenset:
        """The node set U (root excluded) with delta(U) = member."""
        try:
            return self._u_cache[member]
        except KeyError:
            pass
        color = {self.root: 0}
        q = deque([self.root])
        while q:
            u = q.popleft()
            for e, v in self.adj[u]:
                c = color[u] ^ (e in member)
                if v not in color:
                    color[v] = c
                    q.append(v)
                elif color[v] != c:
                    raise ValidationError(f"{self.ground.ordered(member)} is not a rooted cut")
        U = frozenset(v for v, c in color.items() if c)
        self._u_cache[member] = U
        return U

    def value(self, U: frozenset) -> Fraction:
        if self._value is not None:
            return as_fraction(self._value(U))
        return sum((self.alpha.get(v, ZERO) for v in U), ZERO) / self.beta

    def pi(self, member):
        try:
            return self._pi_cache[member]
        except KeyError:
            v = self._pi_cache[member] = self.value(self.side(member))
            return v

    def max_member(self, allowed):
        keep = frozenset(self.ground) - allowed
        U = frozenset(self.nodes) - self._component(keep)
        P = self.cut(U)
        self._u_cache.setdefault(P, U)
        return P

    def leq(self, P, Q):
        return self.side(P) <= self.side(Q)

    def meet(self, P, Q):
        return self.cut(self.side(P) & self.side(Q))

    def join(self, P, Q):
        return self.cut(self.side(P) | self.side(Q))

    def members(self):
        others = [v for v in self.nodes if v != self.root]
        for k in range(len(others) + 1):
            for U in combinations(others, k):
                P = self.cut(U)
                self._u_cache.setdefault(P, frozenset(U))
                yield P


@dataclass(frozen=True)
class GreedySupport:
    """Elements e_1..e_m and members P_1..P_m certifying an extreme point.

    ``pis`` are the (possibly shifted) requirements used by the greedy run and
    ``duals`` its dual multipliers on the chain.
    """

    elements: tuple
    members: tuple
    pis: tuple
    duals: tuple = ()

    def __len__(self) -> int:
        return len(self.elements)

    def prefix(self, k: int) -> "GreedySupport":
        return GreedySupport(self.elements[:k], self.members[:k], self.pis[:k], self.duals[:k])


def _greedy(elements, max_member, pi, cost):
    """Two-phase greedy on an abstract lattice; returns (point, GreedySupport)."""
    order = {e: i for i, e in enumerate(elements)}
    reduced = {e: cost[e] for e in elements}
    removed: list = []
    allowed = set(elements)
    chosen, members, pis, duals = [], [], [], []
    while True:
        P = max_member(frozenset(allowed))
        if P is None:
            break
        if not P <= allowed:
            raise OracleInconsistent("lattice oracle returned a member outside the allowed set")
        value = pi(P)
        if value <= 0:
            break
        if not P:
            raise OracleInconsistent("empty member with positive requirement")
        e = min(P, key=lambda x: (reduced[x], order[x]))
        x = reduced[e]
        if x < 0:
            raise OracleInconsistent("reduced cost became negative; the lattice is not consecutive")
        for f in P:
            reduced[f] -= x
        chosen.append(e)
        members.append(P)
        pis.append(value)
        duals.append(x)
        allowed.discard(e)
        removed.append(e)
    point = {e: ZERO for e in elements}
    for i in range(len(chosen) - 1, -1, -1):
        later = sum((point[chosen[j]] for j in range(i + 1, len(chosen)) if chosen[j] in members[i]), ZERO)
        point[chosen[i]] = pis[i] - later
    return point, GreedySupport(tuple(chosen), tuple(members), tuple(pis), tuple(duals))


def two_phase_greedy(oracle: LatticeOracle, cost: Mapping | None = None, shift=ZERO):
    """Minimize ``cost`` (default all ones) over the covering polyhedron of requirements pi - shift.

    Returns the optimal extreme point (a dict over the ground set) and its
    greedy support.
    """
    elements = list(oracle.ground)
    cost = {e: ONE for e in elements} if cost is None else {e: as_fraction(cost.get(e, ZERO)) for e in elements}
    if any(c < 0 for c in cost.values()):
        raise ValidationError("greedy costs must be nonnegative")
    shift = as_fraction(shift)
    return _greedy(elements, oracle.max_member, lambda P: oracle.pi(P) - shift, cost)


def asc_from_support(support: GreedySupport) -> frozenset:
    """Reverse scan adding e_i whenever P_i does not meet the set built so far."""
    S: set = set()
    for e, P in zip(reversed(support.elements), reversed(support.members)):
        if not (P & S):
            S.add(e)
    return frozenset(S)


def truncate(oracle: LatticeOracle, support: GreedySupport, offset) -> GreedySupport:
    """Longest prefix on which the residual requirements pi - offset stay positive."""
    k = 0
    while k < len(support) and oracle.pi(support.members[k]) - offset > 0:
        k += 1
    return support.prefix(k)


class LatticeFamily(SetFamily):
    """Set-family view of a lattice oracle; separation goes through column generation."""

    def __init__(self, oracle: LatticeOracle, separation: str = "greedy"):
        self.oracle = oracle
        self.enumerable = oracle.enumerable
        self.separation = separation

    def members(self):
        return self.oracle.members()

    def max_requirement(self, requirements):
        return max(self.oracle.pi(P) for P in self.oracle.members())

    def most_violated(self, requirements, rho, offset=ZERO):
        if self.separation == "greedy":
            return lattice_most_violated(self.oracle, rho, offset)
        from .core.types import most_violated_by_enumeration

        return most_violated_by_enumeration(lattice_instance(self.oracle, "enumerate"), rho, offset)


class _LatticeRequirements(Requirements):
    def __init__(self, oracle):
        self.oracle = oracle

    def __call__(self, member):
        return self.oracle.pi(member)


def lattice_instance(oracle: LatticeOracle, separation: str = "greedy") -> Instance:
    return Instance(oracle.ground, LatticeFamily(oracle, separation), _LatticeRequirements(oracle))


class LatticeAsc:
    """ASC oracle for an extreme point: the reverse scan over the truncated greedy support."""

    def __init__(self, oracle: LatticeOracle, support: GreedySupport):
        self.oracle = oracle
        self.support = support
        self.history: list[GreedySupport] = []

    def next_asc(self, state: ResidualState) -> frozenset:
        current = truncate(self.oracle, self.support, state.offset)
        self.history.append(current)
        return asc_from_support(current)


def decompose_extreme(
    oracle: LatticeOracle, point: Mapping, support: GreedySupport, debug: bool = False, runs: list | None = None
):
    """Decompose an extreme point of the covering polyhedron given its greedy support.

    Engine runs are appended to ``runs`` when it is given.
    """
    inst = lattice_instance(oracle)
    asc = LatticeAsc(oracle, support)
    run = run_engine(inst, Marginals(oracle.ground, point), asc, debug=debug, precheck=False)
    if runs is not None:
        runs.append(run)
    return run.decomposition


class _Extended:
    """The lattice with one extra element contained in every member."""

    DUMMY = ("extra",)

    def __init__(self, oracle, offset):
        self.oracle = oracle
        self.offset = offset

    def max_member(self, allowed):
        if self.DUMMY not in allowed:
            return None
        P = self.oracle.max_member(allowed - {self.DUMMY})
        return None if P is None else P | {self.DUMMY}

    def pi(self, member):
        return self.oracle.pi(member - {self.DUMMY}) - self.offset


def lattice_most_violated(oracle: LatticeOracle, rho: Mapping, offset=ZERO) -> Violation:
    """Exact maximizer of pi_P - offset - rho(P) by column generation with greedy pricing.

    The master LP mixes extreme points of the covering polyhedron for the lattice extended by one
    element contained in every member; its optimum is the largest gap (plus a
    fixed shift that keeps it positive) and the final greedy chain contains a
    maximizing member.
    """
    ground = list(oracle.ground)
    rho = {e: as_fraction(rho[e]) for e in ground}
    top = oracle.top()
    if top is None:
        raise OracleFailure("the lattice has no members")
    shift = max(ZERO, sum((rho[e] for e in top), ZERO) - (oracle.pi(top) - offset)) + 1
    ext = _Extended(oracle, offset - shift)
    d = _Extended.DUMMY
    elements = ground + [d]
    columns = [{**{e: ZERO for e in ground}, d: max(ext.pi(top | {d}), ZERO)}]
    for _ in range(CG_ITERATION_LIMIT):
        lp = LinearProgram([c[d] for c in columns])
        for e in ground:
            lp.add([c[e] for c in columns], "<=", rho[e])
        lp.add([ONE] * len(columns), "=", ONE)
        sol = solve(lp)
        if not sol.optimal:
            raise OracleFailure(f"separation master LP is {sol.status}")
        weights = {e: -y for e, y in zip(ground, sol.duals)}
        sigma = sol.duals[-1]
        cost = {**weights, d: ONE}
        point, support = _greedy(elements, ext.max_member, ext.pi, cost)
        price = sum((cost[e] * point[e] for e in elements), ZERO)
        if price >= sigma:
            break
        columns.append(point)
    else:
        raise OracleFailure("column generation did not converge")
    best = None
    for P in support.members:
        P = P - {d}
        gap = oracle.pi(P) - offset - sum((rho[e] for e in P), ZERO)
        if best is None or gap > best.gap or (
            gap == best.gap and oracle.ground.key(P) < oracle.ground.key(best.member)
        ):
            best = Violation(P, gap)
    if best is None or best.gap != sol.value - shift:
        raise OracleInconsistent("greedy chain does not attain the separation optimum")
    return best


def max_violated_lattice(oracle: LatticeOracle, rho: Mapping) -> Violation | None:
    worst = lattice_most_violated(oracle, rho)
    return worst if worst.gap > 0 else None


@dataclass
class Caratheodory:
    """rho = sum of weight * point over ``parts`` plus ``ray`` (componentwise nonnegative)."""

    parts: list  # (weight, point dict, GreedySupport)
    ray: dict

    def recombine(self, ground) -> dict:
        out = {e: self.ray[e] for e in ground}
        for w, p, _ in self.parts:
            for e in ground:
                out[e] += w * p[e]
        return out


def caratheodory_decompose(oracle: LatticeOracle, rho: Mapping, check: bool = True) -> Caratheodory:
    """Write rho as a convex combination of extreme points of the covering polyhedron plus a ray.

    Each step takes a vertex of the minimal face containing the current
    point (greedy with the face's normal-cone cost), then moves the point
    away from that vertex to the boundary of the face.
    """
    ground = list(oracle.ground)
    x = {e: as_fraction(rho[e]) for e in ground}
    if check:
        worst = max_violated_lattice(oracle, x)
        if worst is not None:
            raise NotInYStar(
                f"covering condition violated on {oracle.ground.ordered(worst.member)} by {worst.gap}",
                worst.member,
                worst.gap,
            )
    members = [(P, oracle.pi(P)) for P in oracle.members()]
    coef = ONE
    parts = []
    for _ in range(len(ground) + 2):
        tight = [P for P, p in members if sum((x[e] for e in P), ZERO) == p]
        cost = {e: ZERO for e in ground}
        for P in tight:
            for e in P:
                cost[e] += 1
        for e in ground:
            if x[e] == 0:
                cost[e] += 1
        v, support = two_phase_greedy(oracle, cost)
        direction = {e: x[e] - v[e] for e in ground}
        if all(d >= 0 for d in direction.values()):
            parts.append((coef, v, support))
            return Caratheodory(parts, {e: coef * direction[e] for e in ground})
        t = None
        for P, p in members:
            dp = sum((direction[e] for e in P), ZERO)
            if dp < 0:
                vp = sum((v[e] for e in P), ZERO)
                bound = (vp - p) / -dp
                t = bound if t is None or bound < t else t
        for e in ground:
            if direction[e] < 0:
                bound = v[e] / -direction[e]
                t = bound if t is None or bound < t else t
        if t is None or t <= 1:
            raise OracleFailure("Carathéodory step did not leave the current point's face")
        parts.append((coef * (1 - 1 / t), v, support))
        x = {e: v[e] + t * direction[e] for e in ground}
        coef = coef / t
    raise OracleFailure("Carathéodory peeling needed more than |E| + 1 vertices")


def decompose_lattice(
    oracle: LatticeOracle, rho: Mapping, debug: bool = False, runs: list | None = None
) -> Decomposition:
    """Feasible decomposition of rho for a lattice family, or NotInYStar."""
    ground = oracle.ground
    rho = rho if isinstance(rho, Marginals) else Marginals(ground, rho)
    peel = caratheodory_decompose(oracle, rho)
    mix = Decomposition.mixture(
        ground, [(w, decompose_extreme(oracle, p, s, debug=debug, runs=runs)) for w, p, s in peel.parts]
    )
    return lift_marginals(mix, rho)


def greedy_violations(oracle: LatticeOracle, support: GreedySupport, point: Mapping, shift=ZERO) -> list[str]:
    """Check every greedy-support property by enumerating the lattice.

    The properties: e_i lies in P_i; P_i is the largest member avoiding
    e_1..e_{i-1}; requirements are positive on the chain and nonpositive on
    members avoiding all e_i; the chain members are tight and the point is
    zero off the support; the chain strictly decreases; e_i avoids later
    members; members strictly between P_{i+1} and P_i contain the chosen
    elements of P_i; members below P_m with positive requirement contain e_m.
    """
    pi = lambda P: oracle.pi(P) - shift  # noqa: E731
    els, mem = support.elements, support.members
    m = len(els)
    chosen = frozenset(els)
    members = list(oracle.members())
    problems = []
    for i in range(m):
        if els[i] not in mem[i]:
            problems.append(f"element {i + 1} not in its member")
        if oracle.max_member(frozenset(oracle.ground) - set(els[:i])) != mem[i]:
            problems.append(f"member {i + 1} not the largest avoiding earlier elements")
        if pi(mem[i]) <= 0:
            problems.append(f"member {i + 1}: requirement not positive")
        if sum((point[e] for e in mem[i]), ZERO) != pi(mem[i]):
            problems.append(f"member {i + 1}: not tight")
    for Q in members:
        if not Q & chosen and pi(Q) > 0:
            problems.append(f"{oracle.ground.ordered(Q)} avoids all chosen elements with positive requirement")
    for e in oracle.ground:
        if e not in chosen and point[e] != 0:
            problems.append(f"{e!r} outside the support is nonzero")
    for i in range(m - 1):
        if not (oracle.leq(mem[i + 1], mem[i]) and mem[i + 1] != mem[i]):
            problems.append(f"chain does not strictly decrease at {i + 1}")
    for i in range(m):
        for j in range(i + 1, m):
            if els[i] in mem[j]:
                problems.append(f"element {i + 1} lies in later member {j + 1}")
    for i in range(m - 1):
        inner = mem[i] & chosen
        for Q in members:
            if oracle.leq(Q, mem[i]) and oracle.leq(mem[i + 1], Q) and Q != mem[i + 1]:
                if not inner <= Q:
                    problems.append(f"sandwiched member {oracle.ground.ordered(Q)} misses chosen elements of member {i + 1}")
    if m:
        for Q in members:
            if oracle.leq(Q, mem[-1]) and pi(Q) > 0 and els[-1] not in Q:
                problems.append(f"{oracle.ground.ordered(Q)} below the last member misses its element")
    return problems


def lattice_axiom_violations(oracle: LatticeOracle) -> list[str]:
    """Enumerative check of submodularity, consecutivity, and monotone supermodular requirements."""
    members = list(oracle.members())
    problems = []
    for P, Q in combinations(members, 2):
        lo, hi = oracle.meet(P, Q), oracle.join(P, Q)
        for e in oracle.ground:
            if (e in lo) + (e in hi) > (e in P) + (e in Q):
                problems.append(f"SM fails for {oracle.ground.ordered(P)}, {oracle.ground.ordered(Q)}")
                break
        if oracle.pi(lo) + oracle.pi(hi) < oracle.pi(P) + oracle.pi(Q):
            problems.append("requirements not supermodular")
    for P in members:
        for Q in members:
            if not oracle.leq(P, Q):
                continue
            if oracle.pi(P) > oracle.pi(Q):
                problems.append("requirements not monotone")
            for R in members:
                if oracle.leq(Q, R) and not (P & R) <= Q:
                    problems.append("CS fails")
    return problems
