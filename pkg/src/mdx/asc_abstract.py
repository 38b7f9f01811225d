"""ASC oracle for abstract networks, with s-t path systems of digraphs as the concrete case.

Each member carries a linear order of its elements.  Crossing ``P x_e Q``
returns a member contained in the prefix of ``P`` up to ``e`` together with
the suffix of ``Q`` from ``e``.
"""
from __future__ import annotations

import heapq
from collections.abc import Callable, Iterable, Mapping, Sequence
from fractions import Fraction
from itertools import count

from .core.engine import ResidualState
from .core.types import (
    ONE,
    ZERO,
    AffineRequirements,
    GroundSet,
    Instance,
    Requirements,
    SetFamily,
    Violation,
    most_violated_by_enumeration,
)
from .errors import NoPath, OracleFailure, ScaleExceeded, ValidationError

PATH_CAP = 100_000


class AbstractNetwork(SetFamily):
    """Explicit list of ordered members.

    ``cross(i, e, j)`` returns the index of a member realizing ``P_i x_e P_j``.
    Without a user-supplied ``cross``, the first member (in list order)
    inside prefix(P_i, e) + suffix(P_j, e) is used; :func:`check_crossing`
    reports pairs where no such member exists.
    """

    def __init__(
        self,
        ground: GroundSet,
        orders: Iterable[Sequence[str]],
        cross: Callable[[int, str, int], int] | None = None,
    ):
        self.ground = ground
        self._orders: list[tuple[str, ...]] = []
        self._sets: list[frozenset] = []
        self._index: dict[frozenset, int] = {}
        for order in orders:
            self._add(tuple(order))
        self._cross = cross

    def _add(self, order: tuple[str, ...]) -> None:
        s = self.ground.subset(order)
        if len(s) != len(order):
            raise ValidationError(f"member order {list(order)} lists an element twice")
        if s in self._index:
            return
        self._index[s] = len(self._orders)
        self._orders.append(order)
        self._sets.append(s)

    @property
    def orders(self) -> list[tuple[str, ...]]:
        self._materialize()
        return self._orders

    def _materialize(self) -> None:
        pass

    def members(self):
        self._materialize()
        return iter(self._sets)

    def __len__(self) -> int:
        self._materialize()
        return len(self._sets)

    def index_of(self, member: frozenset) -> int:
        self._materialize()
        return self._index[member]

    def member(self, i: int) -> frozenset:
        self._materialize()
        return self._sets[i]

    def order(self, member: frozenset) -> tuple[str, ...]:
        return self.orders[self.index_of(member)]

    def prefix(self, i: int, e: str) -> tuple[str, ...]:
        o = self.orders[i]
        return o[: o.index(e) + 1]

    def suffix(self, i: int, e: str) -> tuple[str, ...]:
        o = self.orders[i]
        return o[o.index(e):]

    def cross(self, i: int, e: str, j: int) -> int:
        if self._cross is not None:
            return self._cross(i, e, j)
        allowed = set(self.prefix(i, e)) | set(self.suffix(j, e))
        for k, s in enumerate(self._sets):
            if s <= allowed:
                return k
        raise OracleFailure(f"no member inside the crossing of members {i} and {j} at {e!r}")


def check_crossing(net: AbstractNetwork) -> tuple[int, str, int] | None:
    """First (i, e, j) whose crossing is missing or leaves prefix(P_i, e) + suffix(P_j, e)."""
    n = len(net)
    for i in range(n):
        for j in range(n):
            for e in net.orders[i]:
                if e not in net.member(j):
                    continue
                try:
                    k = net.cross(i, e, j)
                except OracleFailure:
                    return i, e, j
                if not net.member(k) <= set(net.prefix(i, e)) | set(net.suffix(j, e)):
                    return i, e, j
    return None


def check_weak_conservation(net: AbstractNetwork, req: Requirements):
    """Return the first (P, Q, e) with pi_P + pi_Q < pi(P x_e Q) + pi(Q x_e P), or None."""
    n = len(net)
    if n * n > PATH_CAP * 10:
        raise ScaleExceeded(f"{n} members is too many for the pairwise conservation check")
    pis = [req(net.member(i)) for i in range(n)]
    for i in range(n):
        for j in range(n):
            common = net.member(i) & net.member(j)
            for e in net.orders[i]:
                if e not in common:
                    continue
                a, b = net.cross(i, e, j), net.cross(j, e, i)
                if pis[i] + pis[j] < pis[a] + pis[b]:
                    return net.member(i), net.member(j), e
    return None


def enumerate_tight(net: AbstractNetwork, req: Requirements, state: ResidualState) -> list[frozenset]:
    """All members with residual sum equal to the residual requirement."""
    return [P for P in net.members() if state.total(P) == req(P) - state.offset]


def next_asc(net: AbstractNetwork, req: Requirements, state: ResidualState) -> frozenset:
    """Positive-residual elements not preceded, in some tight member, by another positive one."""
    support = state.support()
    excluded = set()
    for P in enumerate_tight(net, req, state):
        seen_positive = False
        for e in net.order(P):
            if e not in support:
                continue
            if seen_positive:
                excluded.add(e)
            seen_positive = True
    return support - excluded


class AbstractAsc:
    def __init__(self, inst: Instance):
        if not isinstance(inst.family, AbstractNetwork):
            raise ValidationError("abstract-network ASCs need an AbstractNetwork family")
        self.inst = inst

    def next_asc(self, state: ResidualState) -> frozenset:
        return next_asc(self.inst.family, self.inst.requirements, state)


class DigraphPathSystem(AbstractNetwork):
    """Simple s-t paths of a digraph whose arcs are the ground elements.

    ``arcs`` maps arc identifiers to (tail, head); parallel arcs are allowed.
    Paths are enumerated lazily (depth first, arcs in ground order) under
    ``cap``.  Separation for affine requirements uses Dijkstra instead.
    """

    def __init__(
        self,
        arcs: Mapping[str, tuple[str, str]],
        source: str,
        sink: str,
        ground: GroundSet | None = None,
        cap: int = PATH_CAP,
    ):
        ground = GroundSet(arcs) if ground is None else ground
        if set(ground) != set(arcs):
            raise ValidationError("the ground set must consist of exactly the arcs")
        if source == sink:
            raise ValidationError("source and sink must differ")
        super().__init__(ground, [])
        self.arcs = {a: tuple(arcs[a]) for a in ground}
        self.source, self.sink = source, sink
        self.cap = cap
        self.nodes = sorted({v for uv in self.arcs.values() for v in uv} | {source, sink})
        self.out = {v: [] for v in self.nodes}
        for a in ground:
            self.out[self.arcs[a][0]].append(a)
        self._done = False

    def _materialize(self) -> None:
        if self._done:
            return
        self._done = True
        found = 0
        stack = [(self.source, (), frozenset([self.source]))]
        # depth first with arcs in ground order; reversed push keeps that order on pop
        while stack:
            v, path, visited = stack.pop()
            if v == self.sink:
                found += 1
                if found > self.cap:
                    self._done = False
                    raise ScaleExceeded(f"more than {self.cap} s-t paths")
                self._add(path)
                continue
            for a in reversed(self.out[v]):
                w = self.arcs[a][1]
                if w not in visited:
                    stack.append((w, path + (a,), visited | {w}))

    def walk_to_path(self, walk: Sequence[str]) -> tuple[str, ...]:
        """Remove cycles from an s-t walk, cutting at the first repeated node each time."""
        path: list[str] = []
        pos = {self.source: 0}
        for a in walk:
            head = self.arcs[a][1]
            if head in pos:
                cut = pos[head]
                for b in path[cut:]:
                    del pos[self.arcs[b][1]]
                del path[cut:]
                pos[head] = cut
            else:
                path.append(a)
                pos[head] = len(path)
        return tuple(path)

    def cross(self, i: int, e: str, j: int) -> int:
        walk = self.prefix(i, e) + self.suffix(j, e)[1:]
        return self.index_of(frozenset(self.walk_to_path(walk)))

    def shortest_path(self, weight: Mapping[str, Fraction]) -> tuple[tuple[str, ...], Fraction]:
        """Dijkstra with exact nonnegative weights; NoPath if the sink is unreachable."""
        dist = {self.source: ZERO}
        pred: dict[str, str] = {}
        tie = count()
        heap = [(ZERO, next(tie), self.source)]
        done = set()
        while heap:
            d, _, v = heapq.heappop(heap)
            if v in done:
                continue
            done.add(v)
            if v == self.sink:
                break
            for a in self.out[v]:
                w = weight[a]
                if w < 0:
                    raise ValidationError(f"negative arc weight on {a!r}")
                head = self.arcs[a][1]
                nd = d + w
                if head not in dist or nd < dist[head]:
                    dist[head] = nd
                    pred[head] = a
                    heapq.heappush(heap, (nd, next(tie), head))
        if self.sink not in dist:
            raise NoPath(f"{self.sink!r} is not reachable from {self.source!r}")
        path = []
        v = self.sink
        while v != self.source:
            a = pred[v]
            path.append(a)
            v = self.arcs[a][0]
        return tuple(reversed(path)), dist[self.sink]

    def most_violated(self, requirements, rho, offset=ZERO) -> Violation:
        if isinstance(requirements, AffineRequirements):
            weight = {a: requirements.weight(a) + rho[a] for a in self.ground}
            path, w = self.shortest_path(weight)
            return Violation(frozenset(path), ONE - offset - w)
        return most_violated_by_enumeration(Instance(self.ground, self, requirements), rho, offset)

    def max_requirement(self, requirements) -> Fraction:
        if isinstance(requirements, AffineRequirements):
            _, w = self.shortest_path({a: requirements.weight(a) for a in self.ground})
            return ONE - w
        return max(requirements(P) for P in self.members())


def max_violated_affine(sys: DigraphPathSystem, mu: Mapping, rho: Mapping) -> Violation | None:
    """Path maximizing 1 - mu(P) - rho(P), returned only when that gap is positive."""
    worst = sys.most_violated(AffineRequirements(mu), rho)
    return worst if worst.gap > 0 else None


def digraph_instance(sys: DigraphPathSystem, req: Requirements) -> Instance:
    return Instance(sys.ground, sys, req)
