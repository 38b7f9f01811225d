"""Balanced hypergraphs: odd special cycles and perfect decompositions.

A perfect decomposition hits every member P with probability
min(rho(P), 1).  It is obtained by adding a private element to every member,
writing the augmented marginals as a dominated mixture of minimal
transversals (integral vertices of the covering polytope for balanced
inputs), and projecting back.
"""
from __future__ import annotations

from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from fractions import Fraction

from .core.lift import lift_marginals
from .core.types import (
    ONE,
    ZERO,
    Decomposition,
    ExplicitFamily,
    GroundSet,
    Instance,
    Marginals,
    TableRequirements,
)
from .errors import NotBalanced, ScaleExceeded, ValidationError
from .exactlp import LinearProgram, solve

TRANSVERSAL_CAP = 10_000
SEARCH_CAP = 2_000_000


class Hypergraph:
    def __init__(self, ground: GroundSet, members: Iterable[Iterable[str]]):
        fam = ExplicitFamily(ground, members)
        if any(not m for m in fam.list):
            raise ValidationError("hypergraph members must be nonempty")
        self.ground = ground
        self.members = fam.list
        self.family = fam
        self._transversals: list[frozenset] | None = None

    def __repr__(self) -> str:
        return f"Hypergraph({[self.ground.ordered(m) for m in self.members]!r})"


@dataclass(frozen=True)
class SpecialCycle:
    elements: tuple
    members: tuple

    def violations(self) -> list[str]:
        k = len(self.elements)
        C = frozenset(self.elements)
        out = []
        if len(C) != k or len(set(self.members)) != k or len(self.members) != k:
            out.append("elements and members must be distinct and equally many")
        for i, P in enumerate(self.members):
            want = {self.elements[i], self.elements[(i + 1) % k]}
            if P & C != want:
                out.append(f"member {i + 1} meets the cycle in {sorted(P & C)}, expected {sorted(want)}")
        return out

    @property
    def odd(self) -> bool:
        return len(self.elements) % 2 == 1


def find_odd_special_cycle(h: Hypergraph, cap: int = SEARCH_CAP) -> SpecialCycle | None:
    """Depth-first search for an odd special cycle of length >= 3.

    The first element of the cycle is its smallest in ground order, and each
    extension is checked against all earlier members and elements so that
    only special sequences are grown.
    """
    idx = h.ground.index
    members = h.members
    containing = {e: [j for j, P in enumerate(members) if e in P] for e in h.ground}
    budget = [cap]

    def extend(elems, mems, used):
        budget[0] -= 1
        if budget[0] < 0:
            raise ScaleExceeded(f"special-cycle search exceeded {cap} steps")
        last = elems[-1]
        first = elems[0]
        C = set(elems)
        k = len(elems)
        for j in containing[last]:
            if j in used:
                continue
            P = members[j]
            inside = P & C
            # closing member: meets the cycle exactly in {last, first}
            if k >= 3 and k % 2 == 1 and inside == {last, first}:
                return SpecialCycle(tuple(elems), tuple(members[i] for i in mems + [j]))
            if inside != {last}:
                continue
            for f in sorted(P - C, key=idx.__getitem__):
                if idx[f] < idx[first]:
                    continue
                if any(f in members[i] for i in mems):
                    continue
                found = extend(elems + [f], mems + [j], used | {j})
                if found is not None:
                    return found
        return None

    for e in h.ground:
        found = extend([e], [], frozenset())
        if found is not None:
            return found
    return None


def pi_rho(h: Hypergraph, rho: Mapping) -> TableRequirements:
    """Perfect targets min(rho(P), 1) for every member."""
    return TableRequirements({P: min(sum((Fraction(rho[e]) for e in P), ZERO), ONE) for P in h.members})


def perfect_instance(h: Hypergraph, rho: Mapping) -> Instance:
    return Instance(h.ground, h.family, pi_rho(h, rho))


def minimal_transversals(members: list[frozenset], cap: int = TRANSVERSAL_CAP) -> list[frozenset]:
    """All inclusion-minimal sets meeting every member (branching on the first missed member)."""
    found: set[frozenset] = set()

    def branch(T: frozenset, start: int):
        for i in range(start, len(members)):
            if not members[i] & T:
                for e in sorted(members[i], key=str):
                    branch(T | {e}, i + 1)
                return
        if all(any((P & T) == {e} for P in members) for e in T):
            found.add(T)
            if len(found) > cap:
                raise ScaleExceeded(f"more than {cap} minimal transversals")

    branch(frozenset(), 0)
    return sorted(found, key=lambda T: (len(T), sorted(map(str, T))))


def _augmented(h: Hypergraph):
    private = [("private", i) for i in range(len(h.members))]
    members = [P | {p} for P, p in zip(h.members, private)]
    return private, members


def transversals(h: Hypergraph, cap: int = TRANSVERSAL_CAP) -> list[frozenset]:
    """Minimal transversals of the augmented hypergraph (cached on ``h``)."""
    if h._transversals is None:
        _, members = _augmented(h)
        h._transversals = minimal_transversals(members, cap)
    return h._transversals


def perfect_decompose(h: Hypergraph, rho: Mapping, cap: int = TRANSVERSAL_CAP) -> Decomposition:
    """Perfect decomposition of rho, or NotBalanced carrying the LP's Farkas certificate."""
    rho = rho if isinstance(rho, Marginals) else Marginals(h.ground, rho)
    private, members = _augmented(h)
    target = pi_rho(h, rho)
    extended = {e: rho[e] for e in h.ground}
    for P, p in zip(h.members, private):
        extended[p] = ONE - target(P)
    ts = transversals(h, cap)
    coords = list(h.ground) + private
    lp = LinearProgram([ZERO] * len(ts))
    for c in coords:
        lp.add([ONE if c in T else ZERO for T in ts], "<=", extended[c])
    lp.add([ONE] * len(ts), "=", ONE)
    sol = solve(lp, max_variables=max(cap, 1))
    if not sol.optimal:
        raise NotBalanced("no dominated mixture of minimal transversals exists", farkas=sol.farkas)
    ground_set = frozenset(h.ground)
    z = Decomposition(h.ground, [(T & ground_set, w) for T, w in zip(ts, sol.point) if w])
    return lift_marginals(z, rho)
