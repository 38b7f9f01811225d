"""Fixed-size committees from a feasible decomposition by systematic sampling.

A decomposition z of rho (sum rho = k) is shrunk to one representative per
hit group, mixed with the empty set at weight eps = max rho_e, and each set
S is then padded to size k by a transportation flow followed by systematic
sampling over cumulative breakpoints.  Marginals stay exactly rho and every
group is hit with probability at least (1 - eps) pi_P.
"""
from __future__ import annotations

import random
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from math import floor

from ..core.checks import Sampler
from ..core.types import (
    EMPTY,
    ONE,
    ZERO,
    Decomposition,
    GroundSet,
    Marginals,
    TableRequirements,
    as_fraction,
)
from ..errors import CardinalityMismatch, OracleFailure, TooManyGroups, ValidationError
from ..exactlp import transport_feasible

TAU_BITS = 53


@dataclass
class CommitteeInstance:
    ground: GroundSet
    rho: Marginals
    k: int
    groups: list = field(default_factory=list)
    requirements: dict = field(default_factory=dict)

    def __post_init__(self):
        if not isinstance(self.rho, Marginals):
            self.rho = Marginals(self.ground, self.rho)
        self.groups = [self.ground.subset(P) for P in self.groups]
        self.requirements = {frozenset(P): as_fraction(v) for P, v in self.requirements.items()}
        for P in self.groups:
            self.requirements.setdefault(P, ZERO)

    @classmethod
    def from_votes(cls, votes: Mapping[str, int], k: int, groups: Iterable = (), requirements=None):
        ground = GroundSet(votes)
        n = sum(votes.values())
        if n <= 0 or any(v < 0 for v in votes.values()):
            raise ValidationError("vote counts must be nonnegative with a positive total")
        rho = {e: Fraction(k * votes[e], n) for e in ground}
        for e, x in rho.items():
            if x > 1:
                raise ValidationError(f"candidate {e!r} has more than a 1/k share of the votes")
        return cls(ground, Marginals(ground, rho), k, list(groups), dict(requirements or {}))

    def pi(self, P) -> Fraction:
        return self.requirements[frozenset(P)]

    def table(self) -> TableRequirements:
        return TableRequirements({P: self.pi(P) for P in self.groups})


def shrink(inst: CommitteeInstance, z: Decomposition) -> Decomposition:
    """Replace each support set by the first element (ground order) of each group it hits."""
    ground = inst.ground
    out = {}
    for S, w in z.weights.items():
        reps = frozenset(ground.ordered(P & S)[0] for P in inst.groups if P & S)
        out[reps] = out.get(reps, ZERO) + w
    return Decomposition(ground, out)


def breakpoints(x: Mapping[str, Fraction], weight: Fraction, order) -> list[Fraction]:
    alphas = [ZERO]
    for e in order:
        alphas.append(alphas[-1] + x.get(e, ZERO) / weight)
    return alphas


def systematic(order, alphas: list[Fraction], tau: Fraction) -> frozenset:
    """Elements e_i with tau + h in [alpha_{i-1}, alpha_i) for some integer h >= 0."""
    chosen = set()
    for i, e in enumerate(order):
        lo, hi = alphas[i], alphas[i + 1]
        if lo == hi:
            continue
        # smallest h >= 0 with tau + h >= lo
        h = 0 if tau >= lo else -floor(tau - lo)
        if tau + h < hi:
            chosen.add(e)
    return frozenset(chosen)


class CommitteeSampler:
    """Law and sampler of fixed-size committees built from z-hat and the transport flow."""

    def __init__(self, inst: CommitteeInstance, z_hat: Decomposition, flow: dict, eps: Fraction):
        self.inst = inst
        self.z_hat = z_hat
        self.flow = flow
        self.eps = eps
        self.order = list(inst.ground)
        self._alphas = {}
        for S, w in z_hat.weights.items():
            x = {e: flow.get((S, e), ZERO) for e in self.order}
            self._alphas[S] = breakpoints(x, w, self.order)
        self._sampler = Sampler(z_hat)
        self._law: Decomposition | None = None

    def complete(self, S: frozenset, tau: Fraction) -> frozenset:
        return S | systematic(self.order, self._alphas[S], tau)

    def law(self) -> Decomposition:
        """Exact distribution: integrate tau over the cells cut out by the breakpoints."""
        if self._law is None:
            acc: dict[frozenset, Fraction] = {}
            for S, w in self.z_hat.weights.items():
                cuts = sorted({a - floor(a) for a in self._alphas[S]} | {ZERO, ONE})
                for lo, hi in zip(cuts, cuts[1:]):
                    T = self.complete(S, lo)
                    acc[T] = acc.get(T, ZERO) + w * (hi - lo)
            self._law = Decomposition(self.inst.ground, acc)
        return self._law

    def draw(self, rng: random.Random) -> frozenset:
        S = self._sampler.draw(rng)
        tau = Fraction(rng.getrandbits(TAU_BITS), 1 << TAU_BITS)
        return self.complete(S, tau)

    def sample(self, n: int, seed: int = 0) -> list[frozenset]:
        rng = random.Random(seed)
        return [self.draw(rng) for _ in range(n)]


def committee_round(inst: CommitteeInstance, z: Decomposition) -> CommitteeSampler:
    """Turn a feasible decomposition of rho into a sampler of size-k committees."""
    rho = inst.rho
    k = inst.k
    if rho.total(inst.ground) != k:
        raise CardinalityMismatch(f"marginals sum to {rho.total(inst.ground)}, not k = {k}")
    if len(inst.groups) > k:
        raise TooManyGroups(f"{len(inst.groups)} groups exceed the committee size {k}")
    marg = z.marginals()
    if any(marg[e] != rho[e] for e in inst.ground) or z.total() != ONE:
        raise ValidationError("z must be a normalized decomposition with marginals rho")
    eps = max((rho[e] for e in inst.ground), default=ZERO)
    shrunk = shrink(inst, z)
    hat = {S: (1 - eps) * w for S, w in shrunk.weights.items()}
    hat[EMPTY] = hat.get(EMPTY, ZERO) + eps
    z_hat = Decomposition(inst.ground, hat)
    hat_marg = z_hat.marginals()
    residual = {e: rho[e] - hat_marg[e] for e in inst.ground}
    supplies = {S: (k - len(S)) * w for S, w in z_hat.weights.items()}
    arcs, caps = [], {}
    for S, w in z_hat.weights.items():
        for e in inst.ground:
            if e not in S:
                arcs.append((S, e))
                caps[(S, e)] = w
    result = transport_feasible(supplies, residual, arcs, caps)
    if not result.feasible:
        raise OracleFailure("the padding transportation problem is infeasible")
    return CommitteeSampler(inst, z_hat, result.flow, eps)
