"""Domain values: ground sets, marginals, requirements, set families, decompositions.

Everything numeric is a :class:`fractions.Fraction`.  Subsets of the ground set
are plain ``frozenset`` objects of element identifiers.
"""
from __future__ import annotations

from collections.abc import Callable, Iterable, Iterator, Mapping
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

from ..errors import FamilyNotEnumerable, ValidationError

Subset = frozenset
ZERO = Fraction(0)
ONE = Fraction(1)
EMPTY: frozenset = frozenset()


def as_fraction(value) -> Fraction:
    """Parse ``value`` into an exact rational.

    Accepts ints, Fractions, ``"p/q"`` strings and decimal strings.  Floats are
    converted through their shortest decimal representation so that ``0.3``
    becomes ``3/10`` rather than its binary expansion.
    """
    if isinstance(value, bool):
        raise ValidationError(f"not a number: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, float):
        value = repr(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"not an exact number: {value!r}") from exc
    try:
        return Fraction(value)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"not a number: {value!r}") from exc


def fraction_str(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


class GroundSet:
    """Ordered finite set of string identifiers."""

    def __init__(self, elements: Iterable[str]):
        self.elements = tuple(elements)
        self.index = {e: i for i, e in enumerate(self.elements)}
        if len(self.index) != len(self.elements):
            raise ValidationError("ground set identifiers must be unique")
        for e in self.elements:
            if not isinstance(e, str):
                raise ValidationError(f"element identifiers must be strings, got {e!r}")

    def __iter__(self) -> Iterator[str]:
        return iter(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, e) -> bool:
        return e in self.index

    def __eq__(self, other) -> bool:
        return isinstance(other, GroundSet) and self.elements == other.elements

    def __hash__(self) -> int:
        return hash(self.elements)

    def __repr__(self) -> str:
        return f"GroundSet({list(self.elements)!r})"

    def subset(self, items: Iterable[str]) -> frozenset:
        s = frozenset(items)
        bad = [e for e in s if e not in self.index]
        if bad:
            raise ValidationError(f"elements not in ground set: {sorted(bad)}")
        return s

    def key(self, subset: Iterable[str]) -> tuple[int, ...]:
        """Lexicographic sort key used for every deterministic tie-break."""
        return tuple(sorted(self.index[e] for e in subset))

    def ordered(self, subset: Iterable[str]) -> list[str]:
        return sorted(subset, key=self.index.__getitem__)

    def mask(self, subset: Iterable[str]) -> int:
        m = 0
        for e in subset:
            m |= 1 << self.index[e]
        return m

    def from_mask(self, mask: int) -> frozenset:
        return frozenset(e for i, e in enumerate(self.elements) if mask >> i & 1)


class Marginals(Mapping):
    """Per-element probabilities, exactly in [0, 1]; missing elements default to 0."""

    def __init__(self, ground: GroundSet, values: Mapping[str, object] | None = None):
        self.ground = ground
        vals = {e: ZERO for e in ground}
        for e, v in (values or {}).items():
            if e not in ground:
                raise ValidationError(f"marginal given for unknown element {e!r}")
            x = as_fraction(v)
            if not ZERO <= x <= ONE:
                raise ValidationError(f"marginal of {e!r} is {x}, outside [0, 1]")
            vals[e] = x
        self._values = vals

    def __getitem__(self, e: str) -> Fraction:
        return self._values[e]

    def __iter__(self):
        return iter(self.ground)

    def __len__(self) -> int:
        return len(self._values)

    def __repr__(self) -> str:
        inner = ", ".join(f"{e}: {fraction_str(v)}" for e, v in self._values.items())
        return f"Marginals({{{inner}}})"

    def __eq__(self, other) -> bool:
        if isinstance(other, Mapping):
            return dict(self.items()) == dict(other.items())
        return NotImplemented

    __hash__ = None

    def support(self) -> frozenset:
        return frozenset(e for e, v in self._values.items() if v > 0)

    def total(self, subset: Iterable[str]) -> Fraction:
        return sum((self._values[e] for e in subset), ZERO)


class Requirements:
    """Requirement function pi on family members; values must not exceed 1."""

    mode = "callback"

    def __call__(self, member: frozenset) -> Fraction:
        raise NotImplementedError


class TableRequirements(Requirements):
    mode = "table"

    def __init__(self, table: Mapping[Iterable[str], object], default=None):
        self.table = {frozenset(k): as_fraction(v) for k, v in table.items()}
        self.default = None if default is None else as_fraction(default)
        for k, v in self.table.items():
            if v > ONE:
                raise ValidationError(f"requirement {fraction_str(v)} of {sorted(k)} exceeds 1")
        if self.default is not None and self.default > ONE:
            raise ValidationError("default requirement exceeds 1")

    def __call__(self, member):
        try:
            return self.table[member]
        except KeyError:
            if self.default is not None:
                return self.default
            raise ValidationError(f"no requirement given for member {sorted(member)}") from None


class AffineRequirements(Requirements):
    """pi_P = 1 - sum of mu over P, with mu in [0, 1]."""

    mode = "affine"

    def __init__(self, mu: Mapping[str, object]):
        self.mu = {e: as_fraction(v) for e, v in mu.items()}
        for e, v in self.mu.items():
            if not ZERO <= v <= ONE:
                raise ValidationError(f"affine weight mu[{e!r}] = {v} outside [0, 1]")

    def weight(self, e: str) -> Fraction:
        return self.mu.get(e, ZERO)

    def __call__(self, member):
        return ONE - sum((self.mu.get(e, ZERO) for e in member), ZERO)


class CallbackRequirements(Requirements):
    def __init__(self, fn: Callable[[frozenset], object]):
        self.fn = fn
        self._cache: dict[frozenset, Fraction] = {}

    def __call__(self, member):
        try:
            return self._cache[member]
        except KeyError:
            v = self._cache[member] = as_fraction(self.fn(member))
            return v


@dataclass(frozen=True)
class Violation:
    """A member together with pi_P - sum of rho over P (the gap; positive means violated)."""

    member: frozenset
    gap: Fraction


class SetFamily:
    """Access to the members of a set system.

    Subclasses that are backed by an oracle may override ``most_violated`` and
    ``max_requirement``; the defaults enumerate ``members()``.
    """

    enumerable = True

    def members(self) -> Iterator[frozenset]:
        raise FamilyNotEnumerable(f"{type(self).__name__} cannot enumerate its members")


class ExplicitFamily(SetFamily):
    def __init__(self, ground: GroundSet, members: Iterable[Iterable[str]]):
        seen: dict[frozenset, None] = {}
        for m in members:
            seen.setdefault(ground.subset(m), None)
        self.ground = ground
        self.list = list(seen)

    def members(self):
        return iter(self.list)

    def __len__(self) -> int:
        return len(self.list)


@dataclass(frozen=True)
class Instance:
    """A set system (E, family) with requirements pi."""

    ground: GroundSet
    family: SetFamily
    requirements: Requirements

    def pi(self, member: frozenset) -> Fraction:
        return self.requirements(member)

    @property
    def enumerable(self) -> bool:
        return self.family.enumerable

    def members(self) -> Iterator[frozenset]:
        return self.family.members()

    def validate(self) -> None:
        """Check pi <= 1 on every member and pi(empty) <= 0 (enumerable families only)."""
        if not self.enumerable:
            return
        for m in self.members():
            v = self.pi(m)
            if v > ONE:
                raise ValidationError(f"requirement of {self.ground.ordered(m)} is {v} > 1")
            if not m and v > 0:
                raise ValidationError("the empty member has positive requirement")

    def max_requirement(self) -> Fraction | None:
        hook = getattr(self.family, "max_requirement", None)
        if hook is not None:
            return hook(self.requirements)
        best = None
        for m in self.members():
            v = self.pi(m)
            if best is None or v > best:
                best = v
        return best

    def most_violated(self, rho: Mapping[str, Fraction], offset: Fraction = ZERO) -> Violation | None:
        """Maximize pi_P - offset - rho(P) over the family; None for an empty family."""
        hook = getattr(self.family, "most_violated", None)
        if hook is not None:
            return hook(self.requirements, rho, offset)
        return most_violated_by_enumeration(self, rho, offset)


def most_violated_by_enumeration(inst: Instance, rho, offset=ZERO) -> Violation | None:
    best = None
    best_key = None
    for m in inst.members():
        gap = inst.pi(m) - offset - sum((rho[e] for e in m), ZERO)
        key = inst.ground.key(m)
        if best is None or gap > best.gap or (gap == best.gap and key < best_key):
            best, best_key = Violation(m, gap), key
    return best


class Decomposition:
    """Distribution over subsets of the ground set with exact rational weights.

    Duplicate subsets are merged and zero weights dropped.  Normalization is
    not enforced here; :func:`mdx.core.verify` reports it.
    """

    def __init__(self, ground: GroundSet, weights: Mapping | Iterable = ()):
        self.ground = ground
        pairs = weights.items() if isinstance(weights, Mapping) else weights
        w: dict[frozenset, Fraction] = {}
        for s, x in pairs:
            s = ground.subset(s)
            x = as_fraction(x)
            if x < 0:
                raise ValidationError(f"negative weight {x} on {ground.ordered(s)}")
            w[s] = w.get(s, ZERO) + x
        for s in [s for s, x in w.items() if x == 0]:
            del w[s]
        for s, x in w.items():
            if x > ONE:
                raise ValidationError(f"weight {x} on {ground.ordered(s)} exceeds 1")
        self.weights = w

    def __repr__(self) -> str:
        parts = ", ".join(
            f"{{{','.join(self.ground.ordered(s))}}}: {fraction_str(x)}" for s, x in self.items()
        )
        return f"Decomposition({parts})"

    def __eq__(self, other) -> bool:
        if isinstance(other, Decomposition):
            return self.weights == other.weights
        if isinstance(other, Mapping):
            return self.weights == {frozenset(k): as_fraction(v) for k, v in other.items() if v}
        return NotImplemented

    __hash__ = None

    def __len__(self) -> int:
        return len(self.weights)

    def __contains__(self, s) -> bool:
        return frozenset(s) in self.weights

    def items(self) -> list[tuple[frozenset, Fraction]]:
        return sorted(self.weights.items(), key=lambda kv: self.ground.key(kv[0]))

    def weight(self, s) -> Fraction:
        return self.weights.get(frozenset(s), ZERO)

    def total(self) -> Fraction:
        return sum(self.weights.values(), ZERO)

    def marginal(self, e: str) -> Fraction:
        return sum((x for s, x in self.weights.items() if e in s), ZERO)

    def marginals(self) -> dict[str, Fraction]:
        out = {e: ZERO for e in self.ground}
        for s, x in self.weights.items():
            for e in s:
                out[e] += x
        return out

    def hitting(self, member) -> Fraction:
        member = frozenset(member)
        return sum((x for s, x in self.weights.items() if s & member), ZERO)

    def expectation(self, f: Callable[[frozenset], Fraction]) -> Fraction:
        return sum((x * f(s) for s, x in self.weights.items()), ZERO)

    @classmethod
    def mixture(cls, ground: GroundSet, parts: Iterable[tuple[Fraction, "Decomposition"]]):
        acc: dict[frozenset, Fraction] = {}
        for coef, z in parts:
            for s, x in z.weights.items():
                acc[s] = acc.get(s, ZERO) + coef * x
        return cls(ground, acc)
