from __future__ import annotations

from collections.abc import Mapping
from fractions import Fraction

from ..errors import DeficitNegative
from .types import ZERO, Decomposition


def lift_marginals(z: Decomposition, rho: Mapping[str, Fraction]) -> Decomposition:
    """Raise the marginals of ``z`` to exactly ``rho`` without lowering any hitting probability.

    Elements are processed in ground-set order.  For an element with deficit
    ``d``, mass is moved from the heaviest support set not containing it
    (lexicographic order on ties) to that set plus the element, until the
    deficit is gone.  Only supersets are created, so every hitting event is
    preserved.
    """
    ground = z.ground
    weights = dict(z.weights)
    current = z.marginals()
    for e in ground:
        deficit = rho[e] - current[e]
        if deficit < 0:
            raise DeficitNegative(f"marginal of {e!r} is {current[e]} > {rho[e]}")
        while deficit > 0:
            donor = min(
                (s for s, x in weights.items() if e not in s and x > 0),
                key=lambda s: (-weights[s], ground.key(s)),
                default=None,
            )
            if donor is None:
                raise DeficitNegative(f"no mass left to lift element {e!r}")
            moved = min(deficit, weights[donor])
            weights[donor] -= moved
            if weights[donor] == 0:
                del weights[donor]
            grown = donor | {e}
            weights[grown] = weights.get(grown, ZERO) + moved
            deficit -= moved
    return Decomposition(ground, weights)
