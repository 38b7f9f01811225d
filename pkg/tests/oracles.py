"""Independent reference computations used as test oracles.

Everything here works by exhaustive enumeration or by the exponential LP
over all subsets, and never calls the decomposition engine.
"""
from __future__ import annotations

from fractions import Fraction
from itertools import combinations

from mdx.exactlp import LinearProgram, solve, subset_lp

ZERO = Fraction(0)


def subset_sum(rho, P) -> Fraction:
    return sum((rho[e] for e in P), ZERO)


def max_gap(rows, rho):
    """Brute-force most violated covering row as (gap, member), ties to the first row."""
    best = None
    for P, p in rows:
        gap = p - subset_sum(rho, P)
        if best is None or gap > best[0]:
            best = (gap, P)
    return best


def in_polytope(elements, rows, rho) -> bool:
    """Membership of rho in the decomposable set by the exponential LP.

    A feasible answer is re-checked against the LP rows; an infeasible one
    against its Farkas certificate, so the LP solver is not trusted blindly.
    """
    lp, subsets = subset_lp(elements, rows, rho)
    sol = solve(lp, max_variables=1 << 10)
    if sol.optimal:
        assert lp.is_feasible(sol.point)
        return True
    assert sol.status == "infeasible"
    assert farkas_certifies(lp, sol.farkas)
    return False


def farkas_certifies(lp: LinearProgram, u) -> bool:
    """u with the LP's sign conventions proves that no nonnegative x satisfies the rows."""
    for (row, rel, _), ui in zip(lp.constraints, u):
        if rel == ">=" and ui < 0:
            return False
        if rel == "<=" and ui > 0:
            return False
    combo = [sum((ui * row[j] for (row, _, _), ui in zip(lp.constraints, u)), ZERO) for j in range(lp.n)]
    rhs = sum((ui * b for (_, _, b), ui in zip(lp.constraints, u)), ZERO)
    return all(c <= 0 for c in combo) and rhs > 0


def hitting(z: dict, P) -> Fraction:
    P = frozenset(P)
    return sum((w for S, w in z.items() if S & P), ZERO)


def marginals_of(z: dict, elements) -> dict:
    return {e: sum((w for S, w in z.items() if e in S), ZERO) for e in elements}


def check_decomposition(z: dict, elements, rows, rho) -> list[str]:
    """Every defect of z as a feasible decomposition, computed from scratch."""
    problems = []
    if sum(z.values(), ZERO) != 1:
        problems.append("weights do not sum to 1")
    if any(w < 0 for w in z.values()):
        problems.append("negative weight")
    marg = marginals_of(z, elements)
    for e in elements:
        if marg[e] != rho[e]:
            problems.append(f"marginal of {e} is {marg[e]}, expected {rho[e]}")
    for P, p in rows:
        if hitting(z, P) < p:
            problems.append(f"member {sorted(P)} hit with {hitting(z, P)} < {p}")
    return problems


def min_cost_cover(elements, rows, costs) -> Fraction:
    """min c.rho over rho in [0,1]^E with every covering row, as one LP."""
    elements = list(elements)
    lp = LinearProgram([costs[e] for e in elements], bounds=[(ZERO, Fraction(1))] * len(elements))
    for P, p in rows:
        lp.add([Fraction(e in P) for e in elements], ">=", p)
    sol = solve(lp, max_variables=64, max_constraints=10_000)
    assert sol.optimal
    return sol.value


def best_distribution_value(elements, payoffs) -> Fraction:
    """max over distributions z on all subsets of min over scenarios of E_z[payoff].

    ``payoffs`` is a list of functions subset -> value, one per scenario.
    """
    elements = list(elements)
    subsets = [frozenset(c) for k in range(len(elements) + 1) for c in combinations(elements, k)]
    # variables: t (free), then z_S
    n = 1 + len(subsets)
    lp = LinearProgram([Fraction(1)] + [ZERO] * len(subsets), sense="max",
                       bounds=[(None, None)] + [(ZERO, None)] * len(subsets))
    lp.add([ZERO] + [Fraction(1)] * len(subsets), "=", Fraction(1))
    for f in payoffs:
        lp.add([Fraction(1)] + [-f(S) for S in subsets], "<=", ZERO)
    sol = solve(lp, max_variables=max(n, 128))
    assert sol.optimal
    return sol.value


def odd_cycle_matrix(elements, members) -> bool:
    """Balancedness by definition: some odd square submatrix of the incidence
    matrix has exactly two ones in every row and column (a cycle)."""
    elements = list(elements)
    members = list(members)
    for k in range(3, min(len(elements), len(members)) + 1, 2):
        for rows in combinations(elements, k):
            for cols in combinations(members, k):
                if all(sum(r in c for c in cols) == 2 for r in rows) and all(
                    sum(r in c for r in rows) == 2 for c in cols
                ):
                    if _connected(rows, cols):
                        return True
    return False


def _connected(rows, cols) -> bool:
    # a 2-regular bipartite incidence splits into even cycles; an odd-size
    # square one with all degrees 2 is a single odd cycle only if connected
    seen = {rows[0]}
    stack = [rows[0]]
    while stack:
        r = stack.pop()
        for c in cols:
            if r in c:
                for r2 in rows:
                    if r2 in c and r2 not in seen:
                        seen.add(r2)
                        stack.append(r2)
    return len(seen) == len(rows)
