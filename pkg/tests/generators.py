"""Seeded random instance builders shared by the test modules."""
from __future__ import annotations

import random
from fractions import Fraction
from itertools import combinations

from mdx.asc_abstract import DigraphPathSystem
from mdx.asc_lattice import RootedCutLattice
from mdx.asc_supermodular import SupermodularOracle
from mdx.core.types import CallbackRequirements, GroundSet, Instance


def frac(rng: random.Random, den: int = 10, lo: int = 0, hi: int | None = None) -> Fraction:
    return Fraction(rng.randint(lo, den if hi is None else hi), den)


def marginals(rng: random.Random, elements, den: int = 10) -> dict:
    return {e: frac(rng, den) for e in elements}


def names(n: int, prefix: str = "e") -> list[str]:
    return [f"{prefix}{i}" for i in range(n)]


def all_subsets(elements):
    elements = list(elements)
    for k in range(len(elements) + 1):
        for c in combinations(elements, k):
            yield frozenset(c)


def feasible_scale(rows, rho) -> Fraction:
    """Largest c <= 1 with c * pi_P <= rho(P) on every row."""
    c = Fraction(1)
    for P, p in rows:
        if p > 0:
            c = min(c, sum((rho[e] for e in P), Fraction(0)) / p)
    return c


def supermodular_table(rng: random.Random, ground: GroundSet, terms: int = 4) -> dict:
    """pi(S) = sum of alpha_T over T inside S minus a modular part, scaled to max 1.

    Sums of "T inside S" indicators are supermodular and a modular shift keeps
    that, so every table produced here is supermodular with pi(empty) = 0.
    """
    elements = list(ground)
    alpha = []
    for _ in range(terms):
        k = rng.randint(1, len(elements))
        alpha.append((frozenset(rng.sample(elements, k)), frac(rng, 6, 1)))
    mu = {e: frac(rng, 10, 0, 3) for e in elements}
    table = {}
    for S in all_subsets(elements):
        table[S] = sum((a for T, a in alpha if T <= S), Fraction(0)) - sum((mu[e] for e in S), Fraction(0))
    top = max(table.values())
    if top > 1:
        table = {S: v / top for S, v in table.items()}
    return table


def supermodular_case(rng: random.Random, n: int, feasible: bool = True):
    """(oracle, rho) with rho in the covering polytope when ``feasible``."""
    ground = GroundSet(names(n))
    table = supermodular_table(rng, ground)
    rho = marginals(rng, ground)
    if feasible:
        c = feasible_scale(table.items(), rho)
        table = {S: c * v for S, v in table.items()}
    return SupermodularOracle(ground, table), rho


def random_dag(rng: random.Random, max_arcs: int = 9, max_nodes: int = 6) -> dict:
    """Arcs of a DAG on nodes 0..k (s = 0, t = k) with at least one s-t path."""
    k = rng.randint(1, max_nodes - 1)
    spine = sorted(rng.sample(range(1, k), rng.randint(0, k - 1))) if k > 1 else []
    path = [0, *spine, k]
    pairs = list(zip(path, path[1:]))
    budget = rng.randint(len(pairs), max(len(pairs), max_arcs))
    while len(pairs) < budget:
        u = rng.randint(0, k - 1)
        v = rng.randint(u + 1, k)
        pairs.append((u, v))
    return {f"a{i}": (f"v{u}", f"v{v}") for i, (u, v) in enumerate(pairs)}, "v0", f"v{k}"


def affine_requirements(rng: random.Random, ground, const=Fraction(1)):
    """pi_P = const - mu(P), which satisfies the weak conservation law on DAGs."""
    mu = {e: frac(rng, 10, 0, 2) for e in ground}

    def pi(P, mu=mu, const=const):
        return const - sum((mu[e] for e in P), Fraction(0))

    return CallbackRequirements(pi), mu


def dag_case(rng: random.Random, max_arcs: int = 9, feasible: bool = True):
    arcs, s, t = random_dag(rng, max_arcs)
    system = DigraphPathSystem(arcs, s, t)
    req, _ = affine_requirements(rng, system.ground, frac(rng, 10, 5))
    rho = marginals(rng, system.ground)
    if feasible:
        c = feasible_scale([(P, req(P)) for P in system.members()], rho)
        base = req
        req = CallbackRequirements(lambda P, base=base, c=c: c * base(P))
    return Instance(system.ground, system, req), rho


def random_connected_graph(rng: random.Random, n_nodes: int, max_edges: int):
    nodes = names(n_nodes, "v")
    edges = {}
    for i in range(1, n_nodes):
        edges[f"f{len(edges)}"] = (nodes[rng.randrange(i)], nodes[i])
    while len(edges) < max_edges and rng.random() < 0.7:
        u, v = rng.sample(nodes, 2)
        edges[f"f{len(edges)}"] = (u, v)
    return nodes, edges


def rooted_cut_case(rng: random.Random, max_nodes: int = 6, max_edges: int = 7, feasible: bool = True):
    n = rng.randint(2, max_nodes)
    nodes, edges = random_connected_graph(rng, n, max(max_edges, n - 1))
    alpha = {v: frac(rng, 6) for v in nodes[1:]}
    total = sum(alpha.values(), Fraction(0))
    beta = max(Fraction(1), total)
    lat = RootedCutLattice(nodes, edges, nodes[0], alpha=alpha, beta=beta)
    rho = marginals(rng, lat.ground)
    if feasible:
        c = feasible_scale([(P, lat.pi(P)) for P in lat.members()], rho)
        if c < 1:
            lat = RootedCutLattice(nodes, edges, nodes[0], alpha=alpha, beta=beta / c if c else beta)
            if c == 0:
                rho = {e: Fraction(1) for e in lat.ground}
    return lat, rho


def random_hypergraph(rng: random.Random, max_elements: int = 5, max_members: int = 6):
    n = rng.randint(1, max_elements)
    elements = [str(i) for i in range(1, n + 1)]
    members = []
    for _ in range(rng.randint(1, max_members)):
        # pairs half of the time, so odd cycles are common enough to test
        size = min(2, n) if rng.random() < 0.5 else rng.randint(1, n)
        members.append(frozenset(rng.sample(elements, size)))
    return GroundSet(elements), members
