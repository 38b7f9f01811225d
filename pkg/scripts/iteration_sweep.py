"""Largest engine iteration count seen per ground-set size, against the bound n(n+1)/2.

Random supermodular tables and random rooted-cut lattices are decomposed at
feasible marginals; the table printed is one row per (family, n).
"""
from __future__ import annotations

import argparse
import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

from mdx.asc_lattice import RootedCutLattice, decompose_lattice
from mdx.asc_supermodular import SupermodularAsc, SupermodularOracle, supermodular_instance
from mdx.core import GroundSet, iteration_bound, run_engine, verify


@dataclass
class SweepConfig:
    sizes: list[int] = field(default_factory=lambda: [2, 3, 4, 5, 6])
    trials: int = 50
    seed: int = 0


def _scaled(rows, rho):
    # largest c <= 1 with c * pi_P <= rho(P) on every row
    c = Fraction(1)
    for P, p in rows:
        if p > 0:
            c = min(c, sum((rho[e] for e in P), Fraction(0)) / p)
    return c


def supermodular_trial(rng: random.Random, n: int) -> int:
    ground = GroundSet([f"e{i}" for i in range(n)])
    terms = [(frozenset(rng.sample(list(ground), rng.randint(1, n))), Fraction(rng.randint(1, 6), 6)) for _ in range(4)]
    subsets = [frozenset(c) for k in range(n + 1) for c in combinations(ground, k)]
    table = {S: sum((a for T, a in terms if T <= S), Fraction(0)) for S in subsets}
    top = max(table.values())
    rho = {e: Fraction(rng.randint(0, 10), 10) for e in ground}
    # feasible for the raw table, then divided down so every value is at most 1
    c = _scaled(table.items(), rho) / max(top, 1)
    oracle = SupermodularOracle(ground, {S: c * v for S, v in table.items()})
    inst = supermodular_instance(oracle)
    run = run_engine(inst, rho, SupermodularAsc(oracle))
    assert verify(inst, rho, run.decomposition).ok
    return run.iterations


def lattice_trial(rng: random.Random, n: int) -> int:
    # a random connected graph with n edges on about n/2 + 1 nodes
    k = max(2, n // 2 + 1)
    nodes = [f"v{i}" for i in range(k)]
    edges = {f"f{i - 1}": (nodes[rng.randrange(i)], nodes[i]) for i in range(1, k)}
    while len(edges) < n:
        u, v = rng.sample(nodes, 2)
        edges[f"f{len(edges)}"] = (u, v)
    alpha = {v: Fraction(rng.randint(0, 6), 6) for v in nodes[1:]}
    beta = max(Fraction(1), sum(alpha.values(), Fraction(0)))
    lat = RootedCutLattice(nodes, edges, nodes[0], alpha=alpha, beta=beta)
    rho = {e: Fraction(rng.randint(1, 10), 10) for e in lat.ground}
    c = _scaled([(P, lat.pi(P)) for P in lat.members()], rho)
    lat = RootedCutLattice(nodes, edges, nodes[0], alpha=alpha, beta=beta / c)
    runs = []
    decompose_lattice(lat, rho, runs=runs)
    return max((r.iterations for r in runs), default=0)


TRIALS = {"supermodular": supermodular_trial, "lattice": lattice_trial}


def sweep(cfg: SweepConfig) -> list[tuple[str, int, int, int]]:
    rng = random.Random(cfg.seed)
    rows = []
    for family, trial in TRIALS.items():
        for n in cfg.sizes:
            worst = max(trial(rng, n) for _ in range(cfg.trials))
            rows.append((family, n, worst, iteration_bound(n)))
    return rows


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=SweepConfig().sizes)
    parser.add_argument("--trials", type=int, default=SweepConfig.trials)
    parser.add_argument("--seed", type=int, default=SweepConfig.seed)
    args = parser.parse_args()
    cfg = SweepConfig(args.sizes, args.trials, args.seed)
    print(f"{'family':<14}{'n':>3}{'max iterations':>16}{'bound':>7}")
    for family, n, worst, bound in sweep(cfg):
        print(f"{family:<14}{n:>3}{worst:>16}{bound:>7}")


if __name__ == "__main__":
    main()
