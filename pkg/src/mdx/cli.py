"""Command line front end.

    mdx check|decompose|sample|app <security|coverage|committee>
        [--mode M] [--out F] [--n N] [--seed S] [--cap K] FILE

Exit codes: 0 ok, 2 input error, 3 infeasible, 4 oracle or scale failure,
5 application-specific failure.  ``MDX_CAP`` sets the enumeration cap when
``--cap`` is absent.
"""
from __future__ import annotations

import argparse
import json
import os
import random
import sys
from dataclasses import dataclass

from . import io
from .apps.committee import committee_round
from .apps.coverage import solve_robust_coverage
from .apps.security import SecurityGameInstance, solve_security_game
from .asc_abstract import AbstractAsc, DigraphPathSystem
from .asc_lattice import decompose_lattice
from .asc_supermodular import SupermodularAsc
from .balanced import Hypergraph, perfect_decompose
from .core.checks import Sampler, check_star, verify
from .core.engine import BruteForceAsc, run_engine
from .core.types import (
    ZERO,
    Decomposition,
    ExplicitFamily,
    Instance,
    TableRequirements,
    fraction_str,
)
from .errors import InfeasibleMarginals, MdxError, OracleFailure
from .exactlp import subset_feasible

SUBSET_LP_LIMIT = 8
MODES = ("auto", "supermodular", "abstract", "lattice", "balanced")
AUTO_MODE = {
    "explicit": "explicit",
    "digraph": "abstract",
    "supermodular_table": "supermodular",
    "smuggling_tree": "supermodular",
    "rooted_cuts": "lattice",
}
COMPATIBLE = {
    "supermodular": {"supermodular_table", "smuggling_tree"},
    "abstract": {"digraph"},
    "lattice": {"rooted_cuts"},
    "balanced": {"explicit"},
}
SAMPLER_PROTOCOL = (
    "random.Random(seed); per draw: pick a set S of z_hat by integer inverse-CDF "
    "over randrange(lcm of denominators), then tau = getrandbits(53) / 2**53 "
    "and add e_i iff tau + h lies in [alpha_(i-1), alpha_i) for an integer h >= 0"
)


class CliError(MdxError):
    exit_code = 2


@dataclass
class Outcome:
    decomposition: Decomposition
    iterations: int | None


def resolve_cap(flag: int | None) -> int | None:
    if flag is not None:
        return flag
    env = os.environ.get("MDX_CAP")
    if env is None or env == "":
        return None
    try:
        cap = int(env)
    except ValueError:
        raise CliError(f"MDX_CAP must be an integer, got {env!r}") from None
    if cap <= 0:
        raise CliError("MDX_CAP must be positive")
    return cap


def load(path: str, cap: int | None) -> io.Problem:
    text = io.read_text(path)
    doc = io.parse_json(text, path)
    try:
        return io.load_problem(doc, cap)
    except io.InputError as exc:
        line = io.locate(text, exc.path)
        where = f"{path}:{line}" if line is not None else path
        raise CliError(f"{where}: {exc}") from None


def member_label(problem: io.Problem, P: frozenset) -> list[str]:
    if isinstance(problem.model, DigraphPathSystem):
        return list(problem.model.order(P))
    return problem.ground.ordered(P)


def need_marginals(problem: io.Problem):
    if problem.rho is None:
        raise CliError("the instance has no marginals")
    return problem.rho


def check_feasible(problem: io.Problem, rho) -> None:
    worst = check_star(problem.instance, rho)
    if worst is not None:
        raise InfeasibleMarginals(
            f"infeasible: member {member_label(problem, worst.member)} "
            f"is short by {fraction_str(worst.gap)}",
            worst.member,
            worst.gap,
        )


def diagnostics(inst: Instance, rho, z: Decomposition, iterations) -> dict:
    """Verify z against the instance and summarize; raises if verification fails."""
    report = verify(inst, rho, z)
    if not report.ok:
        raise OracleFailure("internal error: the decomposition failed verification")
    worst = report.worst_violation
    return {
        "iterations": iterations,
        "support_size": len(z),
        "worst_slack": None if worst is None else fraction_str(-worst),
    }


def run_decompose(problem: io.Problem, mode: str, cap: int | None) -> Outcome:
    if problem.instance is None or problem.kind not in AUTO_MODE:
        raise CliError(f"family kind {problem.kind!r} is solved with 'mdx app'")
    if mode == "auto":
        mode = AUTO_MODE[problem.kind]
    elif problem.kind not in COMPATIBLE[mode]:
        raise CliError(f"mode {mode!r} does not apply to family kind {problem.kind!r}")
    rho = need_marginals(problem)
    check_feasible(problem, rho)
    inst = problem.instance
    if mode == "explicit":
        oracle = BruteForceAsc(inst) if cap is None else BruteForceAsc(inst, cap)
        try:
            run = run_engine(inst, rho, oracle)
        except OracleFailure:
            explain_stuck(problem, rho)
            raise
        return Outcome(run.decomposition, run.iterations)
    if mode == "abstract":
        run = run_engine(inst, rho, AbstractAsc(inst))
        return Outcome(run.decomposition, run.iterations)
    if mode == "supermodular":
        model = problem.model
        oracle = model.supermodular if isinstance(model, SecurityGameInstance) else model
        run = run_engine(inst, rho, SupermodularAsc(oracle))
        return Outcome(run.decomposition, run.iterations)
    if mode == "lattice":
        runs = []
        z = decompose_lattice(problem.model, rho, runs=runs)
        return Outcome(z, sum(r.iterations for r in runs))
    kwargs = {} if cap is None else {"cap": cap}
    return Outcome(perfect_decompose(problem.model, rho, **kwargs), None)


def explain_stuck(problem: io.Problem, rho) -> None:
    """After the ASC search stalls, decide small cases with the exponential LP."""
    ground = list(problem.ground)
    if len(ground) > SUBSET_LP_LIMIT:
        return
    rows = [(P, problem.instance.pi(P)) for P in problem.instance.members()]
    if not subset_feasible(ground, rows, rho).optimal:
        raise InfeasibleMarginals(
            "infeasible: the covering condition holds but no feasible decomposition exists"
        )


def cmd_check(args) -> int:
    problem = load(args.file, resolve_cap(args.cap))
    if problem.instance is None:
        raise CliError(f"family kind {problem.kind!r} has no marginals to check")
    rho = need_marginals(problem)
    check_feasible(problem, rho)
    print("feasible")
    return 0


def cmd_decompose(args) -> int:
    cap = resolve_cap(args.cap)
    problem = load(args.file, cap)
    out = run_decompose(problem, args.mode, cap)
    diag = diagnostics(problem.instance, problem.rho, out.decomposition, out.iterations)
    emit(args.out, io.result_json(out.decomposition, diagnostics=diag, ground_set=list(problem.ground)))
    return 0


def cmd_sample(args) -> int:
    text = io.read_text(args.file)
    doc = io.parse_json(text, args.file)
    try:
        z = io.load_result(doc)
    except io.InputError as exc:
        line = io.locate(text, exc.path)
        where = f"{args.file}:{line}" if line is not None else args.file
        raise CliError(f"{where}: {exc}") from None
    if args.n < 0:
        raise CliError("--n must be nonnegative")
    lines = []
    if args.n:
        rng = random.Random(args.seed)
        sampler = Sampler(z)
        lines = [json.dumps(z.ground.ordered(sampler.draw(rng))) for _ in range(args.n)]
    write_text(args.out, "".join(line + "\n" for line in lines))
    return 0


def app_security(problem: io.Problem) -> dict:
    model = problem.model
    if problem.kind == "smuggling_tree":
        game = model
    elif problem.kind == "rooted_cuts":
        game = SecurityGameInstance("lattice", problem.ground, problem.costs, lattice=model)
    elif problem.kind == "supermodular_table":
        game = SecurityGameInstance.from_oracle(model, problem.costs)
    else:
        raise CliError(f"security needs a smuggling_tree, rooted_cuts or supermodular_table family, not {problem.kind!r}")
    res = solve_security_game(game)
    diag = diagnostics(game.instance(), res.rho, res.decomposition, None)
    return io.result_json(
        res.decomposition,
        diagnostics=diag,
        ground_set=list(problem.ground),
        app={
            "kind": "security",
            "marginals": {e: fraction_str(res.rho[e]) for e in problem.ground},
            "cost": fraction_str(res.cost),
            "lp_value": fraction_str(res.lp_value),
        },
    )


def app_coverage(problem: io.Problem) -> dict:
    if problem.kind != "coverage":
        raise CliError(f"coverage needs a coverage family, not {problem.kind!r}")
    model = problem.model
    res = solve_robust_coverage(model)
    inst = Instance(model.ground, ExplicitFamily(model.ground, res.pi), TableRequirements(res.pi))
    diag = diagnostics(inst, res.rho, res.decomposition, None)
    return io.result_json(
        res.decomposition,
        diagnostics=diag,
        ground_set=list(model.ground),
        app={
            "kind": "coverage",
            "t": fraction_str(res.t),
            "worst_expected_profit": fraction_str(res.worst),
            "marginals": {e: fraction_str(res.rho[e]) for e in model.ground},
            "targets": [{"set": model.ground.ordered(P), "value": fraction_str(v)} for P, v in res.pi.items()],
        },
    )


def app_committee(problem: io.Problem, n: int, seed: int) -> dict:
    if problem.kind != "committee":
        raise CliError(f"committee needs a committee family, not {problem.kind!r}")
    model = problem.model
    rho = model.rho
    check_feasible(problem, rho)
    z = perfect_decompose(Hypergraph(model.ground, model.groups), rho)
    sampler = committee_round(model, z)
    law = sampler.law()
    if any(len(S) != model.k for S in law.weights):
        raise OracleFailure("internal error: a committee has the wrong size")
    scaled = TableRequirements({P: (1 - sampler.eps) * model.pi(P) for P in model.groups})
    inst = Instance(model.ground, ExplicitFamily(model.ground, model.groups), scaled)
    diag = diagnostics(inst, rho, law, None)
    ground = model.ground
    sampler_doc = {
        "protocol": SAMPLER_PROTOCOL,
        "seed": seed,
        "eps": fraction_str(sampler.eps),
        "z_hat": io.decomposition_json(sampler.z_hat),
        "padding": [
            {"set": ground.ordered(S), "element": e, "flow": fraction_str(f)}
            for (S, e), f in sorted(sampler.flow.items(), key=lambda kv: (ground.key(kv[0][0]), ground.index[kv[0][1]]))
            if f != ZERO
        ],
    }
    if n:
        sampler_doc["draws"] = [ground.ordered(S) for S in sampler.sample(n, seed)]
    return io.result_json(
        law,
        diagnostics=diag,
        ground_set=list(ground),
        app={"kind": "committee", "k": model.k, "sampler": sampler_doc},
    )


def cmd_app(args) -> int:
    cap = resolve_cap(args.cap)
    problem = load(args.file, cap)
    if args.sub == "security":
        doc = app_security(problem)
    elif args.sub == "coverage":
        doc = app_coverage(problem)
    else:
        if args.n < 0:
            raise CliError("--n must be nonnegative")
        doc = app_committee(problem, args.n, args.seed)
    emit(args.out, doc)
    return 0


def emit(out: str | None, doc: dict) -> None:
    write_text(out, io.dumps(doc))


def write_text(out: str | None, text: str) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
        return
    try:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise CliError(f"cannot write {out}: {exc.strerror}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--cap", type=int, help="enumeration cap (overrides MDX_CAP)")
    parser = argparse.ArgumentParser(prog="mdx", description="Exact feasible decompositions of marginals.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="test the covering condition")
    p.add_argument("file")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("decompose", parents=[common], help="compute a verified decomposition")
    p.add_argument("--mode", choices=MODES, default="auto")
    p.add_argument("file")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("sample", parents=[common], help="draw sets from a result file")
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("file")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("app", parents=[common], help="application solvers")
    p.add_argument("sub", choices=("security", "coverage", "committee"))
    p.add_argument("--n", type=int, default=0, help="committee draws to include")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("file")
    p.set_defaults(func=cmd_app)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        return args.func(args)
    except MdxError as exc:
        if isinstance(exc, InfeasibleMarginals) and args.command == "check":
            print(exc)
        else:
            print(f"mdx: {exc}", file=sys.stderr)
        return exc.exit_code
    except RecursionError:
        print("mdx: instance too deep for the enumeration", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
