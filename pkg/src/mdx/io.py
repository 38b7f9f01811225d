"""JSON instance and result files (``schema_version`` 1).

Numbers are exact: strings like ``"3/10"`` or ``"0.3"`` and JSON numbers are
all parsed as fractions; output always uses ``"p/q"`` strings.
"""
from __future__ import annotations

import json
import re
from collections.abc import Mapping
from dataclasses import dataclass, field
from fractions import Fraction

from .apps.committee import CommitteeInstance
from .apps.coverage import CoverageInstance
from .apps.security import SecurityGameInstance
from .asc_abstract import DigraphPathSystem
from .asc_lattice import RootedCutLattice, lattice_instance
from .asc_supermodular import SupermodularOracle, supermodular_instance
from .balanced import Hypergraph
from .core.types import (
    AffineRequirements,
    Decomposition,
    ExplicitFamily,
    GroundSet,
    Instance,
    Marginals,
    TableRequirements,
    as_fraction,
    fraction_str,
)
from .errors import ValidationError

SCHEMA_VERSION = 1
FAMILY_KINDS = (
    "explicit",
    "digraph",
    "supermodular_table",
    "rooted_cuts",
    "smuggling_tree",
    "coverage",
    "committee",
)


class InputError(ValidationError):
    """Malformed input; ``path`` locates the offending JSON value."""

    def __init__(self, message, path="$"):
        super().__init__(f"{path}: {message}")
        self.path = path


def parse_json(text: str, source: str = "<input>"):
    try:
        return json.loads(text, parse_float=Fraction)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}", source) from exc


def locate(text: str, path: str) -> int | None:
    """Best-effort source line of a ``$.a.b[2].c`` path: follow its keys through the text."""
    if not path.startswith("$"):
        return None
    pos = 0
    found = None
    for key in re.findall(r"\.([^.\[]+)", path):
        at = text.find(json.dumps(key), pos)
        if at < 0:
            break
        pos = found = at
    return None if found is None else text.count("\n", 0, found) + 1


def read_text(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"cannot read file: {exc.strerror}", path) from exc


def read_json(path: str):
    return parse_json(read_text(path), path)


def _get(doc, key, path, kind=None, default=...):
    if not isinstance(doc, dict):
        raise InputError("expected an object", path)
    if key not in doc:
        if default is not ...:
            return default
        raise InputError(f"missing key {key!r}", path)
    value = doc[key]
    if kind is not None and not isinstance(value, kind):
        names = kind.__name__ if isinstance(kind, type) else "/".join(k.__name__ for k in kind)
        raise InputError(f"expected {names}", f"{path}.{key}")
    return value


def _num(value, path) -> Fraction:
    if isinstance(value, bool) or not isinstance(value, (str, int, Fraction)):
        raise InputError("expected a number or a 'p/q' string", path)
    try:
        return as_fraction(value)
    except ValidationError as exc:
        raise InputError(str(exc), path) from None


def _num_map(doc, path, keys=None) -> dict:
    if not isinstance(doc, dict):
        raise InputError("expected an object of numbers", path)
    out = {}
    for k, v in doc.items():
        if keys is not None and k not in keys:
            raise InputError(f"unknown identifier {k!r}", path)
        out[k] = _num(v, f"{path}.{k}")
    return out


def _str_list(doc, path) -> list[str]:
    if not isinstance(doc, list) or not all(isinstance(x, str) for x in doc):
        raise InputError("expected a list of strings", path)
    return list(doc)


def _subset(ground: GroundSet, doc, path) -> frozenset:
    items = _str_list(doc, path)
    bad = [x for x in items if x not in ground]
    if bad:
        raise InputError(f"unknown elements {bad}", path)
    return frozenset(items)


def _pairs(doc, path, nodes=None) -> dict[str, tuple[str, str]]:
    if not isinstance(doc, dict):
        raise InputError("expected an object mapping ids to [u, v]", path)
    out = {}
    for k, uv in doc.items():
        if not (isinstance(uv, list) and len(uv) == 2 and all(isinstance(x, str) for x in uv)):
            raise InputError("expected a pair of node names", f"{path}.{k}")
        if nodes is not None and not set(uv) <= set(nodes):
            raise InputError(f"unknown node in {uv}", f"{path}.{k}")
        out[k] = (uv[0], uv[1])
    return out


def _table(ground: GroundSet, doc, path) -> tuple[dict, Fraction | None]:
    entries = _get(doc, "entries", path, list)
    table = {}
    for i, entry in enumerate(entries):
        p = f"{path}.entries[{i}]"
        S = _subset(ground, _get(entry, "set", p), f"{p}.set")
        v = _num(_get(entry, "value", p), f"{p}.value")
        if v > 1:
            raise InputError(f"requirement {fraction_str(v)} exceeds 1", f"{p}.value")
        table[S] = v
    default = doc.get("default")
    default = None if default is None else _num(default, f"{path}.default")
    if default is not None and default > 1:
        raise InputError("default requirement exceeds 1", f"{path}.default")
    return table, default


@dataclass
class Problem:
    """A parsed instance file."""

    kind: str
    ground: GroundSet
    instance: Instance | None = None
    rho: Marginals | None = None
    model: object = None
    costs: dict = field(default_factory=dict)
    doc: dict = field(default_factory=dict)


def load_problem(doc, cap: int | None = None) -> Problem:
    """Validate an instance document and build the matching objects."""
    version = _get(doc, "schema_version", "$", int, default=SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise InputError(f"unsupported schema_version {version}", "$.schema_version")
    fam = _get(doc, "family", "$", dict)
    kind = _get(fam, "kind", "$.family", str)
    if kind not in FAMILY_KINDS:
        raise InputError(f"unknown family kind {kind!r}", "$.family.kind")
    if kind == "coverage":
        return _load_coverage(doc, fam)
    if kind == "committee" and "votes" in fam:
        ground = GroundSet(_get(fam, "votes", "$.family", dict))
    else:
        try:
            ground = GroundSet(_str_list(_get(doc, "ground_set", "$"), "$.ground_set"))
        except ValidationError as exc:
            if isinstance(exc, InputError):
                raise
            raise InputError(str(exc), "$.ground_set") from None
    req = _get(doc, "requirements", "$", dict, default={"kind": "table", "entries": []})
    rkind = _get(req, "kind", "$.requirements", str)
    rho = None
    if "marginals" in doc:
        values = _num_map(doc["marginals"], "$.marginals", ground.index)
        try:
            rho = Marginals(ground, values)
        except ValidationError as exc:
            raise InputError(str(exc), "$.marginals") from None
    costs = _num_map(doc.get("costs", {}), "$.costs", ground.index)
    p = Problem(kind, ground, rho=rho, costs=costs, doc=doc)
    try:
        builder = {
            "explicit": _load_explicit,
            "digraph": _load_digraph,
            "supermodular_table": _load_supermodular,
            "rooted_cuts": _load_rooted,
            "smuggling_tree": _load_smuggling,
            "committee": _load_committee,
        }[kind]
        builder(p, fam, req, rkind, cap)
    except InputError:
        raise
    except ValidationError as exc:
        raise InputError(str(exc), "$.family") from None
    return p


def _requirements(ground, req, rkind):
    if rkind == "table":
        table, default = _table(ground, req, "$.requirements")
        return TableRequirements(table, default)
    if rkind == "affine":
        mu = _num_map(_get(req, "mu", "$.requirements"), "$.requirements.mu", ground.index)
        return AffineRequirements(mu)
    raise InputError(f"requirements kind {rkind!r} does not apply here", "$.requirements.kind")


def _load_explicit(p, fam, req, rkind, cap):
    members = _get(fam, "members", "$.family", list)
    sets = [_subset(p.ground, m, f"$.family.members[{i}]") for i, m in enumerate(members)]
    family = ExplicitFamily(p.ground, sets)
    p.instance = Instance(p.ground, family, _requirements(p.ground, req, rkind))
    if rkind == "table" and p.instance.requirements.default is None:
        for P in family.members():
            if P not in p.instance.requirements.table:
                raise InputError(f"no requirement for member {p.ground.ordered(P)}", "$.requirements")
    p.instance.validate()
    p.model = Hypergraph(p.ground, [m for m in family.members() if m])


def _load_digraph(p, fam, req, rkind, cap):
    arcs = _pairs(_get(fam, "arcs", "$.family"), "$.family.arcs")
    if set(arcs) != set(p.ground):
        raise InputError("arcs must be exactly the ground set", "$.family.arcs")
    source = _get(fam, "source", "$.family", str)
    sink = _get(fam, "sink", "$.family", str)
    kwargs = {} if cap is None else {"cap": cap}
    system = DigraphPathSystem(arcs, source, sink, ground=p.ground, **kwargs)
    p.model = system
    requirements = _requirements(p.ground, req, rkind)
    p.instance = Instance(p.ground, system, requirements)
    if rkind == "table" and requirements.default is None:
        for P in system.members():
            if P not in requirements.table:
                raise InputError(f"no requirement for path {system.order(P)}", "$.requirements")
    p.instance.validate()


def _load_supermodular(p, fam, req, rkind, cap):
    if rkind != "table":
        raise InputError("supermodular_table needs table requirements", "$.requirements.kind")
    table, default = _table(p.ground, req, "$.requirements")
    if default is None:
        default = 0
    kwargs = {} if cap is None else {"cap": cap, "engine_cap": cap}
    oracle = SupermodularOracle(p.ground, table, default=default, **kwargs)
    p.model = oracle
    p.instance = supermodular_instance(oracle)
    if p.instance.pi(frozenset()) > 0:
        raise InputError("the empty set has positive requirement", "$.requirements")


def _derived(req):
    if _get(req, "kind", "$.requirements", str) != "derived":
        raise InputError("this family needs derived requirements", "$.requirements.kind")
    beta = _num(_get(req, "beta", "$.requirements", default=1), "$.requirements.beta")
    if beta <= 0:
        raise InputError("beta must be positive", "$.requirements.beta")
    return beta


def _load_rooted(p, fam, req, rkind, cap):
    nodes = _str_list(_get(fam, "nodes", "$.family"), "$.family.nodes")
    edges = _pairs(_get(fam, "edges", "$.family"), "$.family.edges", nodes)
    if set(edges) != set(p.ground):
        raise InputError("edges must be exactly the ground set", "$.family.edges")
    root = _get(fam, "root", "$.family", str)
    beta = _derived(req)
    alpha = _num_map(_get(req, "alpha", "$.requirements", default={}), "$.requirements.alpha", set(nodes))
    if any(a < 0 for a in alpha.values()):
        raise InputError("node rewards must be nonnegative", "$.requirements.alpha")
    lat = RootedCutLattice(nodes, edges, root, alpha=alpha, beta=beta, ground=p.ground)
    if lat.pi(lat.top()) > 1:
        raise InputError("derived requirements exceed 1", "$.requirements")
    p.model = lat
    p.instance = lattice_instance(lat)


def _load_smuggling(p, fam, req, rkind, cap):
    nodes = _str_list(_get(fam, "nodes", "$.family"), "$.family.nodes")
    edges = _pairs(_get(fam, "edges", "$.family"), "$.family.edges", nodes)
    if set(edges) != set(p.ground):
        raise InputError("tree edges must be exactly the ground set", "$.family.edges")
    beta = _derived(req)
    rewards = {}
    for i, entry in enumerate(_get(req, "rewards", "$.requirements", list, default=[])):
        path = f"$.requirements.rewards[{i}]"
        pair = _str_list(_get(entry, "pair", path), f"{path}.pair")
        if len(pair) != 2 or not set(pair) <= set(nodes):
            raise InputError("expected two tree nodes", f"{path}.pair")
        rewards[tuple(pair)] = _num(_get(entry, "value", path), f"{path}.value")
    game = SecurityGameInstance.smuggling(nodes, edges, rewards, beta, p.costs)
    if cap is not None:
        game.supermodular.cap = game.supermodular.engine_cap = cap
    p.model = game
    p.instance = game.instance()


def _load_coverage(doc, fam) -> Problem:
    universe = _str_list(_get(fam, "universe", "$.family"), "$.family.universe")
    covers = _get(fam, "covers", "$.family", dict)
    cov = {}
    for e, us in covers.items():
        cov[e] = _str_list(us, f"$.family.covers.{e}")
    scenarios = []
    for i, sc in enumerate(_get(fam, "scenarios", "$.family", list)):
        path = f"$.family.scenarios[{i}]"
        r = _num_map(_get(sc, "rewards", path, default={}), f"{path}.rewards", set(universe))
        c = _num_map(_get(sc, "costs", path, default={}), f"{path}.costs", set(cov))
        scenarios.append((r, c))
    try:
        inst = CoverageInstance(universe, cov, scenarios)
    except ValidationError as exc:
        raise InputError(str(exc), "$.family") from None
    return Problem("coverage", inst.ground, model=inst, doc=doc)


def _load_committee(p, fam, req, rkind, cap):
    k = _get(fam, "k", "$.family", int)
    groups = [
        _subset(p.ground, g, f"$.family.groups[{i}]")
        for i, g in enumerate(_get(fam, "groups", "$.family", list, default=[]))
    ]
    if rkind != "table":
        raise InputError("committee groups need table requirements", "$.requirements.kind")
    table, default = _table(p.ground, req, "$.requirements")
    reqs = {g: table.get(g, default if default is not None else 0) for g in groups}
    if "votes" in fam:
        votes = fam["votes"]
        for e, v in votes.items():
            if not isinstance(v, int) or isinstance(v, bool):
                raise InputError("vote counts must be integers", f"$.family.votes.{e}")
        model = CommitteeInstance.from_votes(votes, k, groups, reqs)
    else:
        if p.rho is None:
            raise InputError("committee instances need marginals or votes", "$")
        model = CommitteeInstance(p.ground, p.rho, k, groups, reqs)
    p.rho = model.rho
    p.model = model
    p.instance = Instance(p.ground, ExplicitFamily(p.ground, groups), model.table())


def subset_json(ground: GroundSet, S) -> list[str]:
    return ground.ordered(S)


def decomposition_json(z: Decomposition) -> list[dict]:
    return [{"set": z.ground.ordered(S), "weight": fraction_str(w)} for S, w in z.items()]


def result_json(z: Decomposition, status="ok", diagnostics=None, **extra) -> dict:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "status": status,
        "decomposition": decomposition_json(z),
        "diagnostics": diagnostics or {},
    }
    doc.update(extra)
    return doc


def load_result(doc) -> Decomposition:
    """Parse a result document back into a Decomposition over the sets it mentions."""
    version = _get(doc, "schema_version", "$", int, default=SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise InputError(f"unsupported schema_version {version}", "$.schema_version")
    entries = _get(doc, "decomposition", "$", list)
    ground_list = doc.get("ground_set")
    pairs = []
    seen: dict[str, None] = {}
    for i, entry in enumerate(entries):
        path = f"$.decomposition[{i}]"
        S = _str_list(_get(entry, "set", path), f"{path}.set")
        w = _num(_get(entry, "weight", path), f"{path}.weight")
        if w < 0 or w > 1:
            raise InputError("weight outside [0, 1]", f"{path}.weight")
        for e in S:
            seen.setdefault(e, None)
        pairs.append((S, w))
    ground = GroundSet(_str_list(ground_list, "$.ground_set") if ground_list is not None else seen)
    try:
        z = Decomposition(ground, pairs)
    except ValidationError as exc:
        raise InputError(str(exc), "$.decomposition") from None
    if z.total() != 1:
        raise InputError(f"weights sum to {fraction_str(z.total())}, not 1", "$.decomposition")
    return z


def dumps(doc: Mapping) -> str:
    return json.dumps(doc, indent=2, default=_default) + "\n"


def _default(o):
    if isinstance(o, Fraction):
        return fraction_str(o)
    if isinstance(o, (set, frozenset)):
        return sorted(o)
    raise TypeError(f"cannot serialize {type(o).__name__}")
