"""Exact rational linear programming and transportation feasibility.

The simplex is a dense two-phase tableau method with Bland's rule.  It is
meant for desk-scale problems (a few hundred variables) where exactness
matters more than speed.
"""
from __future__ import annotations

from collections import deque
from collections.abc import Hashable, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import BalanceMismatch, DimensionMismatch, ScaleExceeded, ValidationError

try:  # exact rationals in C; the tableau falls back to Fraction without it
    from gmpy2 import mpq as _Q
except ImportError:  # pragma: no cover
    _Q = Fraction

ZERO = Fraction(0)
ONE = Fraction(1)
_ZERO, _ONE = _Q(0), _Q(1)


def _frac(x) -> Fraction:
    return x if type(x) is Fraction else Fraction(int(x.numerator), int(x.denominator))

MAX_VARIABLES = 400
MAX_CONSTRAINTS = 4000

RELATIONS = ("<=", "=", ">=")


@dataclass
class LinearProgram:
    objective: Sequence
    constraints: list = field(default_factory=list)
    sense: str = "min"
    bounds: list | None = None

    def __post_init__(self):
        self.objective = [Fraction(c) for c in self.objective]
        n = len(self.objective)
        cons = []
        for row, rel, rhs in self.constraints:
            if len(row) != n:
                raise DimensionMismatch(f"constraint row has {len(row)} entries, expected {n}")
            if rel not in RELATIONS:
                raise ValidationError(f"unknown relation {rel!r}")
            cons.append(([Fraction(a) for a in row], rel, Fraction(rhs)))
        self.constraints = cons
        if self.bounds is None:
            self.bounds = [(ZERO, None)] * n
        if len(self.bounds) != n:
            raise DimensionMismatch("one bound pair per variable is required")
        bounds = []
        for lo, hi in self.bounds:
            lo = None if lo is None else Fraction(lo)
            hi = None if hi is None else Fraction(hi)
            if lo is not None and hi is not None and lo > hi:
                raise ValidationError(f"empty bound interval [{lo}, {hi}]")
            bounds.append((lo, hi))
        self.bounds = bounds
        if self.sense not in ("min", "max"):
            raise ValidationError(f"sense must be 'min' or 'max', not {self.sense!r}")

    @property
    def n(self) -> int:
        return len(self.objective)

    def add(self, row, rel, rhs) -> None:
        if len(row) != self.n:
            raise DimensionMismatch(f"constraint row has {len(row)} entries, expected {self.n}")
        if rel not in RELATIONS:
            raise ValidationError(f"unknown relation {rel!r}")
        self.constraints.append(([Fraction(a) for a in row], rel, Fraction(rhs)))

    def residuals(self, x) -> list[Fraction]:
        return [sum((a * v for a, v in zip(row, x)), ZERO) - rhs for row, _, rhs in self.constraints]

    def is_feasible(self, x) -> bool:
        for (row, rel, rhs), r in zip(self.constraints, self.residuals(x)):
            if (rel == "<=" and r > 0) or (rel == ">=" and r < 0) or (rel == "=" and r != 0):
                return False
        for (lo, hi), v in zip(self.bounds, x):
            if (lo is not None and v < lo) or (hi is not None and v > hi):
                return False
        return True


@dataclass
class LpSolution:
    status: str
    point: list | None = None
    value: Fraction | None = None
    basis: list = field(default_factory=list)
    duals: list | None = None
    farkas: list | None = None

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


class _Tableau:
    def __init__(self, rows, rhs, n_struct):
        self.m = len(rows)
        self.n_struct = n_struct
        # structural columns followed by one artificial per row
        self.T = []
        for i, (row, b) in enumerate(zip(rows, rhs)):
            art = [_ZERO] * self.m
            art[i] = _ONE
            self.T.append(list(row) + art + [b])
        self.width = n_struct + self.m
        self.basic = [n_struct + i for i in range(self.m)]
        self.z = None

    def set_cost(self, cost):
        z = list(cost) + [_ZERO]
        for i, b in enumerate(self.basic):
            cb = cost[b]
            if cb:
                row = self.T[i]
                for j in range(self.width + 1):
                    if row[j]:
                        z[j] -= cb * row[j]
        self.z = z

    def pivot(self, r, c):
        T = self.T
        prow = T[r]
        piv = prow[c]
        if piv != 1:
            for j in range(self.width + 1):
                if prow[j]:
                    prow[j] /= piv
        nz = [j for j in range(self.width + 1) if prow[j]]
        for i in range(self.m):
            if i == r:
                continue
            row = T[i]
            f = row[c]
            if f:
                for j in nz:
                    row[j] -= f * prow[j]
        f = self.z[c]
        if f:
            for j in nz:
                self.z[j] -= f * prow[j]
        self.basic[r] = c

    def run(self, allowed, max_iter=100000):
        for _ in range(max_iter):
            enter = next((j for j in allowed if self.z[j] < 0), None)
            if enter is None:
                return "optimal"
            best = None
            for i in range(self.m):
                a = self.T[i][enter]
                if a > 0:
                    ratio = self.T[i][-1] / a
                    key = (ratio, self.basic[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return "unbounded"
            self.pivot(best[1], enter)
        raise RuntimeError("simplex iteration limit reached")


def solve(lp: LinearProgram, max_variables: int = MAX_VARIABLES, max_constraints: int = MAX_CONSTRAINTS) -> LpSolution:
    """Solve ``lp`` exactly; the returned point is a basic solution.

    ``duals`` has one entry per constraint of the LP (in the LP's own sense):
    for a minimization the dual of a ``>=`` row is nonnegative and of a ``<=``
    row nonpositive, and objective value equals the dual objective when all
    variables have the default bounds ``[0, inf)``.  ``farkas`` is returned
    for infeasible problems with default bounds: multipliers ``u`` with
    ``u.b > 0``, ``u^T A <= 0`` and sign conventions as for a minimization.
    """
    n = lp.n
    if n > max_variables or len(lp.constraints) > max_constraints:
        raise ScaleExceeded(
            f"LP with {n} variables / {len(lp.constraints)} constraints exceeds "
            f"{max_variables}/{max_constraints}"
        )
    # variable substitution x_j = offset_j + sum coef * x'_col
    subst = []
    ncols = 0
    extra_rows = []
    for lo, hi in lp.bounds:
        if lo is not None:
            subst.append((_Q(lo), [(ncols, 1)]))
            if hi is not None:
                extra_rows.append((ncols, _Q(hi - lo)))
            ncols += 1
        elif hi is not None:
            subst.append((_Q(hi), [(ncols, -1)]))
            ncols += 1
        else:
            subst.append((_ZERO, [(ncols, 1), (ncols + 1, -1)]))
            ncols += 2
    rows, rels, rhs = [], [], []
    for row, rel, b in lp.constraints:
        new = [_ZERO] * ncols
        b = _Q(b)
        for a, (off, cols) in zip(row, subst):
            if a:
                a = _Q(a)
                if off:
                    b -= a * off
                for c, coef in cols:
                    new[c] += a if coef == 1 else -a
        rows.append(new)
        rels.append(rel)
        rhs.append(b)
    for c, cap in extra_rows:
        new = [_ZERO] * ncols
        new[c] = _ONE
        rows.append(new)
        rels.append("<=")
        rhs.append(cap)
    n_slack = sum(1 for r in rels if r != "=")
    width = ncols + n_slack
    std_rows, signs = [], []
    k = ncols
    for row, rel, b in zip(rows, rels, rhs):
        full = row + [_ZERO] * n_slack
        if rel == "<=":
            full[k] = _ONE
            k += 1
        elif rel == ">=":
            full[k] = -_ONE
            k += 1
        sign = 1
        if b < 0:
            full = [-a for a in full]
            b = -b
            sign = -1
        full.append(b)
        std_rows.append(full)
        signs.append(sign)
    tab = _Tableau([r[:-1] for r in std_rows], [r[-1] for r in std_rows], width)
    m = tab.m
    n_user = len(lp.constraints)

    phase1 = [_ZERO] * width + [_ONE] * m
    tab.set_cost(phase1)
    tab.run(range(width + m))
    infeas = -tab.z[-1]
    if infeas > 0:
        y = [ONE - _frac(tab.z[width + i]) for i in range(m)]
        farkas = [signs[i] * y[i] for i in range(n_user)]
        return LpSolution("infeasible", farkas=farkas)
    # drive artificials out of the basis where possible
    for i in range(m):
        if tab.basic[i] >= width:
            col = next((j for j in range(width) if tab.T[i][j] != 0), None)
            if col is not None:
                tab.pivot(i, col)

    sgn = ONE if lp.sense == "min" else -ONE
    cost = [_ZERO] * width
    for c_j, (off, cols) in zip(lp.objective, subst):
        if c_j:
            for c, coef in cols:
                cost[c] += _Q(sgn * c_j * coef)
    tab.set_cost(cost + [_ZERO] * m)
    status = tab.run(range(width))
    if status == "unbounded":
        return LpSolution("unbounded")
    xs = [ZERO] * (width + m)
    for i, b in enumerate(tab.basic):
        xs[b] = _frac(tab.T[i][-1])
    point = []
    for off, cols in subst:
        point.append(_frac(off) + sum((coef * xs[c] for c, coef in cols), ZERO))
    value = sum((c * x for c, x in zip(lp.objective, point)), ZERO)
    y = [-_frac(tab.z[width + i]) for i in range(m)]
    duals = [sgn * signs[i] * y[i] for i in range(n_user)]
    return LpSolution("optimal", point=point, value=value, basis=list(tab.basic), duals=duals)


def active_set(lp: LinearProgram, x) -> tuple[list[int], list[int]]:
    """Indices of constraints holding with equality and of variables sitting at a bound."""
    res = lp.residuals(x)
    rows = [i for i, r in enumerate(res) if r == 0]
    bnds = [j for j, ((lo, hi), v) in enumerate(zip(lp.bounds, x)) if v == lo or v == hi]
    return rows, bnds


def rank(matrix) -> int:
    """Exact rank by fraction-preserving Gaussian elimination."""
    M = [[Fraction(a) for a in row] for row in matrix]
    if not M:
        return 0
    r = 0
    cols = len(M[0])
    for c in range(cols):
        p = next((i for i in range(r, len(M)) if M[i][c] != 0), None)
        if p is None:
            continue
        M[r], M[p] = M[p], M[r]
        for i in range(len(M)):
            if i != r and M[i][c] != 0:
                f = M[i][c] / M[r][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[r])]
        r += 1
        if r == len(M):
            break
    return r


def is_vertex(lp: LinearProgram, x) -> bool:
    rows, bnds = active_set(lp, x)
    n = lp.n
    mat = [lp.constraints[i][0] for i in rows]
    for j in bnds:
        unit = [ZERO] * n
        unit[j] = ONE
        mat.append(unit)
    return rank(mat) == n


def convex_combination(target: Sequence, vertices: Sequence[Sequence]) -> list[Fraction] | None:
    """Weights ``w >= 0`` with ``sum w = 1`` and ``sum w_i v_i = target``, or None.

    The solution is basic, so at most ``dim + 1`` weights are nonzero.
    """
    target = [Fraction(t) for t in target]
    d = len(target)
    for v in vertices:
        if len(v) != d:
            raise DimensionMismatch(f"vertex of dimension {len(v)} vs target dimension {d}")
    k = len(vertices)
    if k == 0:
        return None
    lp = LinearProgram([ZERO] * k)
    for i in range(d):
        lp.add([Fraction(v[i]) for v in vertices], "=", target[i])
    lp.add([ONE] * k, "=", ONE)
    sol = solve(lp)
    return sol.point if sol.optimal else None


@dataclass
class Transport:
    """Result of :func:`transport_feasible`: a flow, or a violated cut.

    For an infeasible instance ``cut_sinks`` (V) and ``cut_sources`` (W)
    satisfy  supply(W) + cap(sources outside W -> V) < demand(V).
    """

    flow: dict | None = None
    cut_sinks: frozenset | None = None
    cut_sources: frozenset | None = None

    @property
    def feasible(self) -> bool:
        return self.flow is not None


def transport_feasible(
    supplies: Mapping[Hashable, object],
    demands: Mapping[Hashable, object],
    arcs: Sequence[tuple[Hashable, Hashable]],
    caps: Mapping[tuple, object] | None = None,
) -> Transport:
    """Route all supply to the sinks along ``arcs`` within ``caps`` (Edmonds-Karp, exact)."""
    supplies = {s: Fraction(v) for s, v in supplies.items()}
    demands = {t: Fraction(v) for t, v in demands.items()}
    if sum(supplies.values(), ZERO) != sum(demands.values(), ZERO):
        raise BalanceMismatch("total supply differs from total demand")
    caps = {} if caps is None else {a: Fraction(c) for a, c in caps.items()}
    SRC, SNK = ("__source__",), ("__sink__",)
    nodes = [SRC] + [("s", s) for s in supplies] + [("t", t) for t in demands] + [SNK]
    adj = {v: [] for v in nodes}
    cap = {}

    def add_edge(u, v, c):
        if (u, v) not in cap:
            adj[u].append(v)
            adj[v].append(u)
            cap[(u, v)] = ZERO
            cap.setdefault((v, u), ZERO)
        cap[(u, v)] += c

    for s, v in supplies.items():
        add_edge(SRC, ("s", s), v)
    for t, v in demands.items():
        add_edge(("t", t), SNK, v)
    for s, t in arcs:
        if s not in supplies or t not in demands:
            raise ValidationError(f"arc {(s, t)!r} uses an unknown endpoint")
        c = caps.get((s, t))
        add_edge(("s", s), ("t", t), supplies[s] if c is None else c)
    flow = {k: ZERO for k in cap}
    while True:
        parent = {SRC: None}
        q = deque([SRC])
        while q and SNK not in parent:
            u = q.popleft()
            for v in adj[u]:
                if v not in parent and cap[(u, v)] - flow[(u, v)] > 0:
                    parent[v] = u
                    q.append(v)
        if SNK not in parent:
            break
        path = []
        v = SNK
        while parent[v] is not None:
            path.append((parent[v], v))
            v = parent[v]
        push = min(cap[e] - flow[e] for e in path)
        for u, v in path:
            flow[(u, v)] += push
            flow[(v, u)] -= push
    total = sum(demands.values(), ZERO)
    sent = sum((flow[(SRC, ("s", s))] for s in supplies), ZERO)
    if sent == total:
        out = {}
        for s, t in arcs:
            f = flow[(("s", s), ("t", t))]
            out[(s, t)] = f if f > 0 else ZERO
        return Transport(flow=out)
    reach = set(parent)
    V = frozenset(t for t in demands if ("t", t) not in reach)
    W = frozenset(s for s in supplies if ("s", s) not in reach)
    return Transport(cut_sinks=V, cut_sources=W)


def transport_lp(supplies, demands, arcs, caps=None) -> LinearProgram:
    """The transportation feasibility problem written as an LP (used for cross-checks)."""
    arcs = list(arcs)
    caps = caps or {}
    lp = LinearProgram([ZERO] * len(arcs), bounds=[
        (ZERO, Fraction(caps[a]) if a in caps else None) for a in arcs
    ])
    for s, v in supplies.items():
        lp.add([ONE if a[0] == s else ZERO for a in arcs], "=", v)
    for t, v in demands.items():
        lp.add([ONE if a[1] == t else ZERO for a in arcs], "=", v)
    return lp


def subset_lp(elements: Sequence, requirements: Sequence[tuple[frozenset, object]], rho: Mapping):
    """Feasibility LP with one variable per subset of ``elements``.

    Rows: normalization, exact marginals, and a hitting row per member.
    Returns the LP and the subset order of its variables.
    """
    elements = list(elements)
    n = len(elements)
    subsets = [frozenset(e for i, e in enumerate(elements) if mask >> i & 1) for mask in range(1 << n)]
    lp = LinearProgram([ZERO] * len(subsets))
    lp.add([ONE] * len(subsets), "=", ONE)
    for e in elements:
        lp.add([ONE if e in S else ZERO for S in subsets], "=", Fraction(rho[e]))
    for P, p in requirements:
        P = frozenset(P)
        lp.add([ONE if S & P else ZERO for S in subsets], ">=", Fraction(p))
    return lp, subsets


def subset_feasible(elements, requirements, rho, max_variables: int = 1 << 10) -> LpSolution:
    """Whether rho admits a feasible decomposition, by the exponential LP."""
    lp, _ = subset_lp(elements, requirements, rho)
    return solve(lp, max_variables=max_variables)
