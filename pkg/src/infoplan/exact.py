"""Exact information-orienteering on small instances.

The mixed-integer model uses binary edge variables ``q_ij`` on directed
edges, integer visiting orders ``u_i`` on areas (Miller-Tucker-Zemlin
subtour elimination) and an epigraph variable ``alpha`` bounded by the
linear matrix inequality ``Y(q) - alpha I >= 0``. :func:`solve_exact`
does not solve that model directly; it enumerates simple paths depth-first
with budget pruning and a monotonicity bound, which is exact and fast enough
while a flight can visit about a dozen areas.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .estimator import InformationObjective
from .exceptions import InstanceTooLarge, NoFeasiblePath
from .graph import MonitorGraph, Path, budget_limit, make_path
from .model import FieldModel

__all__ = [
    "LinearConstraint",
    "MisdpEncoding",
    "cheapest_single_visit",
    "max_visits",
    "shortest_interior_times",
    "solve_exact",
    "encode_path",
    "decode_assignment",
    "verify_assignment",
    "export_misdp",
    "parse_misdp",
]


@dataclass(frozen=True)
class LinearConstraint:
    name: str
    coeffs: dict
    sense: str  # "<=" or "="
    rhs: float

    def slack(self, values: dict) -> float:
        """``rhs - lhs``; nonnegative (or zero, for equalities) when satisfied."""
        return self.rhs - sum(c * values.get(v, 0.0) for v, c in self.coeffs.items())


@dataclass(frozen=True)
class MisdpEncoding:
    """Variables and linear constraints of the path model for one graph and budget.

    Only edge orientations the formulation can use get a ``q`` variable:
    ``0 -> a``, ``a -> N+1`` and both directions between adjacent areas.
    ``u_a`` ranges over ``[1, N]`` and the ordering constraint uses ``N`` as
    its big-M so that a flight over every area keeps a feasible ordering.
    """

    graph: MonitorGraph
    budget: float
    edges: tuple = field(init=False)

    def __post_init__(self):
        g = self.graph
        N, end = g.N, g.end
        edges = [(0, j) for j in range(1, N + 1)]
        for i in range(1, N + 1):
            edges.extend((i, j) for j in g.interior_neighbors(i))
        edges.extend((j, end) for j in range(1, N + 1))
        object.__setattr__(self, "edges", tuple(edges))
        object.__setattr__(self, "_index", {e: k for k, e in enumerate(edges)})

    @property
    def N(self) -> int:
        return self.graph.N

    @property
    def u_bounds(self) -> tuple:
        return (1, self.graph.N)

    @property
    def big_m(self) -> int:
        return self.graph.N

    def edge_index(self, e) -> int:
        return self._index[e]

    @staticmethod
    def q_name(e) -> str:
        return f"q_{e[0]}_{e[1]}"

    @staticmethod
    def u_name(v) -> str:
        return f"u_{v}"

    def variables(self) -> list:
        """``(name, kind, lb, ub)`` in model order: edges, then orders."""
        out = [(self.q_name(e), "binary", 0, 1) for e in self.edges]
        lo, hi = self.u_bounds
        out.extend((self.u_name(v), "integer", lo, hi) for v in range(1, self.N + 1))
        return out

    def constraints(self) -> list:
        g = self.graph
        N, end = g.N, g.end
        qn = self.q_name
        cons = [
            LinearConstraint("depot_out", {qn((0, j)): 1.0 for j in range(1, N + 1)}, "=", 1.0),
            LinearConstraint("depot_in", {qn((j, end)): 1.0 for j in range(1, N + 1)}, "=", 1.0),
        ]
        for p in range(1, N + 1):
            inflow = [(0, p)] + [(i, p) for i in g.interior_neighbors(p)]
            outflow = [(p, j) for j in g.interior_neighbors(p)] + [(p, end)]
            flow = {qn(e): 1.0 for e in inflow}
            for e in outflow:
                flow[qn(e)] = flow.get(qn(e), 0.0) - 1.0
            cons.append(LinearConstraint(f"flow_{p}", flow, "=", 0.0))
            cons.append(LinearConstraint(f"visit_{p}", {qn(e): 1.0 for e in inflow}, "<=", 1.0))
        cons.append(LinearConstraint("budget", {qn(e): g.t(*e) for e in self.edges}, "<=", float(self.budget)))
        M = self.big_m
        for i in range(1, N + 1):
            for j in g.interior_neighbors(i):
                cons.append(LinearConstraint(
                    f"order_{i}_{j}",
                    {self.u_name(i): 1.0, self.u_name(j): -1.0, qn((i, j)): float(M)},
                    "<=", float(M - 1)))
        return cons

    def gamma_matrix(self) -> np.ndarray:
        """``(N, n_edges)`` incidence with ``gamma = G @ q`` (edges entering each area)."""
        G = np.zeros((self.N, len(self.edges)))
        for k, (_, j) in enumerate(self.edges):
            if 1 <= j <= self.N:
                G[j - 1, k] = 1.0
        return G


def cheapest_single_visit(g: MonitorGraph):
    """``(cost, area_vertex)`` of the cheapest path ``[0, j, N+1]``."""
    costs = g.times[0, 1:g.N + 1] + g.times[1:g.N + 1, g.end]
    j = int(np.argmin(costs))
    return float(costs[j]), j + 1


def max_visits(g: MonitorGraph, budget: float) -> int:
    """Upper bound on the number of areas any feasible flight can visit."""
    inner = g.times[1:g.N + 1, 1:g.N + 1]
    finite = inner[np.isfinite(inner)]
    depot = g.times[0, 1:g.N + 1].min() + g.times[1:g.N + 1, g.end].min()
    limit = budget_limit(budget)
    if depot > limit:
        return 0
    if finite.size == 0:
        return 1
    step = finite.min()
    if step <= 0:
        return g.N
    return int(min(g.N, 1 + np.floor((limit - depot) / step)))


def shortest_interior_times(g: MonitorGraph) -> np.ndarray:
    """All-pairs shortest travel times between areas using area-to-area edges only."""
    D = np.array(g.times[1:g.N + 1, 1:g.N + 1], dtype=float)
    np.fill_diagonal(D, 0.0)
    for k in range(g.N):
        D = np.minimum(D, D[:, k:k + 1] + D[k:k + 1, :])
    return D


def solve_exact(
    g: MonitorGraph,
    model: FieldModel,
    P_prior,
    budget: float,
    max_areas: int = 40,
    max_visit_count: int = 12,
    prune: bool = True,
    objective: InformationObjective | None = None,
):
    """Optimal flight by depth-first enumeration with bounding.

    A partial path is abandoned when even visiting every area still
    reachable within the remaining budget cannot beat the incumbent; this is
    valid because adding visits never lowers ``lambda_min``. Ties go to the
    cheaper path, then to the lexicographically smaller sequence.

    Returns
    -------
    path : Path
    lambda_star : float
    """
    N = g.N
    if N != model.N:
        raise ValueError(f"graph has {N} areas but the model has {model.N}")
    if N > max_areas:
        raise InstanceTooLarge(f"{N} areas exceeds the exact-solver guard of {max_areas}")
    kmax = max_visits(g, budget)
    if kmax == 0:
        raise NoFeasiblePath("no single-area flight fits the budget")
    if kmax > max_visit_count:
        raise InstanceTooLarge(
            f"a flight may visit up to {kmax} areas, past the exact-solver guard of {max_visit_count}")
    obj = objective if objective is not None else InformationObjective(model, P_prior)
    limit = budget_limit(budget)
    end = g.end
    T = g.times
    end_t = [float(T[v, end]) if 1 <= v <= N else np.inf for v in range(N + 2)]
    dist = shortest_interior_times(g)
    nbrs = [g.interior_neighbors(v) for v in range(N + 2)]
    bit = [0] + [1 << (v - 1) for v in range(1, N + 1)] + [0]

    best = {"lam": -np.inf, "cost": np.inf, "seq": None}

    def consider(lam, cost, seq):
        if (lam > best["lam"]
                or (lam == best["lam"] and (cost < best["cost"]
                                            or (cost == best["cost"] and seq < best["seq"])))):
            best.update(lam=lam, cost=cost, seq=seq)

    def dfs(v, mask, cost, seq):
        consider(obj.of_mask(mask), cost + end_t[v], seq + (end,))
        if prune:
            reach = 0
            dv = dist[v - 1]
            for w in range(1, N + 1):
                if not mask & bit[w] and cost + dv[w - 1] + end_t[w] <= limit:
                    reach |= bit[w]
            if not reach:
                return
            lam_best = best["lam"]
            if obj.of_mask(mask | reach) < lam_best - 1e-9 * abs(lam_best):
                return
        for w in nbrs[v]:
            if not mask & bit[w]:
                c = cost + T[v, w]
                if c + end_t[w] <= limit:
                    dfs(w, mask | bit[w], c, seq + (w,))

    for j in range(1, N + 1):
        c = float(T[0, j])
        if c + end_t[j] <= limit:
            dfs(j, bit[j], c, (0, j))
    if best["seq"] is None:
        raise NoFeasiblePath("no single-area flight fits the budget")
    return make_path(best["seq"], g), float(best["lam"])


def encode_path(path: Path, g: MonitorGraph):
    """Integral ``(q, u)`` assignment of a path.

    ``q`` maps directed edges to 0/1 for every variable of the encoding;
    ``u`` gives visited areas their 1-based position and unvisited ones 1.
    """
    enc_edges = MisdpEncoding(g, np.inf).edges
    q = {e: 0 for e in enc_edges}
    for e in zip(path.seq, path.seq[1:]):
        q[e] = 1
    u = {v: 1 for v in range(1, g.N + 1)}
    for pos, v in enumerate(path.seq[1:-1], start=1):
        u[v] = pos
    return q, u


def decode_assignment(q: dict, g: MonitorGraph) -> Path:
    """Follow the selected edges from vertex 0; assumes a verified assignment."""
    succ = {}
    for (i, j), val in q.items():
        if val:
            succ[i] = j
    seq = [0]
    while seq[-1] != g.end and len(seq) <= g.N + 2:
        seq.append(succ[seq[-1]])
    return make_path(seq, g)


def verify_assignment(q: dict, u: dict, g: MonitorGraph, budget: float) -> bool:
    """True iff the integral ``(q, u)`` satisfies every path constraint.

    Checks depot selection, no flow into ``0`` or out of ``N+1``, flow
    continuity with at most one visit per area, the flight budget, order
    bounds and the subtour-eliminating ordering constraints.
    """
    enc = MisdpEncoding(g, budget)
    known = set(enc.edges)
    values = {}
    for e, val in q.items():
        if val not in (0, 1):
            return False
        e = (int(e[0]), int(e[1]))
        if e not in known:
            # flow into 0, out of N+1, or along a non-edge
            if val:
                return False
            continue
        values[enc.q_name(e)] = float(val)
    lo, hi = enc.u_bounds
    for v in range(1, g.N + 1):
        uv = u.get(v)
        if uv is None or not float(uv).is_integer() or not lo <= uv <= hi:
            return False
        values[enc.u_name(v)] = float(uv)
    tol = 1e-9
    for con in enc.constraints():
        s = con.slack(values)
        if con.name == "budget":
            if sum(c * values.get(k, 0.0) for k, c in con.coeffs.items()) > budget_limit(budget):
                return False
        elif con.sense == "=" and abs(s) > tol:
            return False
        elif con.sense == "<=" and s < -tol:
            return False
    return True


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def export_misdp(enc: MisdpEncoding, model: FieldModel, P_prior) -> str:
    """Plain-text MISDP model for external solvers.

    Layout, one record per line::

        MISDP 1
        OBJECTIVE MAX alpha
        VARIABLES <count>
        VAR <name> <binary|integer|continuous> <lb> <ub>
        CONSTRAINTS <count>
        CON <name> <= | = <rhs> <nterms> (<coef> <var>)*
        LMI <dim> <nterms>
        CONST
        <dim rows of dim numbers>
        TERM <var>
        <dim rows of dim numbers>
        END

    The matrix inequality reads ``CONST + sum(var * TERM_var) >= 0`` in the
    semidefinite order. ``CONST`` is the prior information plus all
    fixed-sensor terms; ``alpha`` carries ``-I``; each edge entering an area
    carries that area's mobile-sensor term. Numbers use 17 significant
    digits, so the text round-trips doubles exactly.
    """
    obj = InformationObjective(model, P_prior)
    dim = model.n_states
    lines = ["MISDP 1", "OBJECTIVE MAX alpha"]
    variables = enc.variables() + [("alpha", "continuous", "-inf", "inf")]
    lines.append(f"VARIABLES {len(variables)}")
    for name, kind, lb, ub in variables:
        lines.append(f"VAR {name} {kind} {lb} {ub}")
    cons = enc.constraints()
    lines.append(f"CONSTRAINTS {len(cons)}")
    for con in cons:
        terms = " ".join(f"{_fmt(c)} {v}" for v, c in con.coeffs.items())
        lines.append(f"CON {con.name} {con.sense} {_fmt(con.rhs)} {len(con.coeffs)} {terms}".rstrip())

    def mat_lines(M):
        return [" ".join(_fmt(x) for x in row) for row in M]

    terms = [("alpha", -np.eye(dim))]
    n = model.n
    for e in enc.edges:
        j = e[1]
        if 1 <= j <= model.N:
            H = np.zeros((dim, dim))
            H[(j - 1) * n:j * n, (j - 1) * n:j * n] = model.mobile_info_blocks[j - 1]
            terms.append((enc.q_name(e), H))
    lines.append(f"LMI {dim} {len(terms)}")
    lines.append("CONST")
    lines.extend(mat_lines(obj.Y_base))
    for name, H in terms:
        lines.append(f"TERM {name}")
        lines.extend(mat_lines(H))
    lines.append("END")
    return "\n".join(lines) + "\n"


def parse_misdp(text: str) -> dict:
    """Read a document written by :func:`export_misdp`.

    Returns a dict with ``variables`` (list of tuples), ``constraints``
    (list of :class:`LinearConstraint`), ``lmi_const`` and ``lmi_terms``
    (name -> matrix).
    """
    it = iter(io.StringIO(text).read().splitlines())

    def expect(prefix):
        line = next(it)
        if not line.startswith(prefix):
            raise ValueError(f"expected {prefix!r}, got {line!r}")
        return line.split()

    expect("MISDP 1")
    expect("OBJECTIVE MAX")
    nvar = int(expect("VARIABLES")[1])
    variables = []
    for _ in range(nvar):
        _, name, kind, lb, ub = expect("VAR ")
        variables.append((name, kind, float(lb), float(ub)))
    ncon = int(expect("CONSTRAINTS")[1])
    constraints = []
    for _ in range(ncon):
        tok = expect("CON ")
        name, sense, rhs, nterm = tok[1], tok[2], float(tok[3]), int(tok[4])
        rest = tok[5:]
        coeffs = {rest[2 * k + 1]: float(rest[2 * k]) for k in range(nterm)}
        constraints.append(LinearConstraint(name, coeffs, sense, rhs))
    _, dim, nterms = expect("LMI ")
    dim, nterms = int(dim), int(nterms)

    def read_mat():
        return np.array([[float(x) for x in next(it).split()] for _ in range(dim)]).reshape(dim, dim)

    expect("CONST")
    const = read_mat()
    terms = {}
    for _ in range(nterms):
        name = expect("TERM ")[1]
        terms[name] = read_mat()
    expect("END")
    return {"variables": variables, "constraints": constraints, "lmi_const": const, "lmi_terms": terms}
