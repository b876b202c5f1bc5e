"""Exact minimization of binary pairwise submodular energies.

An energy is a sum of per-node label costs plus non-negative weights paid
whenever two linked nodes disagree. Such energies are minimized exactly by
a minimum s-t cut: label-0 cost becomes a source-side arc, label-1 cost a
sink-side arc, and each disagreement weight an undirected arc between the
two nodes. The solver is an augmenting-path max-flow over the level graph
(Dinic's search order), compiled with numba when available; exactness is
the contract, the search strategy is not.

Tie-break: nodes reachable from the source in the final residual graph
take label 1. That set is the same for every maximum flow, so among
equal-cost labelings the one with the fewest label-1 nodes is returned.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import NegativeCostError, NotSubmodularError, ShapeMismatchError

# Residual capacities at or below this are treated as saturated.
EPS = 1e-12

try:
    from numba import njit as _njit

    def _jit(fn):
        return _njit(cache=True)(fn)

except ImportError:  # pragma: no cover - numba is normally installed

    def _jit(fn):
        return fn


@dataclass
class EnergyProblem:
    """Binary pairwise energy: unary[i] = (cost of label 0, cost of label 1),
    pairwise rows (i, j, w) pay w iff labels of i and j differ. Duplicate
    (i, j) rows are summed."""

    n_nodes: int
    unary: np.ndarray  # (n, 2) float64
    pairwise: np.ndarray  # (m, 3) float64 rows (i, j, w)

    def __post_init__(self):
        self.unary = np.asarray(self.unary, dtype=np.float64).reshape(self.n_nodes, 2)
        pw = np.asarray(self.pairwise, dtype=np.float64)
        self.pairwise = pw.reshape(-1, 3)

    @property
    def edge_i(self) -> np.ndarray:
        return self.pairwise[:, 0].astype(np.int64)

    @property
    def edge_j(self) -> np.ndarray:
        return self.pairwise[:, 1].astype(np.int64)

    @property
    def edge_w(self) -> np.ndarray:
        return self.pairwise[:, 2]


class MinimizeResult(NamedTuple):
    labeling: np.ndarray  # (n,) uint8
    energy: float


def evaluate(problem: EnergyProblem, labeling: np.ndarray) -> float:
    """Energy of a labeling: selected unary costs plus disagreement weights."""
    labels = np.asarray(labeling)
    if labels.shape != (problem.n_nodes,):
        raise ShapeMismatchError(
            f"labeling has shape {labels.shape}, expected ({problem.n_nodes},)"
        )
    idx = labels.astype(np.intp)
    total = float(problem.unary[np.arange(problem.n_nodes), idx].sum())
    if len(problem.pairwise):
        i, j, w = problem.edge_i, problem.edge_j, problem.edge_w
        total += float(w[idx[i] != idx[j]].sum())
    return total


def _validate(problem: EnergyProblem) -> None:
    if np.any(problem.unary < 0):
        raise NegativeCostError("unary costs must be non-negative")
    if len(problem.pairwise) == 0:
        return
    i, j, w = problem.edge_i, problem.edge_j, problem.edge_w
    if np.any(w < 0):
        raise NotSubmodularError("pairwise weights must be non-negative")
    if np.any(i == j):
        raise ValueError("self-edges are not allowed")
    if i.min() < 0 or j.min() < 0 or max(i.max(), j.max()) >= problem.n_nodes:
        raise ShapeMismatchError("edge endpoint outside the node range")


def _build_arrays(problem: EnergyProblem):
    """Residual graph in CSR form; paired arcs live at indices e and e^1."""
    n = problem.n_nodes
    source, sink = n, n + 1
    c0 = problem.unary[:, 0]
    c1 = problem.unary[:, 1]
    nodes = np.arange(n, dtype=np.int64)
    src_nodes = nodes[c0 > 0.0]
    snk_nodes = nodes[c1 > 0.0]

    if len(problem.pairwise):
        i, j, w = problem.edge_i, problem.edge_j, problem.edge_w
        lo = np.minimum(i, j)
        hi = np.maximum(i, j)
        key = lo * n + hi
        ukey, inverse = np.unique(key, return_inverse=True)
        wsum = np.bincount(inverse, weights=w)
        keep = wsum > 0.0
        p_lo = (ukey // n)[keep]
        p_hi = (ukey % n)[keep]
        p_w = wsum[keep]
    else:
        p_lo = p_hi = np.zeros(0, dtype=np.int64)
        p_w = np.zeros(0)

    m0, m1, mp = len(src_nodes), len(snk_nodes), len(p_lo)
    n_edges = 2 * (m0 + m1 + mp)
    edge_to = np.empty(n_edges, dtype=np.int64)
    edge_from = np.empty(n_edges, dtype=np.int64)
    cap = np.zeros(n_edges)

    o = 0
    edge_from[o : o + 2 * m0 : 2] = source
    edge_to[o : o + 2 * m0 : 2] = src_nodes
    cap[o : o + 2 * m0 : 2] = c0[src_nodes]
    edge_from[o + 1 : o + 2 * m0 : 2] = src_nodes
    edge_to[o + 1 : o + 2 * m0 : 2] = source
    o += 2 * m0
    edge_from[o : o + 2 * m1 : 2] = snk_nodes
    edge_to[o : o + 2 * m1 : 2] = sink
    cap[o : o + 2 * m1 : 2] = c1[snk_nodes]
    edge_from[o + 1 : o + 2 * m1 : 2] = sink
    edge_to[o + 1 : o + 2 * m1 : 2] = snk_nodes
    o += 2 * m1
    edge_from[o : o + 2 * mp : 2] = p_lo
    edge_to[o : o + 2 * mp : 2] = p_hi
    cap[o : o + 2 * mp : 2] = p_w
    edge_from[o + 1 : o + 2 * mp : 2] = p_hi
    edge_to[o + 1 : o + 2 * mp : 2] = p_lo
    cap[o + 1 : o + 2 * mp : 2] = p_w

    n_vertices = n + 2
    counts = np.bincount(edge_from, minlength=n_vertices)
    adj_off = np.zeros(n_vertices + 1, dtype=np.int64)
    np.cumsum(counts, out=adj_off[1:])
    adj_edges = np.argsort(edge_from, kind="stable").astype(np.int64)
    return edge_to, cap, adj_off, adj_edges


def _dinic_kernel(n_vertices, source, sink, edge_to, cap, adj_off, adj_edges):
    level = np.empty(n_vertices, dtype=np.int64)
    iterator = np.empty(n_vertices, dtype=np.int64)
    queue = np.empty(n_vertices, dtype=np.int64)
    stack_edge = np.empty(n_vertices + 1, dtype=np.int64)
    stack_node = np.empty(n_vertices + 1, dtype=np.int64)
    total = 0.0
    while True:
        for v in range(n_vertices):
            level[v] = -1
        level[source] = 0
        queue[0] = source
        head, tail = 0, 1
        while head < tail:
            u = queue[head]
            head += 1
            for idx in range(adj_off[u], adj_off[u + 1]):
                e = adj_edges[idx]
                if cap[e] > EPS:
                    v = edge_to[e]
                    if level[v] < 0:
                        level[v] = level[u] + 1
                        queue[tail] = v
                        tail += 1
        if level[sink] < 0:
            break
        for v in range(n_vertices):
            iterator[v] = adj_off[v]
        while True:
            # One depth-first augmenting path in the level graph.
            depth = 0
            u = source
            found = False
            while True:
                if u == sink:
                    found = True
                    break
                advanced = False
                while iterator[u] < adj_off[u + 1]:
                    e = adj_edges[iterator[u]]
                    v = edge_to[e]
                    if cap[e] > EPS and level[v] == level[u] + 1:
                        stack_edge[depth] = e
                        stack_node[depth] = u
                        depth += 1
                        u = v
                        advanced = True
                        break
                    iterator[u] += 1
                if advanced:
                    continue
                level[u] = -1  # dead end for this phase
                if depth == 0:
                    break
                depth -= 1
                u = stack_node[depth]
                iterator[u] += 1
            if not found:
                break
            bottleneck = cap[stack_edge[0]]
            for k in range(1, depth):
                if cap[stack_edge[k]] < bottleneck:
                    bottleneck = cap[stack_edge[k]]
            for k in range(depth):
                e = stack_edge[k]
                cap[e] -= bottleneck
                cap[e ^ 1] += bottleneck
            total += bottleneck
    return total


def _reachable_kernel(n_vertices, source, edge_to, cap, adj_off, adj_edges):
    seen = np.zeros(n_vertices, dtype=np.uint8)
    queue = np.empty(n_vertices, dtype=np.int64)
    seen[source] = 1
    queue[0] = source
    head, tail = 0, 1
    while head < tail:
        u = queue[head]
        head += 1
        for idx in range(adj_off[u], adj_off[u + 1]):
            e = adj_edges[idx]
            if cap[e] > EPS:
                v = edge_to[e]
                if seen[v] == 0:
                    seen[v] = 1
                    queue[tail] = v
                    tail += 1
    return seen


_dinic = _jit(_dinic_kernel)
_reachable = _jit(_reachable_kernel)


def minimize(problem: EnergyProblem) -> MinimizeResult:
    """Globally minimize the energy; returns the labeling and its energy."""
    _validate(problem)
    n = problem.n_nodes
    if n == 0:
        return MinimizeResult(np.zeros(0, dtype=np.uint8), 0.0)
    edge_to, cap, adj_off, adj_edges = _build_arrays(problem)
    _dinic(n + 2, n, n + 1, edge_to, cap, adj_off, adj_edges)
    seen = _reachable(n + 2, n, edge_to, cap, adj_off, adj_edges)
    labeling = seen[:n].astype(np.uint8)
    return MinimizeResult(labeling, evaluate(problem, labeling))


def max_flow_value(problem: EnergyProblem) -> float:
    """Max-flow of the cut graph; equals the minimum energy (duality check)."""
    _validate(problem)
    edge_to, cap, adj_off, adj_edges = _build_arrays(problem)
    n = problem.n_nodes
    return float(_dinic(n + 2, n, n + 1, edge_to, cap, adj_off, adj_edges))
