"""Edge-weight schemes and assembly of symmetric stochastic weight matrices.

Four schemes: the closed-form optimal weights for the three star families,
plus Metropolis-Hastings, maximum-degree and best-constant weighting as
baselines.  The assembled matrix W puts the edge weight on the
off-diagonal and 1 minus the incident weight sum on the diagonal, so rows
always sum to 1 and W is symmetric.  Negative diagonals are legal (and do
occur for the optimal weights on star centers).
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .topology import (
    CcsStar,
    Custom,
    Graph,
    KcsStar,
    SymmetricStar,
    Topology,
    TopologyError,
    build,
)

__all__ = [
    "WeightAssignment",
    "WeightError",
    "optimal_weights",
    "metropolis_weights",
    "max_degree_weights",
    "best_constant_weights",
    "assemble_matrix",
    "per_stratum_from_matrix",
    "check_weight_matrix",
    "weights_to_csv",
    "weights_to_json",
    "matrix_to_csv",
]

ROW_SUM_TOL = 1e-12


class WeightError(ValueError):
    """Raised for unsupported schemes or incomplete assignments."""


@dataclass(frozen=True)
class WeightAssignment:
    """Per-stratum or per-edge edge weights.

    ``beyond_k_max`` flags KCS assignments with k past the optimality
    threshold: the closed-form weights are still returned but are not
    guaranteed optimal there.
    """

    per_stratum: dict[int, float] | None = None
    per_edge: dict[tuple[int, int], float] | None = None
    beyond_k_max: bool = field(default=False)

    def edge_weight(self, edge: tuple[int, int], stratum: int | None) -> float:
        if self.per_edge is not None:
            e = (min(edge), max(edge))
            if e not in self.per_edge:
                raise WeightError(f"no weight for edge {e}")
            return self.per_edge[e]
        assert self.per_stratum is not None
        if stratum is None:
            raise WeightError("per-stratum assignment needs a labeled graph")
        if stratum not in self.per_stratum:
            raise WeightError(f"no weight for stratum {stratum}")
        return self.per_stratum[stratum]


def optimal_weights(topology: Topology) -> WeightAssignment:
    """Closed-form optimal weights for the three star families.

    Symmetric star: central edges 2/(n+2), rest 1/2.
    CCS star: core edges 1/n, tails 1/2.
    KCS star: central edges 2/(n+2k), rest 1/2 (flagged beyond k_max).
    """
    if isinstance(topology, SymmetricStar):
        w = {1: 2.0 / (topology.n + 2)}
        w.update({j: 0.5 for j in range(2, topology.m + 1)})
        return WeightAssignment(per_stratum=w)
    if isinstance(topology, CcsStar):
        w = {0: 1.0 / topology.n}
        w.update({j: 0.5 for j in range(1, topology.m + 1)})
        return WeightAssignment(per_stratum=w)
    if isinstance(topology, KcsStar):
        m, n, k = topology.m, topology.n, topology.k
        w = {1: 2.0 / (n + 2 * k)}
        w.update({j: 0.5 for j in range(2, m + 1)})
        from .spectral import k_max  # local import to avoid a cycle
        return WeightAssignment(per_stratum=w, beyond_k_max=k > k_max(m, n))
    raise WeightError("optimal weights are defined only for the star families")


def _require_connected(graph: Graph):
    if not graph.is_connected():
        raise WeightError("weighting schemes require a connected graph")


def metropolis_weights(graph: Graph) -> np.ndarray:
    """Metropolis-Hastings: edge (i,j) gets 1/(1 + max(d_i, d_j))."""
    _require_connected(graph)
    deg = graph.degrees()
    per_edge = {e: 1.0 / (1 + max(deg[e[0]], deg[e[1]])) for e in graph.edges}
    return assemble_matrix(graph, WeightAssignment(per_edge=per_edge))


def max_degree_weights(graph: Graph) -> np.ndarray:
    """Maximum-degree: every edge gets 1/max_k(d_k)."""
    _require_connected(graph)
    dmax = max(graph.degrees())
    per_edge = {e: 1.0 / dmax for e in graph.edges}
    return assemble_matrix(graph, WeightAssignment(per_edge=per_edge))


def best_constant_weights(graph: Graph) -> np.ndarray:
    """Best-constant: uniform edge weight 2/(lam_1(L) + lam_{N-1}(L)).

    L is the standard graph Laplacian D - A; lam_1 is its largest and
    lam_{N-1} its second-smallest eigenvalue.
    """
    _require_connected(graph)
    n = graph.node_count
    lap = np.zeros((n, n))
    for u, v in graph.edges:
        lap[u, u] += 1.0
        lap[v, v] += 1.0
        lap[u, v] -= 1.0
        lap[v, u] -= 1.0
    lam = np.sort(np.linalg.eigvalsh(lap))[::-1]  # decreasing
    alpha = 2.0 / (lam[0] + lam[n - 2])
    per_edge = {e: alpha for e in graph.edges}
    return assemble_matrix(graph, WeightAssignment(per_edge=per_edge))


def assemble_matrix(graph: Graph, assignment: WeightAssignment) -> np.ndarray:
    """Dense symmetric stochastic matrix from an edge-weight assignment.

    Off-diagonal (i,j) carries the edge weight, diagonal i carries
    1 - sum of weights incident to i.
    """
    n = graph.node_count
    W = np.zeros((n, n))
    for e in graph.edges:
        s = graph.stratum_of_edge[e] if graph.stratum_of_edge else None
        w = assignment.edge_weight(e, s)
        u, v = e
        W[u, v] = w
        W[v, u] = w
    np.fill_diagonal(W, 1.0 - W.sum(axis=1))
    return W


def per_stratum_from_matrix(graph: Graph, W: np.ndarray) -> dict[int, float]:
    """Recover per-stratum weights from a matrix respecting the strata.

    Rejects matrices whose edge weights vary within a stratum (those do
    not admit a stratified block form).
    """
    if graph.stratum_of_edge is None:
        raise WeightError("graph carries no stratum labels")
    per: dict[int, float] = {}
    for (u, v), s in graph.stratum_of_edge.items():
        w = float(W[u, v])
        if s in per and abs(per[s] - w) > 1e-12:
            raise WeightError(f"stratum {s} has non-uniform edge weights")
        per[s] = w
    return per


def check_weight_matrix(W: np.ndarray, graph: Graph | None = None,
                        tol: float = ROW_SUM_TOL) -> None:
    """Assert the WeightMatrix invariants; raises WeightError on failure."""
    if W.ndim != 2 or W.shape[0] != W.shape[1]:
        raise WeightError("weight matrix must be square")
    if not np.allclose(W, W.T, atol=tol, rtol=0):
        raise WeightError("weight matrix must be symmetric")
    if np.max(np.abs(W.sum(axis=1) - 1.0)) > tol:
        raise WeightError("rows must sum to one")
    if graph is not None:
        mask = np.zeros_like(W, dtype=bool)
        for u, v in graph.edges:
            mask[u, v] = mask[v, u] = True
        np.fill_diagonal(mask, True)
        if np.any(W[~mask] != 0.0):
            raise WeightError("nonzero entry outside the edge set")


def scheme_matrix(topology: Topology, scheme: str) -> tuple[Graph, np.ndarray]:
    """Build (graph, W) for a named scheme: optimal | metropolis |
    max-degree | best-constant."""
    graph = build(topology)
    if scheme == "optimal":
        W = assemble_matrix(graph, optimal_weights(topology))
    elif scheme == "metropolis":
        W = metropolis_weights(graph)
    elif scheme == "max-degree":
        W = max_degree_weights(graph)
    elif scheme == "best-constant":
        W = best_constant_weights(graph)
    else:
        raise WeightError(f"unknown weighting scheme {scheme!r}")
    return graph, W


def weights_to_csv(graph: Graph, W: np.ndarray) -> str:
    """CSV export: edge section ``u,v,weight`` then ``diag`` section
    ``node,self_weight``."""
    buf = io.StringIO()
    buf.write("u,v,weight\n")
    for u, v in graph.edges:
        buf.write(f"{u},{v},{W[u, v]:.17g}\n")
    buf.write("diag\nnode,self_weight\n")
    for i in range(graph.node_count):
        buf.write(f"{i},{W[i, i]:.17g}\n")
    return buf.getvalue()


def weights_to_json(graph: Graph, W: np.ndarray) -> str:
    return json.dumps({
        "edges": [{"u": u, "v": v, "weight": W[u, v]} for u, v in graph.edges],
        "diag": [{"node": i, "self_weight": W[i, i]}
                 for i in range(graph.node_count)],
    }, indent=2)


def matrix_to_csv(W: np.ndarray) -> str:
    buf = io.StringIO()
    for row in W:
        buf.write(",".join(f"{x:.17g}" for x in row))
        buf.write("\n")
    return buf.getvalue()
