"""Construction of star-family network graphs with edge-stratum labels.

Three families are supported:

* symmetric star: one central node with n path tails of length m (m edges
  per tail),
* CCS star (complete-cored): the n tails meet in a complete graph on n
  core nodes,
* KCS star (k-cored): k parallel central nodes, every tail attached to
  all k of them, no edges among the centrals.

Edges are labeled by stratum (orbit under branch permutation): stratum 0
for core edges, stratum j for the j-th edge of a tail counted from the
center outward.  Custom graphs carry no stratum labels.

Node layout is fixed for reproducibility: central/core nodes occupy the
lowest indices, then tail nodes in branch-major order, inner to outer.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

__all__ = [
    "Graph",
    "SymmetricStar",
    "CcsStar",
    "KcsStar",
    "Custom",
    "Topology",
    "TopologyError",
    "ValidationReport",
    "build",
    "validate",
    "graph_to_csv",
    "graph_from_csv",
]


class TopologyError(ValueError):
    """Raised for topology parameters or graphs violating invariants."""


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph with optional edge-stratum labels.

    Edges are stored as (u, v) tuples with u < v.  ``stratum_of_edge``
    maps each edge to its stratum index (0 for core edges, 1..m for tail
    edges) and is None for custom graphs.
    """

    node_count: int
    edges: tuple[tuple[int, int], ...]
    stratum_of_edge: dict[tuple[int, int], int] | None = None

    def __post_init__(self):
        if self.node_count < 1:
            raise TopologyError("graph needs at least one node")
        seen = set()
        norm = []
        for u, v in self.edges:
            if u == v:
                raise TopologyError(f"self-loop at node {u}")
            if not (0 <= u < self.node_count and 0 <= v < self.node_count):
                raise TopologyError(f"edge ({u},{v}) out of range")
            e = (min(u, v), max(u, v))
            if e in seen:
                raise TopologyError(f"duplicate edge {e}")
            seen.add(e)
            norm.append(e)
        object.__setattr__(self, "edges", tuple(norm))
        if self.stratum_of_edge is not None:
            labeled = {(min(u, v), max(u, v)): s
                       for (u, v), s in self.stratum_of_edge.items()}
            if set(labeled) != seen:
                raise TopologyError("stratum labels must cover exactly the edge set")
            object.__setattr__(self, "stratum_of_edge", labeled)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def degrees(self) -> list[int]:
        d = [0] * self.node_count
        for u, v in self.edges:
            d[u] += 1
            d[v] += 1
        return d

    def neighbors(self, u: int) -> list[int]:
        out = []
        for a, b in self.edges:
            if a == u:
                out.append(b)
            elif b == u:
                out.append(a)
        return out

    def is_connected(self) -> bool:
        if self.node_count == 1:
            return True
        adj = [[] for _ in range(self.node_count)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        seen = {0}
        stack = [0]
        while stack:
            u = stack.pop()
            for w in adj[u]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == self.node_count

    def strata_sizes(self) -> dict[int, int]:
        if self.stratum_of_edge is None:
            raise TopologyError("graph carries no stratum labels")
        sizes: dict[int, int] = {}
        for s in self.stratum_of_edge.values():
            sizes[s] = sizes.get(s, 0) + 1
        return sizes


@dataclass(frozen=True)
class SymmetricStar:
    """One central node, n tails of m edges each."""
    m: int
    n: int

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise TopologyError("symmetric star requires m >= 1, n >= 1")


@dataclass(frozen=True)
class CcsStar:
    """Complete core on n nodes, one tail path of m edges hanging off each
    core node (a branch is a path with m edges whose inner endpoint is the
    core node), so the graph has n(m+1) nodes."""
    m: int
    n: int

    def __post_init__(self):
        if self.m < 1:
            raise TopologyError("CCS star requires m >= 1")
        if self.n < 2:
            raise TopologyError("CCS star requires n >= 2 (single-branch core is degenerate)")


@dataclass(frozen=True)
class KcsStar:
    """k parallel central nodes, each of the n tails attached to all k."""
    m: int
    n: int
    k: int

    def __post_init__(self):
        if self.m < 1 or self.n < 1 or self.k < 1:
            raise TopologyError("KCS star requires m, n, k >= 1")


@dataclass(frozen=True)
class Custom:
    """User-supplied graph; no stratum structure is assumed."""
    graph: Graph


Topology = SymmetricStar | CcsStar | KcsStar | Custom


def build(topology: Topology) -> Graph:
    """Construct the graph of a star family (or pass a custom graph through).

    Node layout: centrals/core first (indices 0..k-1 resp. 0..n-1), then
    tail nodes branch-major, inner to outer.  Edge order: core edges first
    (lexicographic), then tail edges branch-major, inner to outer.
    """
    if isinstance(topology, Custom):
        return topology.graph

    edges: list[tuple[int, int]] = []
    strata: dict[tuple[int, int], int] = {}

    if isinstance(topology, SymmetricStar):
        m, n = topology.m, topology.n

        def tail(i, j):  # branch i (0-based), position j = 1..m
            return 1 + i * m + (j - 1)

        for i in range(n):
            e = (0, tail(i, 1))
            edges.append(e)
            strata[e] = 1
            for j in range(2, m + 1):
                e = (tail(i, j - 1), tail(i, j))
                edges.append(e)
                strata[e] = j
        return Graph(1 + n * m, tuple(edges), strata)

    if isinstance(topology, CcsStar):
        m, n = topology.m, topology.n
        for u in range(n):
            for v in range(u + 1, n):
                e = (u, v)
                edges.append(e)
                strata[e] = 0

        def tail(i, j):  # j = 1..m; core node i is position 0 of branch i
            return n + i * m + (j - 1)

        for i in range(n):
            prev = i
            for j in range(1, m + 1):
                e = (prev, tail(i, j))
                edges.append(e)
                strata[e] = j
                prev = tail(i, j)
        return Graph(n * (m + 1), tuple(edges), strata)

    if isinstance(topology, KcsStar):
        m, n, k = topology.m, topology.n, topology.k

        def tail(i, j):  # j = 1..m
            return k + i * m + (j - 1)

        for i in range(n):
            for c in range(k):
                e = (c, tail(i, 1))
                edges.append(e)
                strata[e] = 1
            for j in range(2, m + 1):
                e = (tail(i, j - 1), tail(i, j))
                edges.append(e)
                strata[e] = j
        return Graph(k + n * m, tuple(edges), strata)

    raise TopologyError(f"unknown topology {topology!r}")


@dataclass(frozen=True)
class ValidationReport:
    connected: bool
    simple: bool
    degrees: tuple[int, ...]
    node_count: int
    edge_count: int
    strata_sizes: dict[int, int] | None = field(default=None)


def validate(graph: Graph) -> ValidationReport:
    """Report-only structural check (Graph construction already rejects
    self-loops and duplicates, so ``simple`` is always True here)."""
    return ValidationReport(
        connected=graph.is_connected(),
        simple=True,
        degrees=tuple(graph.degrees()),
        node_count=graph.node_count,
        edge_count=graph.edge_count,
        strata_sizes=graph.strata_sizes() if graph.stratum_of_edge else None,
    )


def graph_to_csv(graph: Graph) -> str:
    """Edge-list CSV ``u,v,stratum`` (stratum column empty for custom graphs)."""
    buf = io.StringIO()
    buf.write("u,v,stratum\n")
    for u, v in graph.edges:
        s = "" if graph.stratum_of_edge is None else graph.stratum_of_edge[(u, v)]
        buf.write(f"{u},{v},{s}\n")
    return buf.getvalue()


def graph_from_csv(text: str, node_count: int | None = None) -> Graph:
    edges = []
    strata: dict[tuple[int, int], int] = {}
    have_strata = True
    lines = [ln for ln in text.strip().splitlines() if ln.strip()]
    if lines and lines[0].lower().startswith("u,"):
        lines = lines[1:]
    for ln in lines:
        parts = ln.split(",")
        u, v = int(parts[0]), int(parts[1])
        edges.append((u, v))
        if len(parts) > 2 and parts[2].strip() != "":
            strata[(min(u, v), max(u, v))] = int(parts[2])
        else:
            have_strata = False
    if node_count is None:
        node_count = 1 + max(max(u, v) for u, v in edges)
    return Graph(node_count, tuple(edges), strata if have_strata and strata else None)
