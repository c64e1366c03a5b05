"""Per-net Steiner routing under effective edge costs ``w_e + lambda_e``.

The heuristic is the shortest-path (Takahashi-Matsuyama) construction: grow a
tree from the smallest terminal, attaching the nearest remaining terminal by a
shortest path each step.  Its cost is at most ``2 * (1 - 1/k)`` times the
optimal Steiner tree for ``k`` terminals, it is exact for two terminals, and
every leaf is a terminal by construction.
"""

from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .grid import Edge, GridGraph
from .netlist import Net


class EffectiveCosts:
    """Edge cost vector ``weight + multiplier`` bound to one graph."""

    def __init__(self, graph: GridGraph, multipliers=None):
        self.graph = graph
        lam = np.zeros(graph.n_edges) if multipliers is None else np.asarray(multipliers, dtype=np.float64)
        if lam.shape != (graph.n_edges,):
            raise ValueError(f"expected {graph.n_edges} multipliers, got shape {lam.shape}")
        if np.any(lam < 0) or not np.all(np.isfinite(lam)):
            raise ValueError("multipliers must be finite and nonnegative")
        self.multipliers = lam
        self.cost = np.ascontiguousarray(graph.weight + lam)
        self.cost.setflags(write=False)

    def __getitem__(self, edge: Edge) -> float:
        return float(self.cost[self.graph.edge_index(*edge)])


@dataclass(frozen=True)
class RouteTree:
    net_id: int
    edges: tuple[Edge, ...]
    cost: float
    wirelength: float
    edge_ids: np.ndarray = field(repr=False, compare=False)

    def __eq__(self, other):
        if not isinstance(other, RouteTree):
            return NotImplemented
        return self.net_id == other.net_id and self.edges == other.edges

    def __hash__(self):
        return hash((self.net_id, self.edges))

    def vertices(self) -> set:
        return {v for e in self.edges for v in e}


def tree_from_edge_ids(graph: GridGraph, net_id: int, edge_ids, costs: EffectiveCosts | None = None) -> RouteTree:
    ids = np.sort(np.asarray(edge_ids, dtype=np.int64))
    edges = tuple(graph.edge(i) for i in ids)
    wl = float(sum(graph.weight[i] for i in ids))
    cost = wl if costs is None else float(sum(costs.cost[i] for i in ids))
    return RouteTree(net_id, edges, cost, wl, ids)


def route_net(graph: GridGraph, costs: EffectiveCosts, net: Net) -> RouteTree:
    """Route a single net; deterministic for fixed inputs."""
    for t in net.terminals:
        if not graph.contains(t):
            raise ValueError(f"net {net.id}: terminal {tuple(t)} out of bounds")
    ptr = np.array([0, len(net.terminals)], dtype=np.int32)
    terms = np.array([graph.vertex_index(t) for t in net.terminals], dtype=np.int32)
    out = np.zeros((1, max(graph.n_vertices - 1, 1)), dtype=np.int32)
    count = np.zeros(1, dtype=np.int32)
    kernels.route_block(graph.nbr_vertex, graph.nbr_edge, costs.cost, ptr, terms, 0, 1, out, count)
    return tree_from_edge_ids(graph, net.id, out[0, :count[0]], costs)


def _edge_ids(tree: RouteTree, graph: GridGraph) -> list[int]:
    return [graph.edge_index(a, b) for a, b in tree.edges]


def tree_cost(tree: RouteTree, costs: EffectiveCosts) -> float:
    """Sum of ``w_e + lambda_e`` over the tree; unknown edges raise ``ValueError``."""
    return float(sum(costs.cost[i] for i in _edge_ids(tree, costs.graph)))


def tree_wirelength(tree: RouteTree, graph: GridGraph) -> float:
    return float(sum(graph.weight[i] for i in _edge_ids(tree, graph)))


def _adjacency(edges) -> dict:
    adj = defaultdict(list)
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    return adj


def tree_problems(tree: RouteTree, terminals) -> list[str]:
    """Names of violated route-tree properties; empty when the tree is valid."""
    terminals = set(terminals)
    problems = []
    edges = list(tree.edges)
    if len(set(edges)) != len(edges):
        problems.append("duplicate edge")
    adj = _adjacency(edges)
    verts = set(adj)
    if not edges:
        # a valid tree for >= 2 distinct terminals always has an edge
        return ["no edges"]
    if len(edges) != len(verts) - 1:
        problems.append("edge count != vertex count - 1")
    start = next(iter(verts))
    seen = {start}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for u in adj[v]:
            if u not in seen:
                seen.add(u)
                queue.append(u)
    if seen != verts:
        problems.append("disconnected")
    if not terminals <= verts:
        problems.append("terminal not spanned")
    if any(len(adj[v]) == 1 and v not in terminals for v in verts):
        problems.append("non-terminal leaf")
    return problems


def max_terminal_path(tree: RouteTree, terminals, graph: GridGraph) -> float:
    """Largest ``w_e`` path length between two terminals inside the tree."""
    adj = defaultdict(list)
    for a, b in tree.edges:
        w = float(graph.weight[graph.edge_index(a, b)])
        adj[a].append((b, w))
        adj[b].append((a, w))
    terminals = list(terminals)
    best = 0.0
    for src in terminals:
        dist = {src: 0.0}
        stack = [src]
        while stack:
            v = stack.pop()
            for u, w in adj[v]:
                if u not in dist:
                    dist[u] = dist[v] + w
                    stack.append(u)
        best = max(best, max(dist.get(t, 0.0) for t in terminals))
    return best
