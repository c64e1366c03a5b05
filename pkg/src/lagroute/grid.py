"""Weighted 4-neighbour lattice used as the routing graph.

Vertices are ``(row, col)`` pairs; internally they are numbered row-major so
that integer order coincides with lexicographic order.  Edges are numbered in
lexicographic order of their canonical endpoint pair.
"""

from __future__ import annotations

from typing import Iterator, Mapping, NamedTuple

import numpy as np


class InvalidInstanceError(ValueError):
    """Raised for malformed routing instances (bad dimensions, terminals...)."""


class Vertex(NamedTuple):
    row: int
    col: int


Edge = tuple[Vertex, Vertex]

# neighbour offsets in lexicographic order of the resulting vertex
_OFFSETS = ((-1, 0), (0, -1), (0, 1), (1, 0))


def canonical_edge(a, b) -> Edge:
    a, b = Vertex(*a), Vertex(*b)
    return (a, b) if a < b else (b, a)


class GridGraph:
    """Immutable ``rows x cols`` grid with a nonnegative cost per edge.

    Arrays exposed for the kernels:

    ``edge_u``, ``edge_v``
        Endpoint vertex indices of every edge (``edge_u < edge_v``).
    ``nbr_vertex``, ``nbr_edge``
        ``(n_vertices, 4)`` int32 tables, ``-1`` where a neighbour is missing,
        columns ordered lexicographically by neighbour.
    ``weight``
        float64 edge costs.
    """

    def __init__(self, rows: int, cols: int, default_weight: float = 1.0,
                 weights: Mapping[Edge, float] | None = None):
        rows, cols = int(rows), int(cols)
        if rows < 2 or cols < 2:
            raise InvalidInstanceError(f"grid must be at least 2x2, got {rows}x{cols}")
        self.rows = rows
        self.cols = cols

        eu, ev = [], []
        for r in range(rows):
            for c in range(cols):
                v = r * cols + c
                if c + 1 < cols:
                    eu.append(v)
                    ev.append(v + 1)
                if r + 1 < rows:
                    eu.append(v)
                    ev.append(v + cols)
        self.edge_u = np.array(eu, dtype=np.int32)
        self.edge_v = np.array(ev, dtype=np.int32)
        self._edge_index = {(int(u), int(v)): i for i, (u, v) in enumerate(zip(eu, ev))}

        nv = np.full((rows * cols, 4), -1, dtype=np.int32)
        ne = np.full((rows * cols, 4), -1, dtype=np.int32)
        for r in range(rows):
            for c in range(cols):
                v = r * cols + c
                for j, (dr, dc) in enumerate(_OFFSETS):
                    rr, cc = r + dr, c + dc
                    if 0 <= rr < rows and 0 <= cc < cols:
                        u = rr * cols + cc
                        nv[v, j] = u
                        ne[v, j] = self._edge_index[(min(u, v), max(u, v))]
        self.nbr_vertex = nv
        self.nbr_edge = ne

        default_weight = float(default_weight)
        if not np.isfinite(default_weight) or default_weight < 0:
            raise InvalidInstanceError(f"edge weight must be finite and >= 0, got {default_weight}")
        w = np.full(len(eu), default_weight, dtype=np.float64)
        for edge, value in (weights or {}).items():
            value = float(value)
            if not np.isfinite(value) or value < 0:
                raise InvalidInstanceError(f"edge weight must be finite and >= 0, got {value}")
            w[self.edge_index(*edge)] = value
        w.setflags(write=False)
        for a in (self.edge_u, self.edge_v, self.nbr_vertex, self.nbr_edge):
            a.setflags(write=False)
        self.weight = w

    @property
    def n_vertices(self) -> int:
        return self.rows * self.cols

    @property
    def n_edges(self) -> int:
        return len(self.edge_u)

    def contains(self, v) -> bool:
        r, c = v
        return 0 <= r < self.rows and 0 <= c < self.cols

    def vertex_index(self, v) -> int:
        if not self.contains(v):
            raise ValueError(f"vertex {tuple(v)} outside {self.rows}x{self.cols} grid")
        return int(v[0]) * self.cols + int(v[1])

    def vertex(self, index: int) -> Vertex:
        return Vertex(*divmod(int(index), self.cols))

    def edge_index(self, a, b) -> int:
        """Index of the edge joining lattice neighbours ``a`` and ``b`` (any order)."""
        ia, ib = self.vertex_index(a), self.vertex_index(b)
        try:
            return self._edge_index[(min(ia, ib), max(ia, ib))]
        except KeyError:
            raise ValueError(f"{tuple(a)} and {tuple(b)} are not lattice neighbours") from None

    def edge(self, index: int) -> Edge:
        return (self.vertex(self.edge_u[index]), self.vertex(self.edge_v[index]))

    def edges(self) -> Iterator[Edge]:
        for i in range(self.n_edges):
            yield self.edge(i)

    def neighbors(self, v) -> list[tuple[Vertex, Edge]]:
        """Lattice neighbours of ``v`` with their connecting edges, lexicographic order."""
        i = self.vertex_index(v)
        out = []
        for u, e in zip(self.nbr_vertex[i], self.nbr_edge[i]):
            if u >= 0:
                out.append((self.vertex(u), self.edge(e)))
        return out

    def with_weights(self, weights: Mapping[Edge, float]) -> GridGraph:
        """Copy of this graph with some edge weights overridden."""
        merged = {self.edge(i): float(w) for i, w in enumerate(self.weight)}
        merged.update({canonical_edge(*e): w for e, w in weights.items()})
        return GridGraph(self.rows, self.cols, 0.0, merged)

    def __eq__(self, other):
        if not isinstance(other, GridGraph):
            return NotImplemented
        return (self.rows, self.cols) == (other.rows, other.cols) and np.array_equal(self.weight, other.weight)

    def __hash__(self):
        return hash((self.rows, self.cols, self.weight.tobytes()))

    def __repr__(self):
        return f"GridGraph({self.rows}x{self.cols}, |E|={self.n_edges})"


def build_grid(rows: int, cols: int, default_weight: float = 1.0) -> GridGraph:
    return GridGraph(rows, cols, default_weight)
