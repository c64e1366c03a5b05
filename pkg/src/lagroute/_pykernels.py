"""Pure-Python routing kernel; reference semantics for ``_kernels.pyx``.

Each net is routed with the shortest-path Steiner heuristic: start from the
smallest terminal and repeatedly attach the unconnected terminal nearest to
the current tree along its shortest path.

Labels are compared as ``(cost, hops, vertex)``.  The predecessor of a vertex
is the smallest-index neighbour realising its ``(cost, hops)`` label, which
makes the result independent of heap internals and acyclic on zero-cost edges.

The search is not restarted after attaching a path: the new tree vertices are
pushed as zero-label sources and the same Dijkstra continues.  Adding sources
can only lower labels, so this reaches exactly the labels a fresh search would,
and because predecessors depend on labels alone they are resolved on the way
back from the target instead of being maintained during relaxation.
"""

from heapq import heappop, heappush

INF = float("inf")


def route_block(nbr_vertex, nbr_edge, costs, term_ptr, terms, lo, hi, out_edges, out_count):
    """Route nets ``lo..hi-1`` writing sorted edge indices into ``out_edges[net]``."""
    n_v = len(nbr_vertex)
    adj_v = [list(map(int, row)) for row in nbr_vertex]
    adj_e = [list(map(int, row)) for row in nbr_edge]
    cost = [float(c) for c in costs]
    ptr = [int(p) for p in term_ptr]
    flat = [int(t) for t in terms]
    for net in range(lo, hi):
        edges = sorted(_route_one(n_v, adj_v, adj_e, cost, flat[ptr[net]:ptr[net + 1]]))
        out_count[net] = len(edges)
        out_edges[net, :len(edges)] = edges


def _route_one(n_v, adj_v, adj_e, cost, net_terms):
    is_term = set(net_terms)
    in_tree = [False] * n_v
    dist = [INF] * n_v
    hops = [0] * n_v
    done = [False] * n_v
    heap = []
    edges = []

    def add_source(v):
        in_tree[v] = True
        dist[v] = 0.0
        hops[v] = 0
        done[v] = False
        heappush(heap, (0.0, 0, v))

    add_source(min(net_terms))
    remaining = len(is_term) - 1
    while remaining:
        target = -1
        while heap:
            d, h, v = heappop(heap)
            if done[v] or d != dist[v] or h != hops[v]:
                continue
            done[v] = True
            if not in_tree[v] and v in is_term:
                target = v
                break
            nh = h + 1
            row_v = adj_v[v]
            row_e = adj_e[v]
            for j in range(4):
                u = row_v[j]
                if u < 0:
                    continue
                nd = d + cost[row_e[j]]
                if nd < dist[u] or (nd == dist[u] and nh < hops[u]):
                    dist[u] = nd
                    hops[u] = nh
                    done[u] = False
                    heappush(heap, (nd, nh, u))
        if target < 0:
            raise ValueError("terminals are disconnected")
        x = target
        path = []
        while not in_tree[x]:
            path.append(x)
            row_v = adj_v[x]
            for j in range(4):
                u = row_v[j]
                if u >= 0 and hops[u] + 1 == hops[x] and dist[u] + cost[adj_e[x][j]] == dist[x]:
                    edges.append(adj_e[x][j])
                    x = u
                    break
        for v in path:
            add_source(v)
        remaining -= 1
    return edges
