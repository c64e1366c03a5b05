"""Exact routing of tiny instances by exhaustive enumeration.

Every Steiner tree whose leaves are all terminals is enumerated: start from
the smallest terminal and attach each further terminal by every simple path
that first touches the current tree at its endpoint.  Each such tree arises
from exactly one sequence of attachments, and pruning non-terminal leaves
never increases cost or usage, so optimising over this family is exact.
Combinations are searched by branch and bound over edge-usage bitmasks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .grid import GridGraph
from .netlist import Instance
from .steiner import RouteTree, tree_from_edge_ids


class OracleLimitError(ValueError):
    """Instance too large for exhaustive search."""


@dataclass(frozen=True)
class OracleLimits:
    max_vertices: int = 16
    max_nets: int = 3
    max_terminals: int = 3
    max_trees_per_net: int = 100_000
    max_combinations: int = 5_000_000


@dataclass(frozen=True)
class ExactResult:
    width: int
    optimal_wirelength: float  # under the width constraint; inf if infeasible
    min_channel_width: int
    per_net_optimal: tuple[float, ...]
    witness: tuple[RouteTree, ...]  # empty when infeasible at ``width``


def enumerate_trees(graph: GridGraph, terminals, limit: int | None = None) -> list[int]:
    """Edge bitmasks of all trees spanning ``terminals`` whose leaves are terminals."""
    nv = graph.nbr_vertex.tolist()
    ne = graph.nbr_edge.tolist()
    terms = sorted(graph.vertex_index(t) for t in terminals)

    def attach(tree_v, mask, t):
        if t in tree_v:
            yield tree_v, mask
            return
        path = [t]
        on_path = {t}

        def extend(v, m):
            for u, e in zip(nv[v], ne[v]):
                if u < 0 or u in on_path:
                    continue
                if u in tree_v:
                    yield tree_v | on_path, m | (1 << e)
                else:
                    on_path.add(u)
                    path.append(u)
                    yield from extend(u, m | (1 << e))
                    path.pop()
                    on_path.discard(u)

        yield from extend(t, mask)

    current = [(frozenset(terms[:1]), 0)]
    for t in terms[1:]:
        nxt = []
        for tree_v, mask in current:
            for item in attach(tree_v, mask, t):
                nxt.append(item)
                if limit is not None and len(nxt) > limit:
                    raise OracleLimitError(f"more than {limit} candidate trees for one net")
        current = nxt
    return [m for _, m in current]


def _bits(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def _search(options, width: int, n_edges: int, first_only: bool):
    """Minimum total wirelength with per-edge usage <= width.

    ``options[i]`` lists ``(wirelength, mask)`` for net i sorted by wirelength.
    Returns ``(total, [index per net])`` or ``None``.
    """
    n = len(options)
    suffix = [0.0] * (n + 1)
    for i in range(n - 1, -1, -1):
        suffix[i] = suffix[i + 1] + options[i][0][0]
    usage = [0] * n_edges
    choice = [0] * n
    best = [math.inf, None]

    def dfs(i, cost, full):
        if i == n:
            if cost < best[0]:
                best[0] = cost
                best[1] = list(choice)
            return first_only
        for j, (wl, mask) in enumerate(options[i]):
            if cost + wl + suffix[i + 1] >= best[0]:
                break
            if mask & full:
                continue
            bits = _bits(mask)
            added = 0
            for e in bits:
                usage[e] += 1
                if usage[e] == width:
                    added |= 1 << e
            choice[i] = j
            stop = dfs(i + 1, cost + wl, full | added)
            for e in bits:
                usage[e] -= 1
            if stop:
                return True
        return False

    dfs(0, 0.0, 0)
    return None if best[1] is None else (best[0], best[1])


def exact_route(instance: Instance, limits: OracleLimits | None = None, width: int | None = None) -> ExactResult:
    """Exact optimum wirelength at ``width`` (default: the instance's) and exact
    minimum channel width.  Refuses instances beyond ``limits``."""
    limits = limits or OracleLimits()
    g = instance.grid
    if g.n_vertices > limits.max_vertices:
        raise OracleLimitError(f"grid has {g.n_vertices} vertices, limit {limits.max_vertices}")
    if instance.n_nets > limits.max_nets:
        raise OracleLimitError(f"{instance.n_nets} nets, limit {limits.max_nets}")
    if any(len(n.terminals) > limits.max_terminals for n in instance.nets):
        raise OracleLimitError(f"a net exceeds {limits.max_terminals} terminals")
    width = instance.width if width is None else int(width)

    weight = [float(w) for w in g.weight]
    options = []
    combos = 1
    for net in instance.nets:
        masks = enumerate_trees(g, net.terminals, limits.max_trees_per_net)
        opts = sorted(((math.fsum(weight[e] for e in _bits(m)), m) for m in masks))
        options.append(opts)
        combos *= len(opts)
    if combos > limits.max_combinations:
        raise OracleLimitError(f"{combos} tree combinations, limit {limits.max_combinations}")

    # fewest alternatives first: better pruning
    order = sorted(range(len(options)), key=lambda i: (len(options[i]), i))
    ordered = [options[i] for i in order]

    min_w = None
    for w in range(1, instance.n_nets + 1):
        if _search(ordered, w, g.n_edges, first_only=True) is not None:
            min_w = w
            break

    found = _search(ordered, width, g.n_edges, first_only=False)
    per_net = tuple(opts[0][0] for opts in options)
    if found is None:
        return ExactResult(width, math.inf, min_w, per_net, ())
    total, picks = found
    chosen = [None] * len(options)
    for pos, i in enumerate(order):
        chosen[i] = ordered[pos][picks[pos]][1]
    witness = tuple(tree_from_edge_ids(g, net.id, _bits(m)) for net, m in zip(instance.nets, chosen))
    return ExactResult(width, math.fsum(t.wirelength for t in witness), min_w, per_net, witness)
