import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lagroute.grid import GridGraph, build_grid
from lagroute.netlist import Net
from lagroute.steiner import (
    EffectiveCosts,
    max_terminal_path,
    route_net,
    tree_cost,
    tree_from_edge_ids,
    tree_problems,
    tree_wirelength,
)


def simple_path_costs(g, cost, s, t):
    """Cost of every simple s-t path, by exhaustive DFS."""
    s, t = g.vertex_index(s), g.vertex_index(t)
    found = []

    def dfs(v, seen, acc):
        if v == t:
            found.append(acc)
            return
        for u, e in zip(g.nbr_vertex[v], g.nbr_edge[v]):
            if u >= 0 and u not in seen:
                seen.add(u)
                dfs(u, seen, acc + cost[e])
                seen.discard(u)

    dfs(s, {s}, 0.0)
    return found


def naive_shortest(g, cost, s, t):
    """O(V^2) array-scan Dijkstra, independent of the kernels."""
    n = g.n_vertices
    dist = [math.inf] * n
    done = [False] * n
    dist[g.vertex_index(s)] = 0.0
    for _ in range(n):
        v = min((i for i in range(n) if not done[i]), key=lambda i: dist[i])
        done[v] = True
        for u, e in zip(g.nbr_vertex[v], g.nbr_edge[v]):
            if u >= 0 and dist[v] + cost[e] < dist[u]:
                dist[u] = dist[v] + cost[e]
    return dist[g.vertex_index(t)]


def brute_force_steiner(g, cost, terminals):
    """Cheapest connected edge subset spanning the terminals (all subsets)."""
    terms = {g.vertex_index(t) for t in terminals}
    best = math.inf
    for r in range(1, g.n_edges + 1):
        for subset in itertools.combinations(range(g.n_edges), r):
            c = sum(cost[e] for e in subset)
            if c >= best:
                continue
            adj = {}
            for e in subset:
                u, v = int(g.edge_u[e]), int(g.edge_v[e])
                adj.setdefault(u, []).append(v)
                adj.setdefault(v, []).append(u)
            if not terms <= adj.keys():
                continue
            start = next(iter(terms))
            seen, stack = {start}, [start]
            while stack:
                x = stack.pop()
                for y in adj[x]:
                    if y not in seen:
                        seen.add(y)
                        stack.append(y)
            if terms <= seen:
                best = c
    return best


def test_adjacent_pair(backend):
    g = build_grid(4, 4)
    t = route_net(g, EffectiveCosts(g), Net(1, ((0, 0), (0, 1))))
    assert t.edges == (((0, 0), (0, 1)),)
    assert t.cost == 1.0


def test_three_terminal_matches_exhaustive_optimum(backend):
    g = build_grid(3, 3)
    terms = ((0, 0), (0, 2), (2, 1))
    expected = brute_force_steiner(g, g.weight, terms)
    assert expected == 4.0
    t = route_net(g, EffectiveCosts(g), Net(1, terms))
    assert t.cost == expected
    assert tree_problems(t, terms) == []


def test_detour_around_expensive_row(backend):
    g = build_grid(4, 4)
    lam = np.zeros(g.n_edges)
    for c in range(3):
        lam[g.edge_index((0, c), (0, c + 1))] = 99.0
    costs = EffectiveCosts(g, lam)
    expected = min(simple_path_costs(g, costs.cost, (0, 0), (3, 3)))
    assert expected == 6.0
    t = route_net(g, costs, Net(1, ((0, 0), (3, 3))))
    assert t.cost == 6.0
    assert all(a.row != 0 or b.row != 0 for a, b in t.edges)


def test_tree_cost_and_wirelength():
    g = build_grid(3, 3)
    lam = np.zeros(g.n_edges)
    e = g.edge_index((0, 0), (0, 1))
    lam[e] = 0.5
    t = tree_from_edge_ids(g, 1, [e])
    assert tree_wirelength(t, g) == 1.0
    assert tree_cost(t, EffectiveCosts(g, lam)) == 1.5


def test_tree_wirelength_mixed_weights():
    g = GridGraph(3, 3, 1.0, {((1, 1), (1, 2)): 2.0})
    ids = [g.edge_index((1, 0), (1, 1)), g.edge_index((1, 1), (1, 2)), g.edge_index((0, 1), (1, 1))]
    t = tree_from_edge_ids(g, 1, ids)
    assert tree_wirelength(t, g) == 4.0
    assert tree_cost(t, EffectiveCosts(g)) == tree_wirelength(t, g)


def test_tree_cost_unknown_edge():
    g = build_grid(3, 3)
    big = build_grid(4, 4)
    t = tree_from_edge_ids(big, 1, [big.edge_index((3, 2), (3, 3))])
    with pytest.raises(ValueError):
        tree_cost(t, EffectiveCosts(g))


def test_bad_multipliers_rejected():
    g = build_grid(3, 3)
    with pytest.raises(ValueError):
        EffectiveCosts(g, -np.ones(g.n_edges))


def test_terminal_out_of_bounds(backend):
    g = build_grid(3, 3)
    with pytest.raises(ValueError):
        route_net(g, EffectiveCosts(g), Net(1, ((0, 0), (5, 5))))


def test_zero_cost_edges_terminate(backend):
    g = build_grid(5, 5)
    costs = EffectiveCosts(g.with_weights({e: 0.0 for e in g.edges()}))
    t = route_net(costs.graph, costs, Net(1, ((0, 0), (4, 4), (2, 0), (0, 4))))
    assert tree_problems(t, ((0, 0), (4, 4), (2, 0), (0, 4))) == []
    assert t.cost == 0.0


def test_max_terminal_path():
    g = build_grid(3, 3)
    terms = ((0, 0), (0, 2), (2, 1))
    t = route_net(g, EffectiveCosts(g), Net(1, terms))
    # (0,0)-(0,1)-(0,2) plus (0,1)-(1,1)-(2,1): farthest pair is 3 apart
    assert max_terminal_path(t, terms, g) == 3.0


@st.composite
def small_case(draw, max_side=5, max_terms=4):
    rows = draw(st.integers(2, max_side))
    cols = draw(st.integers(2, max_side))
    base = build_grid(rows, cols)
    k = draw(st.integers(2, min(max_terms, rows * cols)))
    idx = draw(st.lists(st.integers(0, rows * cols - 1), min_size=k, max_size=k, unique=True))
    # zero-cost edges included on purpose
    weights = draw(st.lists(st.sampled_from([0.0, 0.5, 1.0, 1.0, 2.0, 3.0]),
                            min_size=base.n_edges, max_size=base.n_edges))
    g = base.with_weights(dict(zip(base.edges(), weights)))
    return g, EffectiveCosts(g), tuple(g.vertex(i) for i in idx)


@settings(max_examples=150, deadline=None)
@given(small_case(max_side=6, max_terms=6))
def test_tree_properties(case):
    g, costs, terms = case
    t = route_net(g, costs, Net(1, terms))
    assert tree_problems(t, terms) == []
    assert math.isclose(t.cost, tree_cost(t, costs))


@settings(max_examples=150, deadline=None)
@given(small_case(max_side=6, max_terms=2))
def test_two_terminal_optimal(case):
    g, costs, terms = case
    t = route_net(g, costs, Net(1, terms))
    assert math.isclose(t.cost, naive_shortest(g, costs.cost, *terms), abs_tol=1e-12)


@settings(max_examples=60, deadline=None)
@given(small_case(max_side=3, max_terms=4))
def test_approximation_ratio(case):
    g, costs, terms = case
    t = route_net(g, costs, Net(1, terms))
    k = len(terms)
    opt = brute_force_steiner(g, costs.cost, terms)
    assert t.cost <= 2 * (1 - 1 / k) * opt + 1e-9


@settings(max_examples=150, deadline=None)
@given(small_case(max_side=6, max_terms=5), st.data())
def test_raising_unused_edge_keeps_tree(case, data):
    g, costs, terms = case
    net = Net(1, terms)
    t = route_net(g, costs, net)
    unused = sorted(set(range(g.n_edges)) - set(t.edge_ids.tolist()))
    e = data.draw(st.sampled_from(unused))
    bump = data.draw(st.sampled_from([0.5, 1.0, 10.0]))
    lam = costs.multipliers.copy()
    lam[e] += bump
    assert route_net(g, EffectiveCosts(g, lam), net).edges == t.edges


def test_deterministic_repeat(backend):
    g = build_grid(6, 6)
    net = Net(1, ((0, 0), (5, 5), (0, 5), (5, 0), (2, 3)))
    a = route_net(g, EffectiveCosts(g), net)
    b = route_net(g, EffectiveCosts(g), net)
    assert a.edges == b.edges
