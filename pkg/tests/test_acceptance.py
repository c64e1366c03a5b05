"""Exit criteria, one test per criterion; each prints a PASS/FAIL line."""

import dataclasses
import itertools
import math
import os
import time

import numpy as np
import pytest

from lagroute import kernels
from lagroute.lagrangian import (
    MultiplierState,
    Subgradient,
    update_deflected,
    update_primal_dual,
    update_projected,
)
from lagroute.netlist import generate_random, make_instance
from lagroute.oracle import OracleLimitError, exact_route
from lagroute.router import (
    MAX_ITERATIONS,
    RouterConfig,
    measure_speedup,
    run_fixed_w,
    run_sweep,
    unconstrained_channel_width,
)
from lagroute.steiner import EffectiveCosts, route_net, tree_problems

pytestmark = pytest.mark.slow

SUITE1_SIZE = 1000
SUITE1_BUDGET_S = 120.0
ORACLE_BUDGET_S = 600.0


def suite1_instance(seed):
    rng = np.random.default_rng(10_000 + seed)
    rows, cols = (int(x) for x in rng.integers(2, 31, size=2))
    n_nets = int(rng.integers(1, 101))
    width = int(rng.integers(1, 5))
    hi = min(6, rows * cols)
    return generate_random(rows, cols, n_nets, (2, hi), seed=seed, width=width)


@pytest.fixture(scope="module")
def suite1():
    """Route the 1000-instance suite once; criteria 1, 4 and 8 inspect it."""
    t0 = time.perf_counter()
    out = []
    for seed in range(SUITE1_SIZE):
        inst = suite1_instance(seed)
        sol = run_fixed_w(inst, RouterConfig(trace=True), inst.width)
        out.append((inst, sol))
    return out, time.perf_counter() - t0


def test_c1_tree_validity(suite1, acceptance):
    runs, elapsed = suite1
    failures = 0
    n_trees = 0
    for inst, sol in runs:
        for tree, net in zip(sol.trees, inst.nets):
            n_trees += 1
            if tree_problems(tree, net.terminals):
                failures += 1
    ok = failures == 0 and elapsed < SUITE1_BUDGET_S
    acceptance("C1 tree validity", "PASS" if ok else "FAIL",
               f"{failures} invalid of {n_trees} trees on {len(runs)} instances; routing {elapsed:.1f}s "
               f"(budget {SUITE1_BUDGET_S:.0f}s, backend {kernels.BACKEND})")
    assert failures == 0
    assert elapsed < SUITE1_BUDGET_S


def test_c2_update_algebra(acceptance):
    failures = 0
    lams = [0.0, 1e-12, 0.05, 0.5, 1.0, 10.0]
    alphas = [0.0, 0.005, 0.1, 1.0, 4.0]
    grads = [-7, -1, 0, 1, 3]
    for lam, alpha, g in itertools.product(lams, alphas, grads):
        sg = Subgradient(np.array([g]), np.array([max(g, 0)]))
        state = MultiplierState(np.array([lam]))
        pd = update_primal_dual(state, sg, alpha).lam[0]
        pj = update_projected(state, sg, alpha).lam[0]
        failures += pd != lam + alpha * max(0, g)
        failures += pj != max(0.0, lam + alpha * g)
        failures += g > 0 and pd != pj

    rng = np.random.default_rng(2024)
    n_edges = 32
    pd_state = pj_state = df_state = MultiplierState.zeros(n_edges)
    direction = None
    for _ in range(10_000):
        g = rng.integers(-6, 7, n_edges)
        sg = Subgradient(g, np.maximum(g, 0))
        alpha = float(rng.choice([0.0, rng.random() * 2, 0.01 / rng.integers(2, 60)]))
        new_pd = update_primal_dual(pd_state, sg, alpha)
        failures += int(np.any(new_pd.lam < pd_state.lam))
        pd_state = new_pd
        pj_state = update_projected(pj_state, sg, alpha)
        df_state, direction = update_deflected(df_state, sg, direction, alpha, 0.6)
        failures += int(any(np.any(s.lam < 0) for s in (pd_state, pj_state, df_state)))
    acceptance("C2 update-rule algebra", "PASS" if failures == 0 else "FAIL",
               f"{len(lams) * len(alphas) * len(grads)} grid cases + 10000 fuzzed updates x 3 rules, {failures} failures")
    assert failures == 0


def _exhaustive_cases():
    for rows, cols in ((2, 2), (2, 3), (3, 3)):
        verts = list(itertools.product(range(rows), range(cols)))
        nets = [c for k in (2, 3) for c in itertools.combinations(verts, k)]
        for net in nets:
            yield make_instance(rows, cols, 1, [net])
        for a, b in itertools.combinations_with_replacement(nets, 2):
            yield make_instance(rows, cols, 2, [a, b])


def _seeded_4x4_cases():
    seed = 0
    while True:
        rng = np.random.default_rng(500 + seed)
        n_nets = int(rng.integers(1, 4))
        yield generate_random(4, 4, n_nets, (2, 3), seed=seed, width=n_nets)
        seed += 1


def _check_against_oracle(inst, violations):
    """Compare router and heuristic with the exact optimum; False if the oracle refuses."""
    sol = run_sweep(inst, RouterConfig(w_init=inst.n_nets, w_sweep=True))
    try:
        exact = exact_route(inst, width=sol.achieved_W)
    except OracleLimitError:
        return False
    tag = inst.digest()[:12]
    base = EffectiveCosts(inst.grid)
    for net, opt in zip(inst.nets, exact.per_net_optimal):
        k = len(net.terminals)
        wl = route_net(inst.grid, base, net).wirelength
        if wl > 2 * (1 - 1 / k) * opt + 1e-9 or (k == 2 and wl != opt):
            violations.append(("ratio", tag, net.id, wl, opt))
    if sol.achieved_W < exact.min_channel_width:
        violations.append(("width", tag, sol.achieved_W, exact.min_channel_width))
    if sol.wirelength < exact.optimal_wirelength:
        violations.append(("lower bound", tag, sol.wirelength, exact.optimal_wirelength))
    if inst.n_nets == 1 and len(inst.nets[0].terminals) == 2 and sol.wirelength != exact.optimal_wirelength:
        violations.append(("2-terminal", tag, sol.wirelength, exact.optimal_wirelength))
    return True


def test_c3_oracle_equivalence(acceptance):
    t0 = time.perf_counter()
    violations = []
    exhaustive = refused_exhaustive = 0
    for inst in _exhaustive_cases():
        exhaustive += 1
        refused_exhaustive += not _check_against_oracle(inst, violations)
    seeded = drawn = 0
    for inst in _seeded_4x4_cases():
        drawn += 1
        seeded += _check_against_oracle(inst, violations)
        if seeded == 50:
            break
    elapsed = time.perf_counter() - t0
    ok = not violations and refused_exhaustive == 0 and elapsed < ORACLE_BUDGET_S
    acceptance("C3 oracle equivalence", "PASS" if ok else "FAIL",
               f"{exhaustive} exhaustive 2x2/2x3/3x3 instances + {seeded} seeded 4x4 "
               f"({drawn - seeded} draws beyond oracle limits skipped), {len(violations)} violations, "
               f"{elapsed:.1f}s (budget {ORACLE_BUDGET_S:.0f}s)")
    assert not violations, violations[:5]
    assert refused_exhaustive == 0
    assert elapsed < ORACLE_BUDGET_S


def test_c4_objective_identity(suite1, acceptance):
    runs, _ = suite1
    worst = 0.0
    failures = n_records = 0
    for inst, sol in runs:
        for rec in sol.history:
            n_records += 1
            rhs = rec.wirelength + float(np.dot(rec.lam, rec.usage.astype(np.float64) - sol.width))
            err = abs(rec.total_cost - rhs)
            worst = max(worst, err / (1 + abs(rec.total_cost)))
            failures += err > 1e-9 * (1 + abs(rec.total_cost))
    acceptance("C4 objective identity", "PASS" if failures == 0 else "FAIL",
               f"{n_records} iteration records, {failures} outside 1e-9 relative, worst {worst:.2e}")
    assert failures == 0


def test_c5_determinism(acceptance):
    diffs = 0
    for seed in range(20):
        inst = generate_random(20, 20, 80, (2, 5), seed=300 + seed)
        cfg = RouterConfig(w_init=unconstrained_channel_width(inst), w_sweep=True)
        ref = None
        for threads in (1, 2, 3, 4):
            sol = run_sweep(inst, dataclasses.replace(cfg, thread_count=threads))
            fp = (sol.metrics(), sol.edge_sets(), [[r.to_dict() for r in s.history] for s in sol.sweep])
            if ref is None:
                ref = fp
            elif fp != ref:
                diffs += 1
    acceptance("C5 determinism", "PASS" if diffs == 0 else "FAIL",
               f"20 instances x threads {{1,2,3,4}}, {diffs} differing solutions")
    assert diffs == 0


def test_c6_directional_claim(acceptance):
    proposed = RouterConfig(method="primal-dual", step="kkt", w_sweep=True)
    baseline = RouterConfig(method="projected", step="paralar", w_sweep=True)
    sum_w = {"proposed": 0, "baseline": 0}
    lower = 0
    n = 20
    for seed in range(1, n + 1):
        inst = generate_random(30, 30, 200, (2, 4), seed=seed)
        w0 = unconstrained_channel_width(inst)
        a = run_sweep(inst, dataclasses.replace(proposed, w_init=w0))
        b = run_sweep(inst, dataclasses.replace(baseline, w_init=w0))
        sum_w["proposed"] += a.achieved_W
        sum_w["baseline"] += b.achieved_W
        fixed_w = max(1, round(0.8 * w0))
        va = run_fixed_w(inst, proposed, fixed_w).total_violation
        vb = run_fixed_w(inst, baseline, fixed_w).total_violation
        lower += va < vb
    ok = sum_w["proposed"] <= sum_w["baseline"] and lower >= 0.6 * n
    acceptance("C6 primal-dual+kkt vs projected+paralar", "PASS" if ok else "FAIL",
               f"summed achieved W {sum_w['proposed']} vs {sum_w['baseline']} "
               f"({100 * (1 - sum_w['proposed'] / sum_w['baseline']):.1f}% lower); "
               f"violation at W=round(0.8*W0) strictly lower on {lower}/{n}")
    assert sum_w["proposed"] <= sum_w["baseline"]
    assert lower >= 0.6 * n


def _available_cores():
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:
        return os.cpu_count() or 1


def test_c7_speedup(acceptance):
    inst = generate_random(50, 50, 500, (2, 6), seed=7)
    w0 = unconstrained_channel_width(inst)
    cfg = RouterConfig(w_init=max(1, round(0.8 * w0)))
    rows = measure_speedup(inst, cfg, [1, 4])  # raises if 4 threads change the result
    s4 = rows[-1].speedup
    cores = _available_cores()
    detail = (f"1 thread {rows[0].wall_time:.2f}s, 4 threads {rows[-1].wall_time:.2f}s, speedup {s4:.2f}x "
              f"on {cores} core(s), metrics identical, backend {kernels.BACKEND}")
    if cores < 4 or kernels.BACKEND != "cython":
        acceptance("C7 speedup >= 2.0x", "INFO", detail + " (fewer than 4 cores or no compiled kernel: informational)")
        return
    acceptance("C7 speedup >= 2.0x", "PASS" if s4 >= 2.0 else "FAIL", detail)
    assert s4 >= 2.0


def test_c8_iteration_cap(suite1, acceptance):
    runs, _ = suite1
    worst = max(sol.iterations for _, sol in runs)
    congested = generate_random(15, 15, 120, (2, 5), seed=8)
    for method, step in itertools.product(("primal-dual", "projected", "deflected"), ("kkt", "paralar")):
        sol = run_sweep(congested, RouterConfig(method=method, step=step, w_init=2, w_sweep=True))
        worst = max([worst] + [s.iterations for s in sol.sweep])
    ok = worst <= MAX_ITERATIONS == 50
    acceptance("C8 iteration cap", "PASS" if ok else "FAIL",
               f"max iterations per W observed {worst} (cap {MAX_ITERATIONS})")
    assert ok
