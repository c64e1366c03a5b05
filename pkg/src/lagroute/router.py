"""Sub-gradient routing loop, downward channel-width sweep and speedup runs."""

from __future__ import annotations

import dataclasses
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .lagrangian import (
    KKTOperator,
    Method,
    MultiplierState,
    StepRule,
    step_size_kkt,
    step_size_paralar,
    subgradient,
    update_deflected,
    update_primal_dual,
    update_projected,
)
from .netlist import Instance
from .steiner import EffectiveCosts, RouteTree, max_terminal_path, tree_from_edge_ids

MAX_ITERATIONS = 50


@dataclass(frozen=True)
class RouterConfig:
    method: Method = Method.PRIMAL_DUAL
    step: StepRule = StepRule.KKT
    beta: float = 0.6
    max_iterations: int = MAX_ITERATIONS
    w_init: int | None = None  # None: take the instance's width
    w_sweep: bool = False
    warm_start_lambda: bool = False
    thread_count: int = 1
    seed: int | None = None  # echoed into reports; the router itself is deterministic
    kkt_operator: KKTOperator = KKTOperator.VIOLATION
    trace: bool = False  # keep per-iteration multipliers and usage in the history

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        object.__setattr__(self, "step", StepRule(self.step))
        object.__setattr__(self, "kkt_operator", KKTOperator(self.kkt_operator))
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.w_init is not None and self.w_init < 1:
            raise ValueError("w_init must be >= 1")
        if self.thread_count < 1:
            raise ValueError("thread_count must be >= 1")
        if not 0.0 <= self.beta < 1.0:
            raise ValueError("beta must lie in [0, 1)")

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        for key in ("method", "step", "kkt_operator"):
            d[key] = d[key].value
        return d

    @classmethod
    def from_dict(cls, d: dict) -> RouterConfig:
        names = {f.name for f in dataclasses.fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in names})


@dataclass(frozen=True)
class IterationRecord:
    k: int
    alpha: float
    total_cost: float
    wirelength: float
    channel_width: int
    total_violation: int
    lam: np.ndarray | None = field(default=None, repr=False, compare=False)
    usage: np.ndarray | None = field(default=None, repr=False, compare=False)

    def to_dict(self) -> dict:
        return {"k": self.k, "alpha": self.alpha, "total_cost": self.total_cost,
                "wirelength": self.wirelength, "channel_width": self.channel_width,
                "total_violation": self.total_violation}


@dataclass(frozen=True)
class RoutingSolution:
    trees: tuple[RouteTree, ...]
    width: int
    wirelength: float
    channel_width: int
    total_violation: int
    delay_proxy: float
    history: tuple[IterationRecord, ...]
    best_iteration: int
    achieved_W: int | None
    multipliers: np.ndarray = field(repr=False)
    infeasible_at_w_init: bool = False
    sweep: tuple[RoutingSolution, ...] = field(default=(), repr=False)

    @property
    def iterations(self) -> int:
        return len(self.history)

    def metrics(self) -> dict:
        return {"wirelength": self.wirelength, "channel_width": self.channel_width,
                "total_violation": self.total_violation, "delay_proxy": self.delay_proxy,
                "achieved_W": self.achieved_W}

    def edge_sets(self) -> tuple:
        return tuple(t.edges for t in self.trees)


class _Workload:
    """Routes every net of an instance under a cost vector, optionally in parallel."""

    def __init__(self, instance: Instance, threads: int, route_block=None):
        self.grid = instance.grid
        self.n_nets = instance.n_nets
        self.term_ptr, self.terms = instance.terminal_arrays()
        self.out = np.zeros((self.n_nets, self.grid.n_vertices - 1), dtype=np.int32)
        self.count = np.zeros(self.n_nets, dtype=np.int32)
        self.route_block = route_block or kernels.route_block
        self.threads = threads
        # several blocks per worker so uneven nets balance out
        n_blocks = 1 if threads == 1 else min(self.n_nets, threads * 8)
        edges = np.linspace(0, self.n_nets, n_blocks + 1).astype(int)
        self.blocks = [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]
        self.pool = ThreadPoolExecutor(threads) if threads > 1 else None

    def close(self):
        if self.pool is not None:
            self.pool.shutdown()

    def route(self, cost: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(flat, counts)``: every net's sorted edge ids concatenated in net order."""
        g = self.grid
        args = (g.nbr_vertex, g.nbr_edge, cost, self.term_ptr, self.terms)
        if self.pool is None:
            self.route_block(*args, 0, self.n_nets, self.out, self.count)
        else:
            futures = [self.pool.submit(self.route_block, *args, lo, hi, self.out, self.count)
                       for lo, hi in self.blocks]
            for f in futures:
                f.result()
        counts = self.count.copy()
        mask = np.arange(self.out.shape[1]) < counts[:, None]
        return self.out[mask], counts


def _same_trees(a, b) -> bool:
    return b is not None and np.array_equal(a[1], b[1]) and np.array_equal(a[0], b[0])


def _lex_key(rec: IterationRecord):
    return (rec.total_violation, rec.channel_width, rec.wirelength)


def run_fixed_w(instance: Instance, config: RouterConfig, width: int, initial_lambda=None,
                *, _workload: _Workload | None = None) -> RoutingSolution:
    """Sub-gradient iterations at a fixed channel width.

    Every iteration routes all nets under frozen ``w_e + lambda_e``, measures
    usage and updates the multipliers.  Stops after ``max_iterations`` or once
    the routing is violation-free and unchanged from the previous iteration.
    The best iterate by (violation, channel width, wirelength) is returned.
    """
    if width < 1:
        raise ValueError(f"channel width must be >= 1, got {width}")
    grid = instance.grid
    weight = np.asarray(grid.weight)
    work = _workload or _Workload(instance, config.thread_count)
    lam0 = np.zeros(grid.n_edges) if initial_lambda is None else np.array(initial_lambda, dtype=np.float64)
    state = MultiplierState(lam0)
    direction = None
    history = []
    best = None
    prev_trees = None
    try:
        for _ in range(config.max_iterations):
            lam = state.lam
            cost = np.ascontiguousarray(weight + lam)
            trees = work.route(cost)
            flat = trees[0]
            usage = np.bincount(flat, minlength=grid.n_edges)
            sg = subgradient(usage, width)
            wirelength = math.fsum(weight[flat])
            total_cost = math.fsum(cost[flat]) - width * math.fsum(lam)

            if config.step is StepRule.KKT:
                alpha = step_size_kkt(state.k, sg, config.kkt_operator)
            else:
                alpha = step_size_paralar(state.k)
            rec = IterationRecord(
                k=state.k, alpha=alpha, total_cost=total_cost, wirelength=wirelength,
                channel_width=int(usage.max()) if len(usage) else 0,
                total_violation=sg.total_violation,
                lam=lam.copy() if config.trace else None,
                usage=usage.copy() if config.trace else None,
            )
            history.append(rec)
            if best is None or _lex_key(rec) < _lex_key(best[0]):
                best = (rec, trees, lam)

            if rec.total_violation == 0 and _same_trees(trees, prev_trees):
                break
            prev_trees = trees

            if config.method is Method.PRIMAL_DUAL:
                state = update_primal_dual(state, sg, alpha)
            elif config.method is Method.PROJECTED:
                state = update_projected(state, sg, alpha)
            else:
                state, direction = update_deflected(state, sg, direction, alpha, config.beta)
    finally:
        if _workload is None:
            work.close()

    rec, (flat, counts), lam = best
    trees = np.split(flat, np.cumsum(counts)[:-1])
    costs = EffectiveCosts(grid, lam)
    route_trees = tuple(tree_from_edge_ids(grid, net.id, ids, costs) for net, ids in zip(instance.nets, trees))
    delay = max(max_terminal_path(t, net.terminals, grid) for t, net in zip(route_trees, instance.nets))
    return RoutingSolution(
        trees=route_trees, width=width, wirelength=rec.wirelength,
        channel_width=rec.channel_width, total_violation=rec.total_violation,
        delay_proxy=delay, history=tuple(history), best_iteration=rec.k,
        achieved_W=width if rec.total_violation == 0 else None,
        multipliers=state.lam,
    )


def run_sweep(instance: Instance, config: RouterConfig) -> RoutingSolution:
    """Route at ``w_init`` and keep lowering W by one while routing stays violation-free.

    Returns the solution at the smallest feasible W; ``sweep`` holds every
    per-W run.  If ``w_init`` itself is infeasible the best-effort solution is
    returned with ``infeasible_at_w_init`` set.
    """
    width = config.w_init if config.w_init is not None else instance.width
    work = _Workload(instance, config.thread_count)
    runs = []
    try:
        sol = run_fixed_w(instance, config, width, _workload=work)
        runs.append(sol)
        if sol.total_violation > 0:
            return dataclasses.replace(sol, infeasible_at_w_init=True, sweep=tuple(runs))
        best = sol
        while width > 1:
            width -= 1
            init = best.multipliers if config.warm_start_lambda else None
            sol = run_fixed_w(instance, config, width, init, _workload=work)
            runs.append(sol)
            if sol.total_violation > 0:
                break
            best = sol
    finally:
        work.close()
    return dataclasses.replace(best, sweep=tuple(runs))


def solve(instance: Instance, config: RouterConfig) -> RoutingSolution:
    """Dispatch on ``config.w_sweep``."""
    if config.w_sweep:
        return run_sweep(instance, config)
    width = config.w_init if config.w_init is not None else instance.width
    return run_fixed_w(instance, config, width)


@dataclass(frozen=True)
class SpeedupRow:
    threads: int
    wall_time: float
    speedup: float


class DeterminismError(RuntimeError):
    pass


def measure_speedup(instance: Instance, config: RouterConfig, thread_counts, repeats: int = 1) -> list[SpeedupRow]:
    """Wall time of the same workload per thread count, relative to one thread.

    speedup = time(1 thread) / time(n threads).  Raises ``DeterminismError``
    if any thread count yields different metrics or trees.
    """
    thread_counts = [int(n) for n in thread_counts]
    if not thread_counts or min(thread_counts) < 1:
        raise ValueError("thread counts must be a nonempty list of integers >= 1")
    times = {}
    reference = None
    for n in dict.fromkeys([1] + thread_counts):
        cfg = dataclasses.replace(config, thread_count=n)
        elapsed = math.inf
        for _ in range(max(1, repeats)):
            t0 = time.perf_counter()
            sol = solve(instance, cfg)
            elapsed = min(elapsed, time.perf_counter() - t0)
        times[n] = elapsed
        fingerprint = (sol.metrics(), sol.edge_sets())
        if reference is None:
            reference = fingerprint
        elif fingerprint != reference:
            raise DeterminismError(f"{n} threads produced a different routing than 1 thread")
    return [SpeedupRow(n, times[n], times[1] / times[n]) for n in thread_counts]


def unconstrained_channel_width(instance: Instance) -> int:
    """Channel width of routing every net alone under the base weights.

    The first sub-gradient iteration reproduces this routing, so a sweep
    started here is feasible at its first W.
    """
    work = _Workload(instance, 1)
    flat, _ = work.route(np.ascontiguousarray(instance.grid.weight))
    return int(np.bincount(flat, minlength=instance.grid.n_edges).max())
