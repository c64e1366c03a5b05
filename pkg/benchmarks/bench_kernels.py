"""Compare the compiled and pure-Python routing kernels on identical workloads.

    python benchmarks/bench_kernels.py [--sizes 10x10:40,30x30:200,50x50:500] [--repeats 3]

Each row routes every net once under unit costs and checks both backends
return the same trees.
"""

import argparse
import time

import numpy as np

from lagroute import kernels
from lagroute.netlist import generate_random


def _time(fn, inst, cost, repeats):
    g = inst.grid
    ptr, terms = inst.terminal_arrays()
    out = np.zeros((inst.n_nets, g.n_vertices - 1), dtype=np.int32)
    count = np.zeros(inst.n_nets, dtype=np.int32)
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(g.nbr_vertex, g.nbr_edge, cost, ptr, terms, 0, inst.n_nets, out, count)
        best = min(best, time.perf_counter() - t0)
    return best, [out[i, :count[i]].tolist() for i in range(inst.n_nets)]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="10x10:40,30x30:200,50x50:500")
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()
    if kernels.compiled_route_block is None:
        raise SystemExit("compiled extension not built; run `pip install -e . --no-build-isolation`")

    print(f"{'instance':>16} {'cython (s)':>11} {'python (s)':>11} {'ratio':>7}  same")
    for item in args.sizes.split(","):
        dims, nets = item.split(":")
        rows, cols = (int(x) for x in dims.split("x"))
        inst = generate_random(rows, cols, int(nets), (2, 6), seed=args.seed)
        cost = np.ascontiguousarray(inst.grid.weight)
        tc, rc = _time(kernels.compiled_route_block, inst, cost, args.repeats)
        tp, rp = _time(kernels.python_route_block, inst, cost, args.repeats)
        print(f"{item:>16} {tc:11.4f} {tp:11.4f} {tp / tc:6.1f}x  {rc == rp}")


if __name__ == "__main__":
    main()
