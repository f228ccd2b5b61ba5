"""Time the compiled and NumPy kernels on the fused stream + collide step.

    python benchmarks/bench_kernels.py [--dims 1 2 3 4] [--steps 5] [--threads 1]

Prints seconds per step and ns per cell for each backend, the speedup, and
the largest difference between the two backends after the timed steps.
"""
import argparse
import time

import numpy as np

from burgers_mrt import kernels
from burgers_mrt.lattice import LatticeSpec
from burgers_mrt.params import solve_fourth_order
from burgers_mrt.solver import MRTSolver

GRIDS = {1: 20000, 2: 320, 3: 80, 4: 32}


def time_backend(backend, lattice, params, shape, f0, steps, threads):
    solver = MRTSolver(lattice, params, shape, backend=backend, nthreads=threads, check_every=0)
    solver._a[...] = f0
    solver.advance(1)  # warm-up
    start = time.perf_counter()
    solver.advance(steps)
    elapsed = (time.perf_counter() - start) / steps
    return elapsed, solver._a.copy()


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dims", type=int, nargs="+", default=[1, 2, 3, 4])
    ap.add_argument("--steps", type=int, default=5)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    backends = kernels.available()
    print(f"backends: {', '.join(backends)}")
    print(f"{'d':>2} {'grid':>10} {'backend':>9} {'s/step':>10} {'ns/cell':>9} {'speedup':>8} {'max|diff|':>10}")
    rng = np.random.default_rng(args.seed)
    for d in args.dims:
        n = GRIDS[d]
        shape = (n,) * d
        lattice = LatticeSpec.build(d)
        params = solve_fourth_order(0.08 if d > 1 else 1.0, d, 0.1, 0.025)
        f0 = rng.random((lattice.q, n ** d))
        results = {b: time_backend(b, lattice, params, shape, f0, args.steps, args.threads)
                   for b in backends}
        ref_t, ref_f = results["python"]
        for b in backends:
            t, f = results[b]
            diff = float(np.abs(f - ref_f).max())
            print(f"{d:>2} {'x'.join(map(str, shape)):>10} {b:>9} {t:10.4f} {t / n ** d * 1e9:9.1f} "
                  f"{ref_t / t:8.2f} {diff:10.2e}")


if __name__ == "__main__":
    main()
