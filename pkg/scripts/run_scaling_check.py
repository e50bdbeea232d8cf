#!/usr/bin/env python3
"""Measure how fit time grows with graph size at fixed density.

Runs a capped, fixed workload (tolerances set unreachably small so every
size executes the same number of cycles and sweeps) over a ladder of
vertex counts, then times one realistic sparse fit at N=605 with Q=22
from a k-means + Ward initialization.

Timing uses process CPU time and takes, for each size, the floor over
short batches interleaved across the whole ladder.  On a shared host the
floor of interleaved batches is far more repeatable than any average:
scheduler steal only ever inflates a reading, and interleaving means a
quiet window benefits every size equally.

  python scripts/run_scaling_check.py
  python scripts/run_scaling_check.py --sizes 200,400 --density 0.6 --q 2
"""

import argparse
import time

import numpy as np

from sbmvb.engine import FitOptions, Priors, fit
from sbmvb.generate import SbmParams, affiliation_matrix, sample_sbm
from sbmvb.graph import Graph
from sbmvb.initializers import kmeans_then_ward, labels_to_resp


def fixed_density_graph(n: int, density: float, rng) -> Graph:
    draws = rng.random((n, n)) < density
    np.fill_diagonal(draws, False)
    upper = np.triu(draws, k=1)
    return Graph((upper | upper.T).astype(np.uint8))


def batch_cpu_seconds(g: Graph, q: int, init, opts: FitOptions, runs: int) -> float:
    """Per-fit process CPU time averaged over one batch of identical fits."""
    priors = Priors.jeffreys(q)
    start = time.process_time()
    for _ in range(runs):
        fit(g, q, priors, init, opts)
    return (time.process_time() - start) / runs


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="100,200,400,800")
    parser.add_argument("--density", type=float, default=0.6)
    parser.add_argument("--q", type=int, default=2)
    parser.add_argument("--cycles", type=int, default=8)
    parser.add_argument("--sweeps", type=int, default=5)
    parser.add_argument("--batches", type=int, default=10,
                        help="interleaved batches per size; the floor is reported")
    parser.add_argument("--batch-seconds", type=float, default=0.12,
                        help="target CPU seconds per batch")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--skip-sparse-demo", action="store_true")
    args = parser.parse_args()

    sizes = [int(t) for t in args.sizes.split(",")]
    opts = FitOptions(
        elbo_tol=1e-300, resp_tol=1e-300, max_cycles=args.cycles, max_sweeps=args.sweeps
    )
    rng = np.random.default_rng(args.seed)

    graphs, inits, runs_per_batch = {}, {}, {}
    for n in sizes:
        graphs[n] = fixed_density_graph(n, args.density, rng)
        inits[n] = labels_to_resp(rng.integers(0, args.q, size=n), args.q)
        # warm pass (JIT + caches), then size the batch to the CPU budget
        batch_cpu_seconds(graphs[n], args.q, inits[n], opts, 1)
        probe = batch_cpu_seconds(graphs[n], args.q, inits[n], opts, 3)
        runs_per_batch[n] = max(2, int(args.batch_seconds / probe))

    floors = {n: [] for n in sizes}
    for _ in range(args.batches):
        for n in sizes:
            floors[n].append(
                batch_cpu_seconds(graphs[n], args.q, inits[n], opts, runs_per_batch[n])
            )

    print(f"fixed workload: {args.cycles} cycles x {args.sweeps} sweeps, "
          f"density {args.density}, Q={args.q}, "
          f"floor of {args.batches} interleaved batches")
    print(f"{'N':>6}  {'sec/fit':>10}  {'vs prev':>8}")
    prev = None
    for n in sizes:
        per_fit = min(floors[n])
        ratio = f"{per_fit / prev:8.2f}" if prev else "       -"
        print(f"{n:>6}  {per_fit:>10.5f}  {ratio}")
        prev = per_fit

    if not args.skip_sparse_demo:
        conn = affiliation_matrix(22, 0.12, 0.0045)
        g, _ = sample_sbm(SbmParams.equal_proportions(conn), 605, seed=args.seed)
        edges = int(g.adj.sum()) // 2
        init = kmeans_then_ward(g, 22, k=40)
        start = time.perf_counter()
        result = fit(g, 22, init_resp=init)
        elapsed = time.perf_counter() - start
        print(f"\nsparse demo: N=605, Q=22, {edges} edges -> "
              f"{elapsed:.2f}s, converged={result.converged}, "
              f"{result.iterations} cycles")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
