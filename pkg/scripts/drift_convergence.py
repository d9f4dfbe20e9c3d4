"""Conserved-set drift against integrator tolerance.

Integrates a seeded batch of geodesics for each tolerance and prints the
worst relative drift of E, q, J and K together with step counts.
"""

import argparse
import time

from tnut.dynamics import admits_bound_orbits, integrate_batch, sample_phase
from tnut.geometry import MetricParams
from tnut.suites import make_rng


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--params", default="1,1,0,1")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--count", type=int, default=10)
    ap.add_argument("--horizon", type=float, default=100.0)
    ap.add_argument("--tols", default="1e-6,1e-7,1e-8,1e-9,1e-10,1e-11,1e-12")
    args = ap.parse_args()
    params = MetricParams(*[float(v) for v in args.params.split(",")])
    rng = make_rng(args.seed)
    bound = admits_bound_orbits(params)
    phases = [sample_phase(params, rng, bound=bound) for _ in range(args.count)]
    print(f"params={params.as_dict()} bound={bound} trajectories={args.count} horizon={args.horizon}")
    print(f"{'tol':>8s} {'E':>9s} {'q':>9s} {'J':>9s} {'K':>9s} {'steps':>7s} {'time':>7s}")
    for tol in (float(v) for v in args.tols.split(",")):
        t0 = time.perf_counter()
        traj = integrate_batch(params, phases, args.horizon, tol)
        d = traj.drift
        print(f"{tol:8.0e} {d['E']:9.2e} {d['q']:9.2e} {d['J']:9.2e} {d['K']:9.2e} "
              f"{traj.steps:7d} {time.perf_counter() - t0:6.2f}s")


if __name__ == "__main__":
    main()
