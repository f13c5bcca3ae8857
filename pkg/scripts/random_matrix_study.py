"""Where the accuracy goes on random dense 8x8 matrices.

For each seeded instance (the same seeds as the accuracy acceptance test)
this prints the relative ground-energy error of

* ``relaxed``:  the best Rayleigh quotient over the lambda grid when xi is
  minimized over the continuous box [-1, 1]^N (multistart L-BFGS-B). No
  sampler working on this grid can do better, up to the 2^(1-K) rounding.
* ``pipeline``: the full annealing pipeline on the default bracket.
* ``tight``:    the pipeline on a grid of the same size centred on the exact
  ground energy (an oracle bracket of +-``--tight-half``).

Usage::

    python scripts/random_matrix_study.py --instances 5 --sweeps 10
"""
from __future__ import annotations

import argparse
import time

import numpy as np
from scipy.optimize import minimize

from qae import AnnealSchedule, CiHamiltonian, EncodingConfig, QaeConfig, default_lambda_bracket, run_qae
from qae.errors import NoSolutionError


def random_symmetric(n, rng):
    a = rng.uniform(-1.0, 1.0, (n, n))
    return np.triu(a) + np.triu(a, 1).T


def box_minimizer(a, rng, starts=30):
    n = a.shape[0]
    best = None
    for _ in range(starts):
        r = minimize(lambda c: c @ a @ c, rng.uniform(-1, 1, n), jac=lambda c: 2 * a @ c,
                     bounds=[(-1, 1)] * n, method="L-BFGS-B",
                     options={"ftol": 1e-15, "gtol": 1e-12})
        if best is None or r.fun < best.fun:
            best = r
    return best.x


def relaxed_error(m, grid, e0, rng):
    best = np.inf
    for lam in grid:
        c = box_minimizer(m - lam * np.eye(len(m)), rng)
        if np.linalg.norm(c) > 1e-8:
            best = min(best, c @ m @ c / (c @ c))
    return (best - e0) / abs(e0)


def pipeline_error(h, lo, hi, args, seed, e0):
    cfg = QaeConfig(lo, hi, lambda_points=args.points, repeats=args.repeats,
                    encoding=EncodingConfig(args.k_bits),
                    schedule=AnnealSchedule(sweeps=args.sweeps, reads=args.reads, seed=seed))
    try:
        return (run_qae(h, cfg).best_energy - e0) / abs(e0)
    except NoSolutionError:
        return float("nan")


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--instances", type=int, default=5)
    p.add_argument("--seed-base", type=int, default=4000)
    p.add_argument("--points", type=int, default=51)
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--reads", type=int, default=1000)
    p.add_argument("--sweeps", type=int, default=10)
    p.add_argument("--k-bits", type=int, default=10)
    p.add_argument("--tight-half", type=float, default=0.05)
    p.add_argument("--skip-relaxed", action="store_true")
    args = p.parse_args(argv)

    print(f"{'inst':>4} {'E0':>9} {'gap':>6} {'step':>6} {'relaxed':>9} {'pipeline':>9} {'tight':>9} {'sec':>5}")
    for inst in range(args.instances):
        t0 = time.perf_counter()
        m = random_symmetric(8, np.random.default_rng(args.seed_base + inst))
        w = np.linalg.eigvalsh(m)
        e0 = w[0]
        h = CiHamiltonian(m)
        lo, hi = default_lambda_bracket(h)
        grid = np.linspace(lo, hi, args.points)
        relaxed = float("nan") if args.skip_relaxed else relaxed_error(m, grid, e0, np.random.default_rng(inst))
        full = pipeline_error(h, lo, hi, args, inst, e0)
        tight = pipeline_error(h, e0 - args.tight_half, e0 + args.tight_half, args, inst, e0)
        print(f"{inst:>4} {e0:9.5f} {w[1] - w[0]:6.3f} {grid[1] - grid[0]:6.3f} "
              f"{relaxed:9.2e} {full:9.2e} {tight:9.2e} {time.perf_counter() - t0:5.1f}")


if __name__ == "__main__":
    main()
