"""Plot a lambda-scan trace written by ``qae solve --trace-csv``.

Draws the raw annealer energy, the refined Rayleigh energy and the
descent gain against lambda, one marker per repeat. Degenerate points
(c = 0) are left out. Needs matplotlib.

Usage::

    qae solve --matrix h.txt --trace-csv trace.csv
    python scripts/plot_trace.py trace.csv -o trace.png --exact -1.137
"""
from __future__ import annotations

import argparse
import csv

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def load_trace(path):
    with open(path, newline="") as fh:
        rows = [r for r in csv.DictReader(fh) if r["degenerate"] != "True"]
    if not rows:
        raise SystemExit(f"{path}: no non-degenerate points to plot")
    col = lambda k: np.array([float(r[k]) for r in rows])
    return {k: col(k) for k in ("lam", "repeat", "raw_energy", "energy", "raw_xi", "refined_xi")}


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("trace")
    p.add_argument("-o", "--output", default="trace.png")
    p.add_argument("--exact", type=float, help="reference ground energy (drawn as a line)")
    args = p.parse_args(argv)

    t = load_trace(args.trace)
    fig, (top, bottom) = plt.subplots(2, 1, sharex=True, figsize=(7, 6))
    top.plot(t["lam"], t["raw_energy"], "o", ms=3, alpha=0.5, label="annealer")
    top.plot(t["lam"], t["energy"], "x", ms=4, label="after descent")
    if args.exact is not None:
        top.axhline(args.exact, color="k", lw=0.8, label="exact")
    top.set_ylabel("energy")
    top.legend()
    bottom.plot(t["lam"], t["raw_xi"] - t["refined_xi"], ".", ms=4)
    bottom.set_xlabel("lambda")
    bottom.set_ylabel("xi decrease from descent")
    fig.tight_layout()
    fig.savefig(args.output, dpi=120)
    print(f"wrote {args.output}")


if __name__ == "__main__":
    main()
