"""Quadratic growth of saddle connection counts N(L) on the bundled surfaces.

Usage: python scripts/growth.py [--max-length 16] [--out results/growth]
"""

import argparse
from pathlib import Path

import numpy as np

from flatflow.report import write_table
from flatflow.saddles import enumerate_saddle_connections
from flatflow.surfacefile import load_bundled


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--max-length", type=float, default=16.0)
    ap.add_argument("--out", type=Path, default=Path("results/growth"))
    args = ap.parse_args()
    Ls = np.geomspace(2.0, args.max_length, 25)
    for name in ("l3", "octagon"):
        S = load_bundled(name)
        lengths = np.sort([c.length for c in enumerate_saddle_connections(S, args.max_length)])
        N = np.searchsorted(lengths, Ls + 1e-9, side="right")
        slope, icept = np.polyfit(np.log(Ls), np.log(N), 1)
        (args.out / name).mkdir(parents=True, exist_ok=True)
        write_table(args.out / name, "counts.csv", list(zip(Ls, N)), 0)
        print(f"{name}: N({args.max_length:g}) = {N[-1]}, log-log slope {slope:.4f}, "
              f"N(L)/L^2 -> {N[-1] / args.max_length**2:.4f}")


if __name__ == "__main__":
    main()
