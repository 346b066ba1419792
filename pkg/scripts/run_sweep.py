"""Warm-started sweep of the doubled functional over l; writes a CSV.

    python scripts/run_sweep.py --lmin 0.05 --lmax 1.5 --steps 30 --n 64 --out sweep.csv
"""

import argparse
import math

from vortex_plateau.analysis import sweep


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--lmin", type=float, default=0.05)
    p.add_argument("--lmax", type=float, default=1.5)
    p.add_argument("--steps", type=int, default=30)
    p.add_argument("--n", type=int, default=64)
    p.add_argument("--out", default="sweep.csv")
    args = p.parse_args()
    recs = sweep(args.lmin, args.lmax, args.steps, n1=args.n, n2=args.n, out=args.out)
    print(f"{'l':>8} {'value':>12} {'min(2pi l,pi)':>14} degenerate")
    for r in recs:
        print(f"{r.l:8.4f} {r.value:12.8f} {min(2 * math.pi * r.l, math.pi):14.8f} {r.degenerate}")


if __name__ == "__main__":
    main()
