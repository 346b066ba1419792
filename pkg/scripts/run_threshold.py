"""Bisect the connected/degenerate switch on a sequence of doubled grids.

    python scripts/run_threshold.py --grids 32 64 128 --tol 0.02
"""

import argparse
import json

from vortex_plateau.analysis import threshold_bisect


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--grids", type=int, nargs="+", default=[32, 64])
    p.add_argument("--lo", type=float, default=0.5)
    p.add_argument("--hi", type=float, default=4.0)
    p.add_argument("--tol", type=float, default=0.02)
    p.add_argument("--out", default="threshold_grids.json")
    args = p.parse_args()
    results = {}
    prev = None
    for n in args.grids:
        r = threshold_bisect(args.lo, args.hi, args.tol, n1=n, n2=n)
        shift = "" if prev is None else f"  shift {r.midpoint - prev:+.4f}"
        print(f"n={n:4d}  [{r.lo:.6f}, {r.hi:.6f}]  midpoint {r.midpoint:.6f}{shift}")
        results[n] = r.to_json()
        prev = r.midpoint
    with open(args.out, "w") as fh:
        json.dump(results, fh, indent=2)


if __name__ == "__main__":
    main()
