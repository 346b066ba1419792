"""Circle-pair solver against the catenoid root-solve, across the Goldschmidt range.

    python scripts/run_catenoid.py --n-theta 128
"""

import argparse

import numpy as np

from vortex_plateau.plateau import (
    CatenoidError,
    catenoid_existence_limit,
    catenoid_oracle,
    goldschmidt_distance,
    solve_circle_pair,
)


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n-theta", type=int, default=128)
    p.add_argument("--d", type=float, nargs="+", default=[0.3, 0.5, 0.8, 1.0, 1.2, 1.3])
    args = p.parse_args()
    print(f"Goldschmidt distance {goldschmidt_distance():.6f}, catenoid exists up to {catenoid_existence_limit():.6f}")
    print(f"{'d':>5} {'discrete':>10} {'oracle':>10} {'rel err':>9} {'2 pi':>8} degenerate")
    for d in args.d:
        res = solve_circle_pair(d, n_theta=args.n_theta)
        try:
            ref = catenoid_oracle(d)
            err = f"{abs(res.area - ref) / ref:9.2e}"
        except CatenoidError:
            ref, err = float("nan"), "      n/a"
        print(f"{d:5.2f} {res.area:10.6f} {ref:10.6f} {err} {2 * np.pi:8.5f} {res.degenerate}")


if __name__ == "__main__":
    main()
