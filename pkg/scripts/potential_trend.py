"""Gap between the (r/2, r) potential threshold and 1/2 as r grows.

    python3 scripts/potential_trend.py --rates 10 20 40 80
"""

import argparse

from scthresh.threshold import ldpc_potential_min, ldpc_potential_threshold


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rates", type=int, nargs="+", default=[10, 20, 40, 80])
    args = ap.parse_args()
    print(f"{'r':>4} {'0.5 - eps*':>12} {'min U(0.5)':>12} {'r * min U':>12}")
    for r in args.rates:
        gap = 0.5 - ldpc_potential_threshold(r // 2, r).value
        _, u = ldpc_potential_min(r // 2, r, 0.5)
        print(f"{r:4d} {float(gap):12.3e} {float(u):12.3e} {float(r * u):12.3e}")


if __name__ == "__main__":
    main()
