"""Sup-norm gap between the anchored chain and its continuum limit as w grows.

    python3 scripts/continuum_convergence.py --alpha 4 --epsilon 0.5 --widths 2 4 8 16
"""

import argparse

from scthresh.continuum import compare_with_chain
from scthresh.models import make_ldpc_regular


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--alpha", type=float, default=4.0)
    ap.add_argument("--epsilon", type=float, default=0.5)
    ap.add_argument("--widths", type=int, nargs="+", default=[2, 4, 8, 16])
    ap.add_argument("--mesh", type=int, default=64)
    args = ap.parse_args()
    m = make_ldpc_regular(3, 6)
    print(f"{'w':>4} {'L':>5} {'sup gap':>10} {'2/w':>8} {'chain max':>10} {'continuum max':>14}")
    for w in args.widths:
        rep, _, _ = compare_with_chain(m, args.alpha, w, args.epsilon, mesh=args.mesh)
        print(
            f"{w:4d} {rep['L']:5d} {rep['sup_gap']:10.4f} {rep['bound']:8.4f} "
            f"{rep['chain_max']:10.4f} {rep['continuum_max']:14.4f}"
        )


if __name__ == "__main__":
    main()
