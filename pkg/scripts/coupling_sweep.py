"""Coupled-chain DE thresholds over chain lengths and coupling widths.

    python3 scripts/coupling_sweep.py --model 3,6 --widths 2 3 5 --ratio 11
"""

import argparse

from scthresh.dynamics import CoupledConfig
from scthresh.models import make_ldpc_regular
from scthresh.threshold import coupled_threshold_de, potential_threshold, single_threshold_minratio


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--model", default="3,6")
    ap.add_argument("--widths", type=int, nargs="+", default=[2, 3, 5])
    ap.add_argument("--ratio", type=int, default=11, help="chain length L = ratio * w")
    ap.add_argument("--tol", type=float, default=1e-4)
    args = ap.parse_args()
    l, r = map(int, args.model.split(","))
    print(f"eps_single = {single_threshold_minratio(make_ldpc_regular(l, r)).value:.6f}")
    for folded, variant in [(False, "outside"), (True, "inside")]:
        m = make_ldpc_regular(l, r, folded=folded)
        print(f"split {'folded' if folded else 'unfolded'}: eps_potential = {potential_threshold(m).value:.6f}")
        for w in args.widths:
            cfg = CoupledConfig(args.ratio * w, w, variant)
            res = coupled_threshold_de(m, cfg, tol=args.tol)
            print(f"  variant={variant:8} L={cfg.L:4} w={w:2} eps_c in [{res.bracket[0]:.5f}, {res.bracket[1]:.5f}]")


if __name__ == "__main__":
    main()
