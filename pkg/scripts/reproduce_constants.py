"""Print the single-system and potential thresholds of regular LDPC ensembles.

    python3 scripts/reproduce_constants.py [--pairs 3,6 4,8 5,10]
"""

import argparse

from scthresh.models import make_ldpc_regular
from scthresh.threshold import potential_threshold, single_threshold_de, single_threshold_minratio


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--pairs", nargs="+", default=["3,6", "4,8", "5,10"])
    args = ap.parse_args()
    print(f"{'(l,r)':>8} {'eps_minratio':>14} {'witness':>10} {'eps_de':>12} {'eps_potential':>14}")
    for pair in args.pairs:
        l, r = map(int, pair.split(","))
        m = make_ldpc_regular(l, r)
        mr = single_threshold_minratio(m)
        de = single_threshold_de(m, 1e-7)
        pot = potential_threshold(m, tol=1e-7)
        print(f"{pair:>8} {mr.value:14.8f} {mr.witness:10.6f} {de.value:12.7f} {pot.value:14.7f}")


if __name__ == "__main__":
    main()
