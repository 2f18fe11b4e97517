"""Analytic depth sweep: parameters and per-sample MACs as levels are added.

Prints two CSV tables.  The first is a uniform-base 1-D sweep (exact counts
next to the idealised bound).  The second fixes a 512x512 grid and deepens
the scheme, comparing with a SIREN of the same depth.
"""

import argparse
import sys

from asmr import coords as C
from asmr.profiler import mac_asmr, mac_siren, rows_to_csv, sweep_depth

FIXED_GRID = [[8, 8, 8], [4, 4, 4, 8], [8, 2, 2, 2, 8], [4, 2, 2, 2, 2, 8], [2, 2, 2, 2, 2, 2, 8]]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--width", type=int, default=64)
    ap.add_argument("--base", type=int, default=2)
    ap.add_argument("--max-levels", type=int, default=8)
    args = ap.parse_args(argv)

    rows = sweep_depth(args.width, args.base, range(2, args.max_levels + 1))
    sys.stdout.write(rows_to_csv(rows))
    print()
    print("bases,asmr_params,asmr_per_sample,siren_params,siren_per_sample")
    for bases in FIXED_GRID:
        widths = [2] + [256] * (len(bases) - 1) + [1]
        a = mac_asmr(widths, C.make_scheme([bases, bases]))
        s = mac_siren(widths, a.n_total)
        print(f"{'x'.join(map(str, bases))},{a.params},{a.per_sample:.1f},{s.params},{s.per_sample:.0f}")


if __name__ == "__main__":
    main()
