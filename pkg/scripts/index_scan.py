"""Ball index S(lambda(l)) as a function of the radius l and of the constant c.

For each c on a grid (d = 1) the script records lambda_max, the vanishing
certificate and the ball index at a set of radii.
"""

import argparse
import csv
import math
import sys

import numpy as np

from tnut.geometry import MetricParams
from tnut.spectral import index_ball, vanishing_criterion


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--d", type=float, default=1.0)
    ap.add_argument("--c-count", type=int, default=41)
    ap.add_argument("--radii", default="0.25,0.5,0.75,0.975,1.25,2,5")
    ap.add_argument("--out", default=None)
    args = ap.parse_args()
    radii = [float(v) for v in args.radii.split(",")]
    lo = -2 * math.sqrt(args.d) * 0.9999
    cs = np.linspace(lo, -1.5 * math.sqrt(args.d), args.c_count)
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["c", "lambda_max", "vanishing"] + [f"index_l={l:g}" for l in radii])
    for c in cs:
        p = MetricParams(1.0, 1.0, float(c), args.d)
        cert = vanishing_criterion(p)
        w.writerow([repr(float(c)), repr(cert.lambda_max), int(cert.holds)]
                   + [index_ball(p, l).index for l in radii])
    if args.out:
        fh.close()


if __name__ == "__main__":
    main()
