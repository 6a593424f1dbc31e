#!/usr/bin/env python3
"""Almost-convexity census for a list of Orlicz functions; one row per (M, m)."""

import argparse
import csv
import sys

from riperm.criteria import almost_convex_census
from riperm.rispaces import parse_mfunc

ap = argparse.ArgumentParser(description=__doc__)
ap.add_argument("--M", nargs="+", default=["power:1", "power:2", "power:3", "exp_p:0.5",
                                             "staircase:2:8"])
ap.add_argument("--a", type=float, default=2.0)
ap.add_argument("--b", type=float, default=2.0)
ap.add_argument("--p", type=int, default=1)
ap.add_argument("--n", type=int, nargs=2, default=[-64, 64])
ap.add_argument("--m", type=int, nargs=2, default=[1, 12])
args = ap.parse_args()

w = csv.writer(sys.stdout, lineterminator="\n")
w.writerow(["M", "m", "violations", "allowed", "verdict"])
for spec in args.M:
    cen = almost_convex_census(parse_mfunc(spec), args.a, args.b, args.p, tuple(args.n), tuple(args.m))
    for m, count in cen.counts.items():
        w.writerow([spec, m, count, args.b ** m, cen.verdict])
