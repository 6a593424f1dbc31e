#!/usr/bin/env python3
"""Tabulate the Gamma series for the log family phi_p across p and q, with j_max doubling."""

import argparse
import csv
import sys

from riperm.criteria import gamma
from riperm.rispaces import LogPhi, log_family_hull

ap = argparse.ArgumentParser(description=__doc__)
ap.add_argument("--p", type=float, nargs="+", default=[0.25, 0.5, 0.75, 1.0])
ap.add_argument("--q", type=float, nargs="+", default=[1.0, 2.0])
ap.add_argument("--jmax", type=int, default=400)
ap.add_argument("--hull", action="store_true", help="use the least concave majorant of phi_p")
args = ap.parse_args()

w = csv.writer(sys.stdout, lineterminator="\n")
w.writerow(["p", "q", "j_max", "value", "value_2j", "upper", "t_witness", "label"])
for p in args.p:
    phi = log_family_hull(p) if args.hull else LogPhi(p)
    for q in args.q:
        r = gamma(phi, q, j_max=args.jmax)
        r2 = gamma(phi, q, j_max=2 * args.jmax)
        w.writerow([p, q, args.jmax, r.value, r2.value, r.upper, r.t_witness, r.label])
