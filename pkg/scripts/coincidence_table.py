#!/usr/bin/env python3
"""mu(n, floor(ns), j) at growing n against the Poisson limit and the two-sided bounds."""

import argparse
import csv
import sys

from riperm.coincidence import poisson_limit_check

ap = argparse.ArgumentParser(description=__doc__)
ap.add_argument("--n", type=int, nargs="+", default=[100, 500, 2000, 8000])
ap.add_argument("--s", type=float, nargs="+", default=[0.3, 0.5, 0.8])
ap.add_argument("--jmax", type=int, default=6)
args = ap.parse_args()

w = csv.writer(sys.stdout, lineterminator="\n")
w.writerow(["n", "k", "s", "j", "mu", "poisson", "rel_error", "lower", "mu_over_lower"])
for n in args.n:
    for s in args.s:
        for j in range(args.jmax + 1):
            r = poisson_limit_check(n, s, j)
            w.writerow([n, r.k, s, j, r.mu, r.limit, r.rel_error, r.lower, r.mu / r.lower])
