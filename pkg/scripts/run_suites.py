#!/usr/bin/env python3
"""Run every verification suite at a given seed, write reports, print a timing table."""

import argparse
import time

from riperm.harness import load_config, run_suite

ap = argparse.ArgumentParser(description=__doc__)
ap.add_argument("--config")
ap.add_argument("--seed", type=int)
ap.add_argument("--out", default="reports")
args = ap.parse_args()

config = load_config(args.config)
if args.seed is not None:
    config = config.with_seed(args.seed)
total = 0.0
for cfg in config.suite_configs():
    t0 = time.perf_counter()
    rep = run_suite(cfg)
    dt = time.perf_counter() - t0
    total += dt
    rep.write(args.out)
    print(f"{rep.suite:20s} {'PASS' if rep.passed else 'FAIL'} {len(rep.cases):6d} cases {dt:7.2f}s")
print(f"{'total':20s} {total:24.2f}s")
