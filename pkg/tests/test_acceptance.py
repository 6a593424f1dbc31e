"""Acceptance criteria, one test per criterion, each emitting a single PASS/FAIL line.

The suite-level criteria share one timed run of every verification suite at the
default configuration (seed 20240601).
"""

import math
import time
from collections import defaultdict

import numpy as np
import pytest

from riperm.coincidence import (b_table, factorial, fixed_point_concavity,
                                fixed_point_tail_inequalities, mu_exact, poisson_limit_check,
                                upper_bound_violations)
from riperm.criteria import gamma
from riperm.harness import RunConfig, run_all, run_suite
from riperm.harness.corpora import all_qn, general_corpus, random_pn_integer, stream
from riperm.permops import all_permutations, tq_norm, tq_norm_mc, tq_values
from riperm.rispaces import LogPhi, parse_space
from riperm.stepcore import vector_majorizes

SEED = 20240601


@pytest.fixture(scope="module")
def suites():
    """Run each suite once at the default configuration; keep report and wall time."""
    out = {}
    for cfg in RunConfig(seed=SEED).suite_configs():
        t0 = time.perf_counter()
        rep = run_suite(cfg)
        out[cfg.suite] = (rep, time.perf_counter() - t0)
    return out


def _cases(rep, *fragments):
    return [c for c in rep.cases if any(f in c.criterion for f in fragments)]


def _violations(cases):
    return [c.case for c in cases if not c.passed]


def test_mean_max_exact_constants(suites, verdict):
    rep, dt = suites["mean_max"]
    cases = _cases(rep, "lower 1/(2n)", "upper 1/n")
    lo, hi = rep.config["n_range"]
    bad = _violations(cases)
    ok = not bad and dt < 30 and (lo, hi) == (2, 7) and rep.config["tolerance"] == 1e-12
    verdict(1, "mean-max between (1/2n) and (1/n) times the top-n sum",
            ok, f"{len(cases)} checks, n in {lo}..{hi}, {len(bad)} violations, {dt:.1f}s")


def test_moment_bounds(suites, verdict):
    rep, dt = suites["moment_bounds"]
    cases = _cases(rep, "lower 1/10", "upper 1")
    pairs = {c.criterion.split("(")[-1] for c in cases}
    bad = _violations(cases)
    ok = not bad and dt < 60 and len(pairs) == 4
    verdict(2, "L_p moment of T_q x within [1/10, 1] of head + tail", ok,
            f"{len(cases)} checks over {len(pairs)} (p,q) pairs, {len(bad)} violations, {dt:.1f}s")


def test_operator_two_sided_bound(suites, verdict):
    rep, _ = suites["operator_bounds"]
    cases = _cases(rep, "two-sided lower 1/2", "two-sided upper 1")
    spaces = {c.case.rsplit("@", 1)[1] for c in cases}
    tight = _cases(rep, "two-sided lower bound attained")
    tight_ok = len(tight) == 1 and abs(tight[0].lhs - tight[0].rhs) <= 1e-12
    bad = _violations(cases)
    ok = not bad and tight_ok and len(spaces) == 6
    verdict(3, "T_q x between 1/2 and 1 times Ux + tail on the space grid", ok,
            f"{len(cases)} checks on {len(spaces)} spaces, {len(bad)} violations; "
            f"I_2 in L_1 gap {abs(tight[0].lhs - tight[0].rhs):.1e}")


def test_operator_lower_twelfth(suites, verdict):
    rep, _ = suites["operator_bounds"]
    cases = _cases(rep, "Ux/12 lower")
    qs = {c.extra.get("q") for c in cases}
    bad = _violations(cases)
    verdict(4, "T_q x dominates Ux/12 for q in {1, 2}", not bad and qs == {1.0, 2.0},
            f"{len(cases)} checks, {len(bad)} violations")


def _t1_laws(mats: np.ndarray, perms: np.ndarray) -> np.ndarray:
    """T_1 values for a batch of integer matrices: shape (batch, n!)."""
    n = perms.shape[1]
    acc = np.zeros((mats.shape[0], perms.shape[0]), dtype=np.int64)
    for i in range(n):
        acc += mats[:, i, perms[:, i]]
    return acc


def test_t1_law_majorized_by_identity(verdict):
    details, ok = [], True
    for n in range(1, 6):
        perms = all_permutations(n)
        ident = (perms == np.arange(n)).sum(axis=1).astype(np.int64)
        qn = all_qn(n)
        good = vector_majorizes(np.broadcast_to(ident, (len(qn), len(ident))), _t1_laws(qn, perms))
        ok &= bool(np.all(good))
        details.append(f"|Q_{n}|={len(qn)}")
    assert len(all_qn(5)) == 53130
    denom = 10 ** 6
    for n in range(1, 7):
        perms = all_permutations(n)
        ident = (perms == np.arange(n)).sum(axis=1).astype(np.int64) * denom
        rng = stream(SEED, "acceptance-pn", n)
        mats = np.stack([random_pn_integer(n, denom, rng) for _ in range(500)])
        good = vector_majorizes(np.broadcast_to(ident, (500, len(ident))), _t1_laws(mats, perms))
        ok &= bool(np.all(good))
    verdict(5, "T_1 law of every Q_n matrix (n <= 5) and 500 random P_n matrices (n <= 6) "
               "majorized by that of I_n", ok, ", ".join(details) + ", integer arithmetic")


def test_fixed_point_profile_concavity(verdict):
    worst, worst_bp, bad_tails = 0.0, 0.0, []
    for n in range(2, 61):
        for a in np.arange(1, 10) / 10:
            c = fixed_point_concavity(n, float(a))
            worst, worst_bp = max(worst, c.max_ratio), max(worst_bp, c.max_ratio_at_breakpoints)
        t = fixed_point_tail_inequalities(n)
        if t["tail_violations"] or t["weighted_tail_violations"]:
            bad_tails.append(n)
    ok = worst <= 6 and worst_bp <= 3 and not bad_tails
    verdict(6, "fixed-point profile concavity ratio <= 6 (<= 3 at breakpoints), exact tail "
               "inequalities, n <= 60", ok,
            f"max ratio {worst:.4f}, at breakpoints {worst_bp:.4f}, tail failures at n={bad_tails}")


def test_coincidence_bounds(verdict):
    upper_bad = upper_bound_violations(80, [0.3, 0.5, 0.8])
    lower_bad, poisson_bad, worst = [], [], 0.0
    for s in (0.3, 0.5, 0.8):
        for j in range(0, 7):
            r = poisson_limit_check(2000, s, j)
            if r.mu < 0.99 * r.lower:
                lower_bad.append((s, j))
            worst = max(worst, r.rel_error)
            if r.rel_error > 0.01:
                poisson_bad.append((s, j, round(r.rel_error, 4)))
    ok = not upper_bad and not lower_bad and not poisson_bad
    verdict(7, "coincidence probabilities: exact upper bound n <= 80, lower bound and Poisson "
               "limit within 1% at n = 2000", ok,
            f"upper violations {len(upper_bad)}, lower failures {lower_bad}, "
            f"Poisson max rel. error {worst:.4f}, over 1%: {poisson_bad}")


def _brute_counts(n):
    counts = defaultdict(int)
    for p in all_permutations(n):
        hits = np.cumsum(p == np.arange(n))
        counts[(0, 0)] += 1
        for k in range(1, n + 1):
            counts[(k, int(hits[k - 1]))] += 1
    return counts


def test_coincidence_oracle(verdict):
    mismatches = 0
    for n in range(1, 8):
        counts = _brute_counts(n)
        for k in range(n + 1):
            for j in range(k + 1):
                mismatches += mu_exact(n, k, j) * factorial(n) != counts.get((k, j), 0)
    sums = defaultdict(int)
    for n, k, j, B in b_table(200):
        sums[(n, k)] += B
    bad_sums = [key for key, v in sums.items() if v != factorial(key[0])]
    verdict(8, "mu_exact equals brute force over S_n (n <= 7); rows sum to 1 (n <= 200)",
            mismatches == 0 and not bad_sums,
            f"{mismatches} mismatches, {len(bad_sums)} rows not summing to 1")


def test_lorentz_gamma_bound(suites, verdict):
    rep, _ = suites["lorentz_criterion"]
    bound = _cases(rep, "measured diagonal constant <= Gamma")
    linear = _cases(rep, "Gamma(t, 1) = e - 1")
    reported = _cases(rep, "qe sup")
    ok = (len(bound) == 2 and not _violations(bound) and len(linear) == 1
          and abs(linear[0].lhs - (math.e - 1)) <= 1e-6)
    detail = "; ".join(f"{c.case}: C={c.lhs:.4f} <= Gamma={c.rhs:.4f}" for c in bound)
    detail += "; reported " + ", ".join(f"Gamma={c.lhs:.3f} vs 1.5 qe sup={c.rhs:.3f}" for c in reported)
    detail += f"; Gamma(t,1) - (e-1) = {linear[0].lhs - (math.e - 1):.1e}" if linear else ""
    verdict(9, "diagonal Lorentz constant below Gamma; Gamma(t, 1) = e - 1", ok, detail)


def test_gamma_convergence_split(suites, verdict):
    rep, _ = suites["lorentz_criterion"]
    stable = _cases(rep, "stable under j_max doubling")
    stable_ok = len(stable) == 2 and all(abs(c.lhs - c.rhs) <= 1e-9 for c in stable)
    div = gamma(LogPhi(1.0), 1.0, j_max=10 ** 6, tail=False, refine=False)
    ok = stable_ok and div.diverged
    verdict(10, "Gamma stable under j_max doubling for p < q; partial sums exceed 1e3 "
                "for p = q within j_max = 1e6", ok,
            f"doubling gaps {[f'{abs(c.lhs - c.rhs):.1e}' for c in stable]}; p = q = 1: "
            f"max partial sum {div.max_partial_sum:.3f} at t = {div.t_witness:.3g}, "
            f"diverged flag {div.diverged}")


def test_diagonal_reduction_factor(suites, verdict):
    rep, _ = suites["diagonal_reduction"]
    cases = _cases(rep, "C_full <= 7 C_diag")
    worst = max(c.lhs / c.rhs * 7 for c in cases)
    verdict(11, "general constant at most 7 times the diagonal constant", not _violations(cases)
            and len(cases) == 12, f"{len(cases)} (space, q) cells, worst C_full/C_diag {worst:.3f}")


def test_lp_diagonal_constant(suites, verdict):
    rep, _ = suites["lorentz_criterion"]
    cases = _cases(rep, "20(a+1)p")
    verdict(12, "L_p diagonal constant at most 20(a+1)p for p in {2, 4}",
            len(cases) == 2 and not _violations(cases),
            ", ".join(f"{c.case}: {c.lhs:.4f} <= {c.rhs:g}" for c in cases))


def test_monte_carlo_consistency(verdict):
    E = parse_space("lp:1")
    mats = [x for _, x in general_corpus(6, 50, SEED, name="acceptance-mc")][:50]
    worst, bad = 0.0, []
    for i, x in enumerate(mats):
        for q in (1.0, 2.0, math.inf):
            exact = tq_norm(x, q, E)
            est = tq_norm_mc(x, q, E, samples=100_000, seed=SEED + i)
            slack = 1e-12 * max(1.0, abs(exact))
            z = abs(est.value - exact) / est.se if est.se > 0 else 0.0
            worst = max(worst, z)
            if abs(est.value - exact) > 4 * est.se + slack:
                bad.append((i, q))
    same = all(tq_norm_mc(x, 2.0, E, samples=100_000, seed=SEED, workers=1)
               == tq_norm_mc(x, 2.0, E, samples=100_000, seed=SEED, workers=8) for x in mats[:5])
    verdict(13, "Monte Carlo within 4 bootstrap SE of exact; worker count does not change results",
            not bad and same, f"150 estimates, max |z| {worst:.2f}, outside 4 SE: {bad}, "
                              f"1 vs 8 workers identical: {same}")


PINNED_SEQUENCE_LOWER = {"linf": 0.25, "l1": 0.5, "l2": 0.35355, "head2": 0.41667,
                         "three_index": 0.78914}


def test_sequence_space_constants(suites, verdict):
    rep, _ = suites["sequence_spaces"]
    consts = rep.summary["constants"]
    drift = {X: consts[X]["lower"] / pin - 1 for X, pin in PINNED_SEQUENCE_LOWER.items()}
    per_n = defaultdict(lambda: [math.inf, 0.0])
    for c in _cases(rep, "lower bound with measured c"):
        key = (c.extra["X"], c.extra["n"])
        per_n[key][0] = min(per_n[key][0], c.extra["ratio"])
        per_n[key][1] = max(per_n[key][1], c.extra["ratio"])
    for c in _cases(rep, "two-permutation mean-max"):
        key = ("three_index", int(c.case.split("/")[0][2:]))
        per_n[key][0] = min(per_n[key][0], c.extra["ratio"])
        per_n[key][1] = max(per_n[key][1], c.extra["ratio"])
    # uniform boundedness: every per-n constant stays within the pinned band
    unbounded = [k for k, (lo, hi) in per_n.items()
                 if lo < 0.8 * PINNED_SEQUENCE_LOWER[k[0]] or hi > 1.2 * consts[k[0]]["upper"]]
    lower_bad = _violations(_cases(rep, "lower bound with measured c"))
    ok = all(abs(d) <= 0.2 for d in drift.values()) and not unbounded and not lower_bad
    verdict(14, "sequence-space equivalence constants bounded in n and within 20% of pinned values",
            ok, ", ".join(f"{X} c={consts[X]['lower']:.5f} ({d:+.1%})" for X, d in drift.items())
            + f"; unbounded cells {unbounded}; lower-bound failures {len(lower_bad)}")


PINNED_PROBES = {"marcinkiewicz:phi_p:1 D": 1.0, "lorentz:1:phi_p_hat:0.5 D*": 1.0}


def test_convexity_probes(suites, verdict):
    rep, _ = suites["sequence_spaces"]
    modular = _cases(rep, "L_p modular equality")
    probes = rep.summary["probes"]
    pinned_ok = all(math.isfinite(probes[k]) and abs(probes[k] / v - 1) <= 0.2
                    for k, v in PINNED_PROBES.items())
    census = _cases(rep, "almost convex census")
    ok = (len(modular) == 3 and all(c.lhs <= 1e-9 for c in modular) and pinned_ok
          and len(census) == 3 and not _violations(census))
    verdict(15, "L_p modular equality; pinned D and D* probe constants; census for t^r, r = 1, 2, 3",
            ok, f"max modular gap {max(c.lhs for c in modular):.1e}; "
                + ", ".join(f"{k}={probes[k]:.4f}" for k in PINNED_PROBES)
                + f"; census violations {[c.lhs for c in census]}")


def test_full_run_time_and_determinism(suites, verdict, tmp_path):
    total = sum(dt for _, dt in suites.values())
    first = {name: rep.canonical() for name, (rep, _) in suites.items()}
    t0 = time.perf_counter()
    again = run_all(RunConfig(seed=SEED), out=tmp_path)
    rerun = time.perf_counter() - t0
    same = all(rep.canonical() == first[rep.suite] for rep in again)
    csv_same = all((tmp_path / f"{rep.suite}.csv").read_text() == rep.csv_text()
                   for rep, _ in suites.values())
    ok = total < 300 and rerun < 300 and same and csv_same
    verdict(16, "full run under 5 minutes with bit-identical reports per seed", ok,
            f"first run {total:.1f}s, rerun {rerun:.1f}s, JSON identical {same}, CSV identical {csv_same}")
