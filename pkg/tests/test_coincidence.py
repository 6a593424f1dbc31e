import itertools
import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, strategies as st

from riperm.coincidence import (CoincidenceTable, avoid_table, b_count, b_table, concavity_ratio_max,
                                displayed_identity_gap, fixed_point_concavity, fixed_point_distribution,
                                fixed_point_tail_inequalities, mu_exact, mu_sup_bounds,
                                poisson_limit_check, upper_bound_violations)
from riperm.errors import DomainError
from riperm.stepcore import StepFunction


def brute_mu(n):
    counts = {}
    for p in itertools.permutations(range(n)):
        for k in range(n + 1):
            j = sum(p[i] == i for i in range(k))
            counts[(k, j)] = counts.get((k, j), 0) + 1
    return {key: F(c, math.factorial(n)) for key, c in counts.items()}


@pytest.mark.parametrize("n", range(1, 7))
def test_mu_matches_brute_force(n):
    brute = brute_mu(n)
    for k in range(n + 1):
        for j in range(k + 1):
            assert mu_exact(n, k, j) == brute.get((k, j), 0)


def test_mu_examples():
    assert [mu_exact(3, 3, j) for j in range(4)] == [F(1, 3), F(1, 2), 0, F(1, 6)]
    for n in (1, 5, 17):
        assert mu_exact(n, 1, 1) == F(1, n)
    with pytest.raises(DomainError):
        mu_exact(3, 4, 1)
    with pytest.raises(DomainError):
        mu_exact(0, 0, 0)


def test_recurrence_table_agrees_with_inclusion_exclusion():
    for n, k, j, B in b_table(9):
        assert B == b_count(n, k, j)
    A = avoid_table(6)
    assert A[4][4] == 9  # derangements of 4 letters


@given(st.integers(1, 60), st.data())
def test_table_sums_to_one(n, data):
    k = data.draw(st.integers(0, n))
    t = CoincidenceTable.build(n, k)
    assert t.total() == 1
    assert all(m >= 0 for m in t.mu)


def test_table_json():
    js = CoincidenceTable.build(4, 2).to_json()
    assert [(r["num"], r["den"]) for r in js["mu"]] == [(7, 12), (1, 3), (1, 12)]


def test_fixed_point_distribution_examples():
    prof = fixed_point_distribution(4)
    assert prof.s[1] == F(1, 3)
    assert prof.s[4] == F(1, 24)
    assert prof.s[3] == 0
    assert prof.tau[0] == 1
    assert sum(prof.s) == 1
    f = prof.step_function()
    assert f.is_nonincreasing()


def test_concavity_ratio_examples():
    assert fixed_point_concavity(2, 0.5).max_ratio <= 6
    r, _ = concavity_ratio_max(StepFunction.constant(3), 0.4)
    assert r == pytest.approx(1.0)
    # a narrow spike makes the ratio large: the condition can fail for general f
    vals = [concavity_ratio_max(StepFunction.indicator(F(1, 10 ** e)), 0.5)[0] for e in (2, 4, 6)]
    assert vals[0] < vals[1] < vals[2]
    with pytest.raises(DomainError):
        concavity_ratio_max(StepFunction.constant(1), 1.0)


def test_fixed_point_profile_small_n():
    for n in (3, 10):
        for a in np.arange(1, 10) / 10:
            c = fixed_point_concavity(n, float(a))
            assert c.max_ratio <= 6 and c.max_ratio_at_breakpoints <= 3
        out = fixed_point_tail_inequalities(n)
        assert out["tail_violations"] == [] and out["weighted_tail_violations"] == []


def test_mu_bounds_examples():
    r = mu_sup_bounds(0.5, 1, 500)
    assert 1 / (2 * math.e) <= r.sup_estimate <= 0.5
    assert r.upper_ok
    assert upper_bound_violations(20, [0.3, 0.5]) == []
    with pytest.raises(DomainError):
        mu_sup_bounds(1.5, 1, 10)


def test_poisson_limit_and_identity_gap():
    r = poisson_limit_check(400, 0.5, 1)
    assert r.rel_error < 0.01
    assert r.mu >= r.lower
    g = displayed_identity_gap(10, 5, 1)
    assert g["exact"] == pytest.approx(float(mu_exact(9, 4, 0)))
