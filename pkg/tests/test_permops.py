import itertools
import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, strategies as st

from riperm.errors import DomainError, EnumerationLimitError, ValidationError
from riperm.permops import (MatrixN, all_permutations, as_matrix, bn_operator, matrix_rearrangement,
                            reduce_to_permutation, sample_permutations, sequence_norm_avg, shift_entry,
                            t1_law_majorizes, tail_lq_term, top_square_mean, tq_distribution, tq_norm,
                            tq_norm_mc, tq_step_function, tq_values, two_perm_mean_max, u_function)
from riperm.rispaces import Lp, parse_seq, parse_space
from riperm.stepcore import StepFunction, ValueDistribution, majorizes

from strategies import float_matrices, int_matrices

I2 = np.eye(2, dtype=np.int64)
L1 = Lp(1)


def test_matrix_validation_and_json():
    with pytest.raises(ValidationError):
        as_matrix(np.ones((2, 3)))
    with pytest.raises(ValidationError):
        as_matrix([[1, -1], [0, 0]])
    x = as_matrix([[F(1, 2), 0], [0, 1]])
    assert MatrixN.from_json(x.to_json()).to_json() == x.to_json()
    assert x.exact


def test_rearrangement_and_u_examples():
    assert matrix_rearrangement(I2) == [1, 1, 0, 0]
    assert matrix_rearrangement([[3, 0], [0, 1]]) == [3, 1, 0, 0]
    assert matrix_rearrangement(np.full((2, 2), 5)) == [5] * 4
    assert u_function(np.eye(4, dtype=np.int64)) == StepFunction.constant(1)
    assert u_function([[3, 0], [0, 1]]) == StepFunction((0, F(1, 2), 1), (3, 1))
    assert L1.norm(u_function(np.zeros((3, 3), dtype=np.int64))) == 0


def test_tq_distribution_examples():
    half = F(1, 2)
    assert tq_distribution(I2, 1) == ValueDistribution.from_pairs([(2, half), (0, half)])
    assert tq_distribution(I2, math.inf) == ValueDistribution.from_pairs([(1, half), (0, half)])
    perm = np.eye(4, dtype=np.int64)[[2, 0, 3, 1]]
    assert tq_distribution(perm, 1) == tq_distribution(np.eye(4, dtype=np.int64), 1)
    with pytest.raises(EnumerationLimitError):
        tq_distribution(np.eye(9), 1)
    with pytest.raises(DomainError):
        tq_values(I2, 0.5)


def test_tq_norm_examples():
    assert tq_norm(I2, math.inf, L1) == pytest.approx(0.5, abs=1e-15)
    assert L1.norm(u_function(I2)) == 1
    assert tq_norm(np.zeros((3, 3)), 1, L1) == 0
    assert tq_norm(np.eye(3, dtype=np.int64), 1, L1) == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(DomainError):
        tq_norm(I2, 1, L1, mode="bogus")


def test_tail_term_examples():
    assert tail_lq_term(np.diag([3.0, 2.0, 1.0]), 2) == 0
    n = 4
    assert tail_lq_term(np.ones((n, n)), 1) == pytest.approx(n - 1)
    assert tail_lq_term(I2, 1) == 0
    with pytest.raises(DomainError):
        tail_lq_term(I2, math.inf)


def test_bn_operator_examples():
    assert bn_operator(StepFunction.constant(1), 3).to_json() == as_matrix(np.eye(3, dtype=object)).to_json()
    x = StepFunction.from_vector([F(2 * k + 1, 2048) for k in range(1024)])
    b = bn_operator(x, 2)
    assert b.entries[0, 0] == F(1, 4) and b.entries[1, 1] == F(3, 4)
    with pytest.raises(DomainError):
        bn_operator(x, 0)


@pytest.mark.parametrize("spec", ["lp:1", "lp:2", "lorentz:1:phi_p:1", "marcinkiewicz:phi_p:1", "explp:1"])
def test_u_bn_is_a_contraction(spec):
    E = parse_space(spec)
    rng = np.random.default_rng(3)
    for _ in range(5):
        vals = np.sort(rng.pareto(1.5, 7))[::-1]
        x = StepFunction.from_pieces(vals.tolist(), [F(1, 7)] * 7)
        for n in (2, 3, 5):
            assert E.norm(u_function(bn_operator(x, n))) <= E.norm(x) * (1 + 1e-9)


def test_shift_entry_examples():
    assert shift_entry([[1, 0], [0, 0]]).entries.tolist() == [[0, 1], [0, 0]]
    assert shift_entry([[2, 0], [1, 0]]).entries.tolist() == [[0, 2], [1, 0]]
    u = [[2, 0, 1], [1, 0, 0], [0, 0, 3]]
    assert t1_law_majorizes(shift_entry(u), u)
    with pytest.raises(DomainError):
        shift_entry([[0, 0], [0, 0]])
    with pytest.raises(DomainError):
        shift_entry([[1, 1], [0, 0]])


def test_reduce_to_permutation_examples():
    p = np.eye(3, dtype=np.int64)[[1, 2, 0]]
    out, steps = reduce_to_permutation(p)
    assert steps == 0 and np.array_equal(out.entries, p)
    out, steps = reduce_to_permutation([[1, 0], [1, 0]])
    assert steps == 1 and out.is_permutation()
    with pytest.raises(DomainError):
        reduce_to_permutation([[1, 1], [0, 1]])


def test_reduction_chain_on_random_q5():
    rng = np.random.default_rng(11)
    for _ in range(40):
        a = np.zeros(25, dtype=np.int64)
        a[rng.choice(25, 5, replace=False)] = 1
        out, steps, chain = reduce_to_permutation(a.reshape(5, 5), return_chain=True)
        assert steps < 25 and steps <= 2 * (5 - 1)
        for prev, nxt in zip(chain, chain[1:]):
            assert t1_law_majorizes(nxt, prev)


def test_sequence_norm_avg_examples():
    assert sequence_norm_avg(I2, parse_seq("linf")) == pytest.approx(0.5)
    assert sequence_norm_avg(np.zeros((3, 3)), parse_seq("l2")) == 0
    x = np.arange(9.0).reshape(3, 3)
    assert sequence_norm_avg(x, parse_seq("l1")) == pytest.approx(tq_norm(x, 1, L1))


def test_two_perm_examples():
    assert two_perm_mean_max(np.full((1, 1, 1), 4.0)) == 4.0
    assert two_perm_mean_max(np.ones((3, 3, 3))) == 1.0
    rng = np.random.default_rng(5)
    y = rng.random((3, 3, 3))
    brute = np.mean([max(y[i, p[i], s[i]] for i in range(3))
                     for p in itertools.permutations(range(3)) for s in itertools.permutations(range(3))])
    assert two_perm_mean_max(y) == pytest.approx(brute)
    assert top_square_mean(np.ones((3, 3, 3))) == 1.0
    with pytest.raises(EnumerationLimitError):
        two_perm_mean_max(np.ones((6, 6, 6)))
    with pytest.raises(ValidationError):
        two_perm_mean_max(np.ones((2, 3, 3)))


def test_step_function_layout_does_not_change_norms():
    x = np.array([[3, 1, 0], [2, 2, 5], [0, 4, 1]])
    order = np.random.default_rng(0).permutation(6)
    for spec in ("lp:2", "marcinkiewicz:phi_p:1"):
        E = parse_space(spec)
        a = E.norm(tq_step_function(x, 1))
        b = E.norm(tq_step_function(x, 1, order))
        assert a == pytest.approx(b) == pytest.approx(tq_norm(x, 1, E))


def test_sampling_is_worker_independent():
    a = sample_permutations(5, 20_000, seed=9, workers=1)
    b = sample_permutations(5, 20_000, seed=9, workers=8)
    assert np.array_equal(a, b)
    assert np.all(np.sort(a, axis=1) == np.arange(5))


def test_mc_agrees_with_exact():
    x = np.random.default_rng(2).random((5, 5))
    for q in (1, 2, math.inf):
        est = tq_norm_mc(x, q, L1, samples=50_000, seed=1)
        assert abs(est.value - tq_norm(x, q, L1)) <= 4 * est.se + 1e-12


@given(int_matrices(n_max=4))
def test_tq_monotone_in_q(a):
    for E in (L1, Lp(2)):
        v1, v2, vinf = (tq_norm(a, q, E) for q in (1, 2, math.inf))
        assert v1 >= v2 * (1 - 1e-12) - 1e-12
        assert v2 >= vinf * (1 - 1e-12) - 1e-12


@given(float_matrices(n_max=4))
def test_inequality_two_on_random_matrices(a):
    E = parse_space("lorentz:1:phi_p:1")
    u = E.norm(u_function(a))
    t = tq_norm(a, math.inf, E)
    assert 0.5 * u <= t * (1 + 1e-9) + 1e-12
    assert t <= u * (1 + 1e-9) + 1e-12


@given(int_matrices(n_max=4, hi=1).filter(lambda a: a.sum() == a.shape[0] and a.shape[0] >= 1))
def test_q_n_laws_are_majorized_by_identity(a):
    n = a.shape[0]
    assert majorizes(tq_distribution(np.eye(n, dtype=np.int64), 1).to_step_function(),
                     tq_distribution(a, 1).to_step_function())


@given(st.integers(1, 6))
def test_all_permutations_shape(n):
    p = all_permutations(n)
    assert p.shape == (math.factorial(n), n)
    assert len({tuple(r) for r in p}) == len(p)
