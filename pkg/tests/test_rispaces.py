import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, strategies as st

from riperm.errors import ValidationError
from riperm.rispaces import (EX, ExpLp, ExpM, LogPhi, Lorentz, Lp, Marcinkiewicz, Orlicz, PowerM,
                             PowerPhi, TabulatedPhi, concave_majorant, fundamental_function,
                             is_quasi_concave, log_family_hull, norm_one_probe, parse_seq,
                             parse_space, phi_eval, psi_y, staircase_m)
from riperm.stepcore import StepFunction, dilated_disjoint_sum

from strategies import float_steps

GRID = ["lp:1", "lp:2", "lp:3.5", "lorentz:1:phi_p:1", "lorentz:2:phi_p:2", "lorentz:1:phi_p_hat:0.5",
        "marcinkiewicz:phi_p:1", "marcinkiewicz:power:1:0.5", "orlicz:power:2", "explp:1", "explp:2",
        "ol:power:2:exp_p:1"]


def test_phi_examples():
    assert phi_eval(LogPhi(1), 1.0) == pytest.approx(1.0, abs=1e-15)
    assert phi_eval(PowerPhi(1, 0.5), 0.25) == pytest.approx(0.5)
    assert phi_eval(LogPhi(1), 1 / 3) == pytest.approx(0.5)
    assert phi_eval(LogPhi(1), 0.0) == 0.0


def test_phi_validation():
    with pytest.raises(ValidationError):
        PowerPhi(0.5, 1)
    with pytest.raises(ValidationError):
        TabulatedPhi([0.5, 1.0], [1.0, 0.5])
    assert is_quasi_concave(LogPhi(1))
    assert not is_quasi_concave(LogPhi(0.5))


def test_log_family_hull_is_concave_and_dominates():
    hull = log_family_hull(0.5)
    t = np.geomspace(1e-12, 1, 500)
    # linear interpolation between nodes sits slightly below the concave curve
    assert np.all(hull(t) >= LogPhi(0.5, check=False)(t) * (1 - 1e-6))
    assert hull(1.0) == pytest.approx(1.0)
    assert hull(0.5) >= 0.5
    assert is_quasi_concave(hull)


def test_concave_majorant_examples():
    t = np.linspace(0.01, 1, 100)
    v = np.sqrt(t)
    env = concave_majorant(t, v)
    assert np.allclose(env(t), v, atol=1e-12)
    psi = np.minimum.reduce([2 * t, np.full_like(t, 0.5), 0.7 * np.sqrt(t)])
    env = concave_majorant(t, psi, normalized=False)
    assert np.all(0.5 * env(t) <= psi + 1e-12)
    assert np.all(env(t) >= psi - 1e-12)


@pytest.mark.parametrize("spec", GRID)
def test_norm_of_one_is_one(spec):
    assert parse_space(spec).norm(StepFunction.constant(1)) == pytest.approx(1.0, rel=1e-9)


def test_norm_examples():
    s = 0.3
    phi = LogPhi(1)
    assert Lorentz(1, phi).norm(StepFunction.indicator(s)) == pytest.approx(phi(s))
    assert Lp(2).norm(StepFunction((0, F(1, 4), 1), (2, 0))) == pytest.approx(1.0)
    assert fundamental_function(Lp(3), 0.2) == pytest.approx(0.2 ** (1 / 3))
    assert fundamental_function(Lorentz(1, phi), 0.2) == pytest.approx(phi(0.2))


def test_explp_fundamental_function_within_factor_two():
    for p in (1, 2):
        E = ExpLp(p)
        for s in (1e-3, 1e-5, 1e-8):
            ratio = fundamental_function(E, s) / math.log(1 + 1 / s) ** (-1 / p)
            assert 0.5 <= ratio <= 2


def test_unknown_specs_rejected():
    for bad in ("lq:2", "lorentz:1", "lp:2:3", "marcinkiewicz:weird:1"):
        with pytest.raises(ValidationError):
            parse_space(bad)
    with pytest.raises(ValidationError):
        parse_seq("foo")


def test_psi_y_examples():
    one = StepFunction.constant(1)
    assert psi_y(one, 0.3) == pytest.approx(0.3)
    assert psi_y(StepFunction.constant(0), 0.3) == pytest.approx(0.3)
    y = StepFunction((0, F(1, 2), 1), (2, 0))
    for t in (0.1, 0.4, 0.8):
        assert psi_y(y, t) == pytest.approx((min(2 * t, 1) + t) / 2)


def test_norm_one_probe_bounds():
    for x in (StepFunction.constant(1), StepFunction.indicator(F(1, 4))):
        est, count = norm_one_probe(Lp(2), x, samples=16)
        target = Lp(2).norm(x)
        assert 0.5 * target <= est <= 2 * target
        assert count > 0
    assert norm_one_probe(Lp(2), StepFunction.constant(0))[0] == 0.0


def test_orlicz_matches_lp_for_power():
    x = StepFunction.from_pieces([3.0, 1.0, 0.5], [0.2, 0.3, 0.5])
    assert Orlicz(PowerM(2)).norm(x) == pytest.approx(Lp(2).norm(x), rel=1e-9)


def test_ex_space_keeps_sequence_normalisation():
    E = EX(parse_seq("linf"), 4)
    assert E.norm(StepFunction.constant(1)) == pytest.approx(1.0)
    E1 = EX(parse_seq("l1"), 4)
    assert E1.norm(StepFunction.constant(1)) == pytest.approx(4.0)


def test_mfunc_inverse_and_staircase():
    M = ExpM(0.5)
    for w in (0.1, 1.0, 30.0):
        assert M(M.inverse(w)) == pytest.approx(w, rel=1e-9)
    S = staircase_m(2.0, 4, -8, 8)
    u = np.geomspace(2.0 ** -8, 2.0 ** 8, 50)
    assert np.all(np.diff(S(u)) >= 0)


@pytest.mark.parametrize("spec", GRID)
@given(x=float_steps())
def test_norms_are_rearrangement_invariant_and_homogeneous(spec, x):
    E = parse_space(spec)
    rev = StepFunction(tuple(1 - b for b in reversed(x.breakpoints)), tuple(reversed(x.values)))
    a = E.norm(x)
    assert E.norm(rev) == pytest.approx(a, rel=1e-9, abs=1e-12)
    scaled = StepFunction(x.breakpoints, tuple(3 * float(v) for v in x.values))
    assert E.norm(scaled) == pytest.approx(3 * a, rel=1e-7, abs=1e-12)


@given(x=float_steps(), y=float_steps())
def test_triangle_inequality_on_lorentz_and_lp(x, y):
    grid = sorted(set(x.breakpoints) | set(y.breakpoints))
    s = StepFunction(tuple(grid), tuple(float(x(t)) + float(y(t)) for t in grid[:-1]))
    for spec in ("lp:2", "lorentz:1:phi_p:1", "marcinkiewicz:phi_p:1"):
        E = parse_space(spec)
        assert E.norm(s) <= E.norm(x) + E.norm(y) + 1e-9 * (1 + E.norm(s))


@given(st.lists(float_steps(max_pieces=3), min_size=1, max_size=4), st.sampled_from([1.0, 2.0, 3.0]))
def test_lp_dilated_sum_modular_identity(xs, p):
    E = Lp(p)
    c = E.norm(dilated_disjoint_sum(xs)) ** p
    mean = np.mean([E.norm(x) ** p for x in xs])
    assert c == pytest.approx(mean, rel=1e-9, abs=1e-12)
