import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from _oracles import oracle_Con1, oracle_Cond2, oracle_R1, oracle_Rd2
from burgers_mrt.errors import InfeasibleParameterError
from burgers_mrt.params import (
    max_feasible_epsilon, residual_Con1, residual_Cond1, residual_Cond2, residual_R1,
    residual_Rd1, residual_Rd2, residuals, solve_fourth_order, viscosity_of,
)


unit = st.floats(0.01, 1.99)
weight = st.floats(-0.5, 0.5)
dim = st.integers(2, 6)


@settings(max_examples=300, deadline=None)
@given(unit, unit, weight)
def test_R1_Con1_match_oracles(s1, s2, w1):
    assert residual_R1(s1, s2, w1) == pytest.approx(oracle_R1(s1, s2, w1), rel=1e-12, abs=1e-12)
    assert residual_Con1(s1, s2, w1) == pytest.approx(oracle_Con1(s1, s2, w1), rel=1e-12, abs=1e-12)


@settings(max_examples=300, deadline=None)
@given(unit, unit, unit, weight, weight, dim)
def test_d_residuals_match_oracles(s1, s21, s22, w1, wd, d):
    W = w1 + 2 * (d - 1) * wd
    assert residual_Rd1(s1, s21, w1, wd, d) == pytest.approx(oracle_R1(s1, s21, W), rel=1e-12, abs=1e-12)
    assert residual_Cond1(s1, s21, w1, wd, d) == pytest.approx(oracle_Con1(s1, s21, W), rel=1e-12, abs=1e-12)
    assert residual_Rd2(s1, s21, s22, w1, wd, d) == pytest.approx(
        oracle_Rd2(s1, s21, s22, w1, wd, d), rel=1e-11, abs=1e-12)
    assert residual_Cond2(s1, s21, s22, w1, wd, d) == pytest.approx(
        oracle_Cond2(s1, s21, s22, w1, wd, d), rel=1e-11, abs=1e-12)


def test_residual_examples():
    assert abs(residual_R1(0.5, 0.75, 1 / 6)) < 1e-13
    assert residual_R1(0.0, 0.0, 0.3) == 0.0
    assert residual_Con1(0.0, 0.0, 0.3) == 0.0
    assert residual_Rd2(1.1, 0.9, 0.7, 0.0, 0.0, 3) == 0.0
    # (1, 1, 1/6) happens to be a root: 6*0 - 1 + (2 - 1) = 0; w1 = 1/4 is not
    assert residual_R1(1.0, 1.0, 1 / 6) == pytest.approx(0.0, abs=1e-15)
    assert abs(residual_R1(1.0, 1.0, 0.25)) > 0.1
    assert residual_Rd1(0.7, 1.3, 0.2, 0.0, 2) == pytest.approx(oracle_R1(0.7, 1.3, 0.2))
    assert residual_Rd1(0.7, 1.3, 1 / 6, 0.0, 4) == residual_R1(0.7, 1.3, 1 / 6)


def test_closed_form_examples():
    p = solve_fourth_order(0.5, 1, 1 / 40, 1 / 100)
    assert (p.s1, p.s21, p.w1) == pytest.approx((0.5, 0.75, 1 / 6), abs=1e-15)
    assert p.s22 is None and p.nu == pytest.approx(1 / 32, rel=1e-14)
    p = solve_fourth_order(0.2, 2, 1 / 20, 1 / 50)
    assert (p.s1, p.s21, p.s22, p.w1, p.w_diag) == pytest.approx(
        (10 / 11, 120 / 121, 20 / 21, 1 / 10, 1 / 30), abs=1e-15)
    assert solve_fourth_order(2.0, 1, 1 / 40, 1 / 100).nu == pytest.approx(1 / 8, rel=1e-14)


@pytest.mark.parametrize("d", [1, 2, 3, 4])
def test_dense_epsilon_grid(d):
    top = min(max_feasible_epsilon(d), 5.0)
    for eps in np.linspace(1e-3, top, 200):
        p = solve_fourth_order(float(eps), d, 0.1, 0.02)
        assert all(abs(v) < 1e-13 for v in residuals(p).values())
        assert viscosity_of(p) == pytest.approx(p.nu, rel=1e-14)
        assert p.epsilon == pytest.approx(p.nu * p.dt / p.dx ** 2, rel=1e-14)
        assert p.xi == pytest.approx(1 / p.s1 - 0.5, rel=1e-15)
        if d > 1:
            assert p.cs_sq == pytest.approx(p.c ** 2 / 3, rel=1e-14)
        assert p.weights.sum() == pytest.approx(1.0, abs=1e-14)


def test_scale_consistency():
    a = solve_fourth_order(0.13, 3, 0.1, 0.02)
    b = solve_fourth_order(0.13, 3, 0.01, 7e-4)
    for name in ("s1", "s21", "s22", "w1", "w_diag", "w0"):
        assert getattr(a, name) == getattr(b, name)


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_feasibility_boundary(d):
    edge = max_feasible_epsilon(d)
    p = solve_fourth_order(edge, d, 1.0, 1.0)
    assert p.w1 >= 0
    with pytest.raises(InfeasibleParameterError, match="w1"):
        solve_fourth_order(edge * (1 + 1e-9), d, 1.0, 1.0)


@pytest.mark.parametrize("args", [(0.0, 2, 1, 1), (-1.0, 1, 1, 1), (math.inf, 1, 1, 1),
                                  (math.nan, 1, 1, 1), (0.1, 2, 0.0, 1), (0.1, 2, 1, -1), (0.1, 0, 1, 1)])
def test_invalid_inputs(args):
    with pytest.raises(InfeasibleParameterError):
        solve_fourth_order(*args)


def test_negative_rest_weight_allowed_for_4d():
    p = solve_fourth_order(0.08, 4, 0.1, 0.025)
    assert p.w0 == pytest.approx(-1 / 75, abs=1e-15)
    assert p.eta == pytest.approx(2.5)


def test_with_rates_keeps_other_fields():
    p = solve_fourth_order(0.2, 2, 1 / 20, 1 / 50)
    q = p.with_rates(s22=1.0)
    assert q.s22 == 1.0 and q.s1 == p.s1 and q.nu == pytest.approx(p.nu, rel=1e-14)
    assert abs(residuals(q)["Rd2"]) > 1e-3
    r = p.with_rates(s1=1.0)
    assert r.xi == 0.5 and r.nu == pytest.approx(0.5 * p.cs_sq * p.dt)


def test_viscosity_vanishes_at_s1_two():
    p = solve_fourth_order(0.2, 2, 1.0, 1.0)
    assert viscosity_of(p.with_rates(s1=2.0 - 1e-15)) == pytest.approx(0.0, abs=1e-14)
