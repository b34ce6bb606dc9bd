from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from optoswitch import (
    FIPR,
    PHASE_RESONANT,
    SINGLE_PROBE,
    DriveConfig,
    ResponsePole,
    SystemParams,
    fipr_RT,
    phase_resonant_RT,
    single_probe_RT,
    transport_coefficients,
)
from optoswitch.closedform import classify

G_st = st.floats(0.0, 3.0)
delta_st = st.floats(-5.0, 5.0)
kappa_st = st.floats(0.3, 3.0)


def close(a, b, rel=1e-12):
    return abs(a - b) <= rel * max(abs(b), 1.0)


@pytest.mark.parametrize(
    "G, delta, expected",
    [(1 / math.sqrt(2), 0.0, (0.0, 1.0)), (1.2, 0.0, (3.5344, 8.2944)), (0.0, 2.3, (1.0, 0.0))],
)
def test_single_probe_examples(G, delta, expected):
    R, T = single_probe_RT(G, 1.0, delta)
    assert R == pytest.approx(expected[0], abs=1e-12)
    assert T == pytest.approx(expected[1], rel=1e-12, abs=1e-15)


@settings(max_examples=200, deadline=None)
@given(G=G_st, kappa=kappa_st)
def test_single_probe_resonance_reduced_form(G, kappa):
    R, T = single_probe_RT(G, kappa, 0.0)
    assert close(R, (kappa**2 - 2 * G**2) ** 2 / kappa**4)
    assert close(T, 4 * G**4 / kappa**4)


@settings(max_examples=200, deadline=None)
@given(G=G_st, delta=delta_st)
def test_fipr_reflection_is_one_and_T_symmetric(G, delta):
    R, T = fipr_RT(G, 1.0, delta)
    assert R == 1.0
    assert close(T, fipr_RT(G, 1.0, -delta)[1])


def test_fipr_examples():
    assert fipr_RT(2.0, 1.0, 0.0)[1] == pytest.approx(1.0, abs=1e-15)
    grid = np.linspace(-5, 5, 101)
    assert np.allclose(fipr_RT(0.0, 1.0, grid)[1], 1.0, rtol=0, atol=1e-14)


@settings(max_examples=200, deadline=None)
@given(G=G_st, theta=st.floats(-10.0, 10.0))
def test_phase_resonant_is_periodic(G, theta):
    a = phase_resonant_RT(G, 1.0, theta)
    b = phase_resonant_RT(G, 1.0, theta + 2 * math.pi)
    assert close(a[0], b[0], 1e-10) and close(a[1], b[1], 1e-10)


def test_phase_resonant_examples():
    assert phase_resonant_RT(2.7, 1.0, math.pi) == pytest.approx((1.0, 1.0), abs=1e-12)
    assert phase_resonant_RT(0.5, 1.0, 0.0) == pytest.approx((0.0, 4.0), abs=1e-12)
    assert phase_resonant_RT(0.0, 1.0, 1.234) == pytest.approx((1.0, 1.0), abs=1e-12)
    # off G = kappa/2 the reflection at theta = 0 does not vanish
    assert phase_resonant_RT(0.8, 1.0, 0.0)[0] == pytest.approx((1 - 4 * 0.64) ** 2)


@settings(max_examples=200, deadline=None)
@given(G=G_st, delta=delta_st)
def test_single_probe_matches_general_solver(G, delta):
    params, drive = SINGLE_PROBE.build(G)
    try:
        R, T = single_probe_RT(G, 1.0, delta)
    except ResponsePole:
        return
    res = transport_coefficients(params, drive, delta)
    assert close(res.R_L, R, 1e-10) and close(res.T_L, T, 1e-10)


@settings(max_examples=200, deadline=None)
@given(G=G_st, delta=delta_st, kappa=kappa_st)
def test_fipr_matches_general_solver(G, delta, kappa):
    params, drive = FIPR.build(G, kappa)
    try:
        R, T = fipr_RT(G, kappa, delta)
    except ResponsePole:
        return
    res = transport_coefficients(params, drive, delta)
    assert close(res.R_L, R, 1e-10) and close(res.T_L, T, 1e-10)


@settings(max_examples=200, deadline=None)
@given(G=G_st, theta=st.floats(0.0, 2 * math.pi))
def test_phase_resonant_matches_general_solver(G, theta):
    params, drive = PHASE_RESONANT.build(G, theta=theta)
    R, T = phase_resonant_RT(G, 1.0, theta)
    res = transport_coefficients(params, drive, 0.0)
    assert close(res.R_L, R, 1e-10) and close(res.T_L, T, 1e-10)


@settings(max_examples=100, deadline=None)
@given(G=st.floats(0.0, 50.0), kappa=kappa_st)
def test_balanced_closed_forms_have_no_real_axis_pole(G, kappa):
    # both denominators have real part kappa (kappa^2 + delta^2) >= kappa^3
    grid = np.linspace(-50.0, 50.0, 2001) * kappa
    single_probe_RT(G, kappa, grid)
    fipr_RT(G, kappa, grid)


def test_case_conditions():
    params, drive = FIPR.build(2.0)
    assert FIPR.matches(params, drive)
    assert not SINGLE_PROBE.matches(params, drive)
    assert classify(params, drive) == "FIPR"
    assert classify(*SINGLE_PROBE.build(0.4)) == "SingleProbe"
    p, d = PHASE_RESONANT.build(0.5, theta=0.3)
    assert PHASE_RESONANT.matches(p, d, 0.0)
    assert not PHASE_RESONANT.matches(p, d, 0.5)
    assert classify(SystemParams(kappa2=-0.5), DriveConfig()) is None
    assert classify(SystemParams(n=2.0), DriveConfig()) is None
