"""Acceptance criteria 1-10.

Each test carries ``@pytest.mark.criterion(n)``; the conftest prints one
PASS/FAIL line per criterion at the end of the run.
"""

from __future__ import annotations

import json
import math
import time
from pathlib import Path

import numpy as np
import pytest

from optoswitch import (
    FIPR,
    PHASE_RESONANT,
    SINGLE_PROBE,
    DriveConfig,
    SystemParams,
    phase_resonant_RT,
    solve_linear_response,
    stable_window,
    system_stability,
    transport_coefficients,
)
from optoswitch.cli import main
from optoswitch.delay import OK, delay_arrays, group_delay
from optoswitch.oracle import integrate_time_domain_batch, random_stable_draws
from optoswitch.response import amplitude_arrays, channel_arrays
from optoswitch.sweep import FIGURES

FIXTURES = Path(__file__).parent / "fixtures"


def rel_close(actual, expected, rel, floor=1e-15):
    return abs(actual - expected) <= rel * max(abs(expected), floor)


# 1 -------------------------------------------------------------------------


@pytest.mark.criterion(1)
@pytest.mark.parametrize("G", [0.3, 0.7, 1 / math.sqrt(2), 1.0, 1.2])
def test_case_a_resonance_values(G):
    params, drive = SINGLE_PROBE.build(G)
    result = transport_coefficients(params, drive, 0.0)
    R_expected = (1 - 2 * G**2) ** 2
    T_expected = 4 * G**4
    # R_L vanishes at G = 1/sqrt(2); there the tolerance is 1e-12 absolute
    assert rel_close(result.R_L, R_expected, 1e-12, floor=1.0 if R_expected < 1e-12 else 1e-15)
    assert rel_close(result.T_L, T_expected, 1e-12)


@pytest.mark.criterion(1)
@pytest.mark.parametrize("G, R, T", [(1 / math.sqrt(2), 0.0, 1.0), (1.0, 1.0, 4.0)])
def test_case_a_named_points(G, R, T):
    params, drive = SINGLE_PROBE.build(G)
    result = transport_coefficients(params, drive, 0.0)
    assert abs(result.R_L - R) <= 1e-12 * max(R, 1.0)
    assert abs(result.T_L - T) <= 1e-12 * T


# 2 -------------------------------------------------------------------------


@pytest.mark.criterion(2)
@pytest.mark.parametrize("G", [1.0, 2.0, 3.0])
def test_fipr_reflection_is_one(G):
    params, drive = FIPR.build(G)
    grid = np.linspace(-5.0, 5.0, 1001)
    ratios, poles = channel_arrays(params, drive, grid)
    assert not poles.any()
    R = np.abs(ratios["rl"]) ** 2
    assert np.max(np.abs(R - 1.0)) <= 1e-12
    T0 = transport_coefficients(params, drive, 0.0).T_L
    assert abs(T0 - 1.0) <= 1e-12


# 3 -------------------------------------------------------------------------


@pytest.mark.criterion(3)
def test_phase_switch_closed_form():
    R0, T0 = phase_resonant_RT(0.5, 1.0, 0.0)
    Rpi, Tpi = phase_resonant_RT(0.5, 1.0, math.pi)
    assert abs(R0 - 0.0) <= 1e-12 and abs(T0 - 4.0) <= 1e-12
    assert abs(Rpi - 1.0) <= 1e-12 and abs(Tpi - 1.0) <= 1e-12


@pytest.mark.criterion(3)
def test_phase_switch_general_solver_matches_closed_form():
    thetas = np.linspace(0.0, 2 * math.pi, 721)
    R_cf, T_cf = phase_resonant_RT(0.5, 1.0, thetas)
    worst = 0.0
    for theta, r, t in zip(thetas, R_cf, T_cf):
        params, drive = PHASE_RESONANT.build(0.5, theta=theta)
        res = transport_coefficients(params, drive, 0.0)
        worst = max(worst, abs(res.R_L - r), abs(res.T_L - t))
    assert worst <= 1e-12


# 4 -------------------------------------------------------------------------


def _rel_dev(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


@pytest.mark.criterion(4)
def test_oracle_triangle():
    draws = random_stable_draws(np.random.default_rng(20240611), 200)
    linear = [solve_linear_response(p, d, delta).as_array() for p, d, delta in draws]
    closed = [np.array(amplitude_arrays(p, d, delta)[:3], dtype=complex) for p, d, delta in draws]
    timed = [x.as_array() for x in integrate_time_domain_batch(draws)]
    dev_closed = max(_rel_dev(c, lin) for c, lin in zip(closed, linear))
    dev_time = max(_rel_dev(t, lin) for t, lin in zip(timed, linear))
    print(f"closed vs linear {dev_closed:.3e}; linear vs time domain {dev_time:.3e}")
    assert dev_closed < 1e-10
    assert dev_time < 1e-6


# 5 -------------------------------------------------------------------------


@pytest.mark.criterion(5)
def test_reflection_delay_changes_sign_at_G_equal_kappa():
    def tau_rl(G):
        params, drive = SINGLE_PROBE.build(G)
        return group_delay(params, drive, 0.0, "rl")

    assert tau_rl(0.9) > 0
    assert tau_rl(1.1) < 0
    assert abs(tau_rl(1.0)) < 1e-3


@pytest.mark.criterion(5)
@pytest.mark.parametrize("G", [0.8, 1.0, 1.2])
def test_transmission_delay_is_fast(G):
    params, drive = SINGLE_PROBE.build(G)
    assert group_delay(params, drive, 0.0, "tl") < 0


# 6 -------------------------------------------------------------------------


@pytest.mark.criterion(6)
def test_decoupled_reflection_delay():
    params = SystemParams(kappa1=1.0, kappa2=-1.0, gamma_m=1.0, G=0.0, n=1.0)
    drive = DriveConfig(eps_L=1.0)
    grid = np.linspace(-3.0, 3.0, 601)
    tau, status = delay_arrays(params, drive, grid, "rl")
    assert np.all(status == OK)
    expected = 2.0 / (1.0 + grid**2)
    assert np.max(np.abs(tau - expected) / expected) <= 1e-6


# 7 -------------------------------------------------------------------------


def _random_params(rng, n=None, passive=False):
    sign = 1.0 if passive else rng.choice([-1.0, 1.0])
    return SystemParams(
        kappa1=rng.uniform(0.5, 2.0),
        kappa2=sign * rng.uniform(0.3, 2.0),
        gamma_m=rng.uniform(0.2, 2.0),
        G=rng.uniform(0.05, 2.0),
        n=rng.uniform(0.25, 4.0) if n is None else n,
    )


@pytest.mark.criterion(7)
def test_single_probe_transmission_ratio():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(100):
        params = _random_params(rng)
        delta = rng.uniform(-3.0, 3.0)
        T_l = transport_coefficients(params, DriveConfig(eps_L=rng.uniform(0.1, 1.0)), delta).T_l
        right = DriveConfig(eps_L=0.0, eps_R=rng.uniform(0.1, 1.0), theta=rng.uniform(0, 2 * math.pi))
        T_r = transport_coefficients(params, right, delta).T_r
        expected = (params.kappa2 / params.kappa1) ** 2
        worst = max(worst, abs(T_l / T_r - expected) / expected)
    assert worst <= 1e-10


# 8 -------------------------------------------------------------------------


@pytest.mark.criterion(8)
def test_exchange_symmetry():
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(100):
        # kappa1 must stay positive after the swap, so both cavities are lossy here
        params = _random_params(rng, n=1.0, passive=True)
        drive = DriveConfig(eps_L=rng.uniform(0.1, 1.0), eps_R=rng.uniform(0.1, 1.0), theta=rng.uniform(0, 2 * math.pi))
        delta = rng.uniform(-3.0, 3.0)
        swapped_params = params.replace(kappa1=params.kappa2, kappa2=params.kappa1)
        # eps_L <-> eps_R e^{i theta}, then a global phase e^{-i theta} to keep eps_L real
        swapped_drive = DriveConfig(eps_L=drive.eps_R, eps_R=drive.eps_L, theta=-drive.theta)
        a = transport_coefficients(params, drive, delta)
        b = transport_coefficients(swapped_params, swapped_drive, delta)
        for x, y in ((a.R_l, b.R_r), (a.T_l, b.T_r), (a.R_r, b.R_l), (a.T_r, b.T_l)):
            worst = max(worst, abs(x - y) / max(abs(y), 1e-300))
    assert worst <= 1e-12


# 9 -------------------------------------------------------------------------


@pytest.mark.criterion(9)
@pytest.mark.parametrize("gamma_m", [1.0, 0.37])
def test_decoupled_eigenvalues(gamma_m):
    params = SystemParams(kappa1=1.0, kappa2=-1.0, gamma_m=gamma_m, G=0.0, n=1.0)
    eig = sorted(system_stability(params).eigenvalues, key=lambda z: z.real)
    expected = sorted([-gamma_m, -1.0, 1.0])
    for got, want in zip(eig, expected):
        assert abs(got - want) <= 1e-12
    assert not system_stability(params).stable


@pytest.mark.criterion(9)
def test_stable_window_matches_fixture():
    fixture = json.loads((FIXTURES / "stability_window.json").read_text())
    for case in fixture["cases"]:
        params = SystemParams(kappa1=case["kappa1"], kappa2=case["kappa2"], gamma_m=case["gamma_m"], n=case["n"])
        windows = stable_window(params, fixture["G_max"], fixture["samples"], fixture["tol"])
        print(f"kappa2 = {case['kappa2']}: stable G window {windows}")
        assert len(windows) == len(case["windows"])
        for got, want in zip(windows, case["windows"]):
            assert got == pytest.approx(want, abs=1e-9)


# 10 ------------------------------------------------------------------------


@pytest.mark.criterion(10)
@pytest.mark.parametrize("figure_id", sorted(FIGURES))
def test_figure_datasets(figure_id, tmp_path):
    outputs = []
    for run in range(2):
        path = tmp_path / f"{figure_id}-{run}.csv"
        start = time.perf_counter()
        assert main(["figure", figure_id, "--out", str(path)]) == 0
        elapsed = time.perf_counter() - start
        assert elapsed < 5.0, f"{figure_id} took {elapsed:.2f} s"
        outputs.append(path.read_bytes())
    assert outputs[0] == outputs[1]
