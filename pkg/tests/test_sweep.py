from __future__ import annotations

import math

import numpy as np
import pytest

from optoswitch import FIGURES, Dataset, SweepSpec, UnknownFigure, figure_dataset, run_sweep
from optoswitch.sweep import Axis

CASE_A = {"kappa2": -1.0, "gamma_m": 1.0, "n": 1.0, "eps_L": 1.0, "eps_R": 0.0, "theta": 0.0, "delta": 0.0}
FIPR = dict(CASE_A, eps_R=1.0, theta=math.pi)


def test_fipr_delta_sweep_reflection_is_one():
    ds = run_sweep(SweepSpec(("delta", -5, 5, 1001), fixed=dict(FIPR, G=2.0)))
    assert len(ds) == 1001
    assert np.max(np.abs(ds.column("R_l") - 1)) < 1e-12
    assert ds.metadata["case_id"] == "FIPR"
    assert np.all(ds.column("status") == 0)


def test_two_axis_layout_and_ridge():
    spec = SweepSpec(("G", 0.0, 1.5, 16), ("delta", -5, 5, 101), fixed=CASE_A)
    ds = run_sweep(spec)
    assert len(ds) == 16 * 101
    assert ds.names[:2] == ["G", "delta"]
    # second axis varies fastest
    assert ds.column("delta")[1] > ds.column("delta")[0] and ds.column("G")[1] == ds.column("G")[0]
    T = ds.column("T_l").reshape(16, 101)
    on_resonance = T[:, 50]
    assert np.all(np.diff(on_resonance) > 0)  # T_L(0) = 4 G^4 grows with G


def test_two_point_axis_keeps_endpoints():
    ds = run_sweep(SweepSpec(("G", 0.1, 0.9, 2), fixed=CASE_A))
    assert list(ds.column("G")) == [0.1, 0.9]


def test_determinism_and_thread_independence(monkeypatch):
    spec = SweepSpec(("G", 0.5, 1.5, 5), ("delta", -3, 3, 51), fixed=CASE_A, observables=("R_l", "tau_rl"))
    a = run_sweep(spec, workers=1).to_csv()
    b = run_sweep(spec, workers=4).to_csv()
    monkeypatch.setenv("OPTOSWITCH_THREADS", "3")
    c = run_sweep(spec).to_csv()
    assert a == b == c


def test_one_axis_equals_slice_of_two_axis():
    grid2 = run_sweep(SweepSpec(("G", 0.0, 1.5, 7), ("delta", -5, 5, 101), fixed=CASE_A, observables=("R_l", "T_l", "tau_tl")))
    line = run_sweep(SweepSpec(("delta", -5, 5, 101), fixed=dict(CASE_A, G=1.0), observables=("R_l", "T_l", "tau_tl")))
    block = grid2.rows[grid2.column("G") == 1.0]
    assert np.array_equal(block[:, 1:], line.rows, equal_nan=True)


def test_sweep_over_non_delta_axes():
    ds = run_sweep(SweepSpec(("theta", 0, 2 * math.pi, 9), ("n", 0.5, 2.0, 4), fixed=dict(CASE_A, eps_R=1.0, G=0.5)))
    assert len(ds) == 36
    ds = run_sweep(SweepSpec(("eps_ratio", 0.0, 2.0, 5), fixed=dict(CASE_A, G=0.5)))
    assert ds.column("R_l")[0] == pytest.approx((1 - 2 * 0.25) ** 2)


def test_flags_on_undefined_points():
    # eps_ratio = 0 switches the right probe off, so right channels are undefined
    ds = run_sweep(SweepSpec(("eps_ratio", 0.0, 1.0, 3), fixed=dict(CASE_A, G=0.5), observables=("R_l", "R_r")))
    status = ds.column("status")
    assert status[0] == 2 and np.isnan(ds.column("R_r")[0])
    assert status[1] == 0


def test_spec_validation():
    with pytest.raises(ValueError):
        Axis("bogus", 0, 1, 3)
    with pytest.raises(ValueError):
        Axis("G", 0, 1, 1)
    with pytest.raises(ValueError):
        SweepSpec(("G", 0, 1, 3), ("G", 0, 1, 3), fixed=CASE_A)
    with pytest.raises(ValueError):
        SweepSpec(("G", 0, 1, 3), fixed={"kappa2": -1.0})
    with pytest.raises(ValueError):
        SweepSpec(("G", 0, 1, 3), fixed=CASE_A, observables=("nope",))


@pytest.mark.parametrize("figure_id", sorted(FIGURES))
def test_every_figure_builds_with_metadata(figure_id):
    ds = figure_dataset(figure_id)
    assert len(ds) > 0
    meta = ds.metadata
    assert meta["figure"] == figure_id
    for key, value in FIGURES[figure_id]["fixed"].items():
        if key not in {a["name"] for a in meta["axes"]}:
            assert meta["fixed"][key] == value
    assert meta["seconds_per_tau_unit"] > 0


def test_fig2b_transparency_point():
    ds = figure_dataset("fig2b")
    at_zero = ds.rows[ds.column("delta") == 0.0][0]
    assert at_zero[ds.names.index("T_l")] == pytest.approx(1.0, abs=1e-12)
    assert at_zero[ds.names.index("R_l")] == pytest.approx(0.0, abs=1e-12)


def test_fig3a_marks_exact_reflection_zeros():
    ds = figure_dataset("fig3a")
    flagged = ds.rows[ds.column("status") != 0]
    assert {(g, d) for g, d in flagged[:, :2]} == {(1.0, -1.0), (1.0, 1.0)}


def test_fig4a_and_fig6_values():
    ds = figure_dataset("fig4a")
    assert len(ds) == 1001 and np.max(np.abs(ds.column("R_l") - 1)) < 1e-12
    ds = figure_dataset("fig6")
    i = int(np.argmin(np.abs(ds.column("theta") - math.pi)))
    assert ds.column("theta")[i] == pytest.approx(math.pi)
    assert ds.column("R_l")[i] == pytest.approx(1.0, abs=1e-12)
    assert ds.column("T_l")[i] == pytest.approx(1.0, abs=1e-12)


def test_fig5_fast_light_at_resonance_and_peak_locations():
    for fid, obs in (("fig5a", "tau_rl"), ("fig5b", "tau_tl")):
        ds = figure_dataset(fid)
        at_zero = ds.rows[ds.column("delta") == 0.0]
        assert np.all(at_zero[:, ds.names.index(obs)] < 0)
        peaks = sorted(set(ds.column("delta_max_T_l")))
        assert peaks == pytest.approx([1.0, 2.55, 4.06], abs=0.011)


def test_grid_override_and_unknown_figure():
    assert len(figure_dataset("fig2a", grid=11)) == 11
    assert len(figure_dataset("fig2d", grid2d=5)) == 25
    with pytest.raises(UnknownFigure):
        figure_dataset("fig9")
    with pytest.raises(KeyError):
        figure_dataset("fig9")


def test_dataset_is_a_dataset():
    assert isinstance(figure_dataset("fig2a", grid=3), Dataset)
