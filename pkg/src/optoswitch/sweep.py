"""Parameter sweeps and the figure-reproduction presets.

All sweep parameters are in units of kappa1 (which is fixed to 1 unless
given). Rows are ordered with the second axis varying fastest. Any row on
which some observable could not be computed has a nonzero ``status``
bitmask (1 pole, 2 undefined ratio, 4 pole-adjacent stencil, 8 phase jump)
and NaN in the affected columns.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .closedform import CASES
from .dataset import Dataset
from .delay import POLE, UNDEFINED, refined_delay_arrays
from .errors import UnknownFigure
from .model import DEVICE_CAVITY_LENGTH, DEVICE_KAPPA, DEVICE_MASS, DEVICE_OMEGA_M, DriveConfig, SystemParams
from .response import channel_arrays

AXIS_NAMES = ("delta", "G", "theta", "n", "kappa2", "gamma_m", "eps_ratio")
REQUIRED_FIXED = ("kappa2", "gamma_m", "G", "n", "delta", "theta", "eps_L", "eps_R")
OPTIONAL_FIXED = {"kappa1": 1.0, "omega_m": DEVICE_OMEGA_M / DEVICE_KAPPA}

OBSERVABLES = (
    ("R_l", "rl"), ("T_l", "tl"), ("R_r", "rr"), ("T_r", "tr"),
    ("arg_rl", "rl"), ("arg_tl", "tl"), ("arg_rr", "rr"), ("arg_tr", "tr"),
    ("tau_rl", "rl"), ("tau_tl", "tl"), ("tau_rr", "rr"), ("tau_tr", "tr"),
)  # fmt: skip
_OBS_CHANNEL = dict(OBSERVABLES)

UNITS = {
    "delta": "kappa", "G": "kappa", "theta": "rad", "n": "1", "kappa2": "kappa",
    "gamma_m": "kappa", "eps_ratio": "1", "status": "flag",
}  # fmt: skip


def _unit(name: str) -> str:
    if name in UNITS:
        return UNITS[name]
    if name.startswith("tau_"):
        return "1/kappa"
    if name.startswith("arg_"):
        return "rad"
    return "1"


def max_workers() -> int:
    """Thread cap from ``OPTOSWITCH_THREADS`` (default 1)."""
    raw = os.environ.get("OPTOSWITCH_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


@dataclass(frozen=True)
class Axis:
    name: str
    start: float
    stop: float
    count: int

    def __post_init__(self) -> None:
        if self.name not in AXIS_NAMES:
            raise ValueError(f"axis {self.name!r} not in {AXIS_NAMES}")
        if int(self.count) != self.count or self.count < 2:
            raise ValueError(f"axis {self.name}: count must be an integer >= 2")
        object.__setattr__(self, "count", int(self.count))

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True)
class SweepSpec:
    axis1: Axis
    axis2: Axis | None = None
    fixed: dict = field(default_factory=dict)
    observables: tuple[str, ...] = ("R_l", "T_l")

    def __post_init__(self) -> None:
        for name in ("axis1", "axis2"):
            value = getattr(self, name)
            if isinstance(value, (tuple, list)):
                object.__setattr__(self, name, Axis(*value))
        object.__setattr__(self, "observables", tuple(self.observables))
        object.__setattr__(self, "fixed", dict(self.fixed))
        if self.axis2 is not None and self.axis2.name == self.axis1.name:
            raise ValueError("the two axes must differ")
        unknown = [o for o in self.observables if o not in _OBS_CHANNEL]
        if unknown or not self.observables:
            raise ValueError(f"unknown observables {unknown}; choose from {[o for o, _ in OBSERVABLES]}")
        swept = set(self.axis_names)
        if "eps_ratio" in swept:
            swept.add("eps_R")
        missing = [k for k in REQUIRED_FIXED if k not in self.fixed and k not in swept]
        if missing:
            raise ValueError(f"fixed parameters missing: {missing}")

    @property
    def axes(self) -> list[Axis]:
        return [self.axis1] + ([self.axis2] if self.axis2 is not None else [])

    @property
    def axis_names(self) -> list[str]:
        return [a.name for a in self.axes]


def _build(values: dict) -> tuple[SystemParams, DriveConfig, float]:
    eps_L = values["eps_L"]
    eps_R = values["eps_ratio"] * eps_L if "eps_ratio" in values else values["eps_R"]
    params = SystemParams(
        kappa1=values["kappa1"],
        kappa2=values["kappa2"],
        gamma_m=values["gamma_m"],
        omega_m=values["omega_m"],
        G=values["G"],
        n=values["n"],
    )
    return params, DriveConfig(eps_L=eps_L, eps_R=eps_R, theta=values["theta"]), values["delta"]


def _evaluate(params: SystemParams, drive: DriveConfig, deltas: np.ndarray, observables) -> tuple[dict, np.ndarray]:
    ratios, poles = channel_arrays(params, drive, deltas)
    status = np.where(poles, POLE, 0).astype(np.int64)
    out = {}
    for obs in observables:
        channel = _OBS_CHANNEL[obs]
        if channel not in ratios:
            out[obs] = np.full(deltas.shape, np.nan)
            status |= UNDEFINED
            continue
        if obs.startswith("tau_"):
            tau, st = refined_delay_arrays(params, drive, deltas, channel)
            out[obs] = tau
            status |= st
        elif obs.startswith("arg_"):
            out[obs] = np.where(poles, np.nan, np.angle(ratios[channel]))
        else:
            out[obs] = np.where(poles, np.nan, np.abs(ratios[channel]) ** 2)
    return out, status


def _case_id(spec: SweepSpec, base: dict, grids: list[np.ndarray]) -> str | None:
    """A special case applies only if it holds at every grid point."""
    points = []
    for combo in np.array(np.meshgrid(*grids, indexing="ij")).reshape(len(grids), -1).T:
        values = dict(base)
        values.update(zip(spec.axis_names, combo))
        points.append(_build(values))
    for case in CASES:
        if all(case.matches(p, d, delta) for p, d, delta in points):
            return case.case_id
    return None


def run_sweep(spec: SweepSpec, workers: int | None = None) -> Dataset:
    base = dict(OPTIONAL_FIXED)
    base.update(spec.fixed)
    axes = spec.axes
    grids = [a.values() for a in axes]
    shape = tuple(len(g) for g in grids)
    names = spec.axis_names

    # vectorize along delta where it is an axis; otherwise one point per task
    if "delta" in names:
        d_axis = names.index("delta")
        others = [i for i in range(len(axes)) if i != d_axis]
    else:
        d_axis = None
        others = list(range(len(axes)))

    tasks = []
    for index in np.ndindex(*[shape[i] for i in others]):
        values = dict(base)
        for i, j in zip(others, index):
            values[names[i]] = float(grids[i][j])
        if d_axis is not None:
            values["delta"] = 0.0
        params, drive, delta = _build(values)
        deltas = grids[d_axis] if d_axis is not None else np.array([delta])
        tasks.append((index, params, drive, deltas))

    def work(task):
        _, params, drive, deltas = task
        return _evaluate(params, drive, deltas, spec.observables)

    n_workers = workers or max_workers()
    if n_workers > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            evaluated = list(pool.map(work, tasks))
    else:
        evaluated = [work(t) for t in tasks]

    table = {obs: np.empty(shape) for obs in spec.observables}
    status = np.zeros(shape, dtype=np.int64)
    for (index, *_), (values, st) in zip(tasks, evaluated):
        where = [None] * len(axes)
        for i, j in zip(others, index):
            where[i] = j
        if d_axis is not None:
            where[d_axis] = slice(None)
        where = tuple(where)
        for obs in spec.observables:
            table[obs][where] = values[obs] if d_axis is not None else values[obs][0]
        status[where] = st if d_axis is not None else st[0]

    mesh = np.meshgrid(*grids, indexing="ij")
    columns = [(n, _unit(n)) for n in names] + [(o, _unit(o)) for o in spec.observables] + [("status", "flag")]
    data = np.column_stack(
        [m.ravel() for m in mesh] + [table[o].ravel() for o in spec.observables] + [status.ravel().astype(float)]
    )
    metadata = {
        "tool": "optoswitch",
        "version": __version__,
        "axes": [{"name": a.name, "min": a.start, "max": a.stop, "count": a.count} for a in axes],
        "fixed": {k: v for k, v in sorted(base.items()) if k not in names},
        "observables": list(spec.observables),
        "case_id": _case_id(spec, base, grids),
        "rate_unit": "kappa1",
        "tau_unit": "1/kappa1",
        "status_bits": {"pole": 1, "undefined": 2, "pole_adjacent": 4, "phase_jump": 8},
    }
    return Dataset(columns, data, metadata)


# --- figure presets -------------------------------------------------------

_CASE_A = {"kappa1": 1.0, "kappa2": -1.0, "gamma_m": 1.0, "n": 1.0, "eps_L": 1.0, "eps_R": 0.0, "theta": 0.0, "delta": 0.0}
_FIPR = dict(_CASE_A, eps_R=1.0, theta=math.pi)
_PHASE = dict(_CASE_A, eps_R=1.0)

_DEVICE_DEVICE = {
    "cavity_length_m": DEVICE_CAVITY_LENGTH,
    "mass_kg": DEVICE_MASS,
    "kappa_rad_per_s": DEVICE_KAPPA,
    "omega_m_rad_per_s": DEVICE_OMEGA_M,
}

_DELTA = ("delta", -5.0, 5.0)


def _fig(title, fixed, axes, observables, argmax=False):
    return {"title": title, "fixed": fixed, "axes": axes, "observables": observables, "argmax": argmax}


FIGURES = {
    "fig2a": _fig("Case A spectra, G = 0.7 kappa", dict(_CASE_A, G=0.7), [_DELTA], ("R_l", "T_l")),
    "fig2b": _fig("Case A spectra, G = kappa/sqrt(2)", dict(_CASE_A, G=1 / math.sqrt(2)), [_DELTA], ("R_l", "T_l")),
    "fig2c": _fig("Case A spectra, G = 1.2 kappa", dict(_CASE_A, G=1.2), [_DELTA], ("R_l", "T_l")),
    "fig2d": _fig("Case A R_L over (G, delta)", _CASE_A, [("G", 0.0, 1.5), _DELTA], ("R_l",)),
    "fig2e": _fig("Case A T_L over (G, delta)", _CASE_A, [("G", 0.0, 1.5), _DELTA], ("T_l",)),
    "fig3a": _fig("Case A reflection delay, G = 0.8, 1, 1.2 kappa", _CASE_A, [("G", 0.8, 1.2, 3), _DELTA], ("tau_rl",)),
    "fig3b": _fig("Case A transmission delay, G = 0.8, 1, 1.2 kappa", _CASE_A, [("G", 0.8, 1.2, 3), _DELTA], ("tau_tl",)),
    "fig4a": _fig("FIPR spectra, G = kappa", dict(_FIPR, G=1.0), [_DELTA], ("R_l", "T_l")),
    "fig4b": _fig("FIPR spectra, G = 2 kappa", dict(_FIPR, G=2.0), [_DELTA], ("R_l", "T_l")),
    "fig4c": _fig("FIPR spectra, G = 3 kappa", dict(_FIPR, G=3.0), [_DELTA], ("R_l", "T_l")),
    "fig4d": _fig("FIPR R_L over (G, delta)", _FIPR, [("G", 0.0, 3.0), _DELTA], ("R_l",)),
    "fig4e": _fig("FIPR T_L over (G, delta)", _FIPR, [("G", 0.0, 3.0), _DELTA], ("T_l",)),
    "fig5a": _fig("FIPR reflection delay, G = 1, 2, 3 kappa", _FIPR, [("G", 1.0, 3.0, 3), _DELTA], ("tau_rl", "T_l"), argmax=True),
    "fig5b": _fig("FIPR transmission delay, G = 1, 2, 3 kappa", _FIPR, [("G", 1.0, 3.0, 3), _DELTA], ("tau_tl", "T_l"), argmax=True),
    "fig6": _fig("Phase switching at resonance, G = 0.5 kappa", dict(_PHASE, G=0.5), [("theta", 0.0, 2 * math.pi)], ("R_l", "T_l")),
}  # fmt: skip


def figure_dataset(figure_id: str, grid: int | None = None, grid2d: int | None = None) -> Dataset:
    """Data behind one figure panel.

    ``grid`` sets the point count of 1-D axes (default 1001) and ``grid2d``
    that of both axes of surface panels (default 51). Axes with an explicit
    count (the three-curve G axes) keep it.
    """
    try:
        preset = FIGURES[figure_id]
    except KeyError:
        raise UnknownFigure(f"unknown figure {figure_id!r}; choose from {sorted(FIGURES)}") from None
    surface = len(preset["axes"]) == 2 and all(len(a) == 3 for a in preset["axes"])
    axes = []
    for axis in preset["axes"]:
        if len(axis) == 4:
            axes.append(Axis(*axis))
        elif surface:
            axes.append(Axis(*axis, grid2d or 51))
        else:
            axes.append(Axis(*axis, grid or 1001))
    fixed = {k: v for k, v in preset["fixed"].items() if k not in {a.name for a in axes}}
    spec = SweepSpec(axes[0], axes[1] if len(axes) > 1 else None, fixed, preset["observables"])
    ds = run_sweep(spec)
    ds.metadata.update(
        {
            "figure": figure_id,
            "title": preset["title"],
            "device": _DEVICE_DEVICE,
            "omega_m": OPTIONAL_FIXED["omega_m"],
            "seconds_per_tau_unit": 1.0 / DEVICE_KAPPA,
        }
    )
    if preset["argmax"]:
        ds = _with_argmax(ds, "T_l")
    return ds


def _with_argmax(ds: Dataset, observable: str) -> Dataset:
    """Append the delta of maximal ``observable`` within each first-axis block.

    Peaks that tie to 1e-12 relative (mirror pairs in delta) resolve to the
    largest delta.
    """
    first = ds.column(ds.names[0])
    delta = ds.column("delta")
    values = ds.column(observable)
    out = np.empty_like(first)
    for v in np.unique(first):
        block = first == v
        vals = values[block]
        peak = np.nanmax(vals)
        ties = np.flatnonzero(vals >= peak - 1e-12 * abs(peak))
        out[block] = delta[block][ties[-1]]
    columns = ds.columns + [(f"delta_max_{observable}", "kappa")]
    return Dataset(columns, np.column_stack([ds.rows, out]), ds.metadata)
