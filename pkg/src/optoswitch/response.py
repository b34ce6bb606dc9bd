"""Frequency-domain linear response of the three-mode system.

Fluctuation amplitudes at the probe (Stokes) frequency are evaluated in
closed form and turned into left/right output fields through the
input-output relations. State order is (delta_b, delta_a1, delta_a2) and
``delta`` is the probe-cavity detuning, in the same rate unit as the params.

All array-level helpers broadcast over ``delta``; the scalar entry points
raise on poles, the array ones return a pole mask instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ResponsePole, UndefinedRatio
from .model import DriveConfig, SystemParams

# on |F1 + F2| / kappa1**3
POLE_THRESHOLD = 1e-12


@dataclass(frozen=True)
class FluctuationAmps:
    db: complex
    da1: complex
    da2: complex
    delta: float

    def as_array(self) -> np.ndarray:
        return np.array([self.db, self.da1, self.da2], dtype=complex)


@dataclass(frozen=True)
class OutputFields:
    out_L: complex
    out_R: complex


@dataclass(frozen=True)
class TransportResult:
    """Intensity ratios and output phases at one detuning.

    Entries whose reference probe is zero are ``None``. With both probes on,
    ``R_L = R_l`` and ``T_L = T_l`` follow the dual-probe naming; with equal
    probes ``R_l == T_r`` and ``T_l == R_r``.
    """

    delta: float
    R_l: float | None
    T_l: float | None
    R_r: float | None
    T_r: float | None
    arg_rl: float | None
    arg_tl: float | None
    arg_rr: float | None
    arg_tr: float | None

    @property
    def R_L(self) -> float | None:
        return self.R_l

    @property
    def T_L(self) -> float | None:
        return self.T_l


@dataclass(frozen=True)
class Marker:
    """Grid point where a quantity could not be evaluated.

    ``kind`` is one of ``pole``, ``undefined``, ``pole_adjacent``, ``phase_jump``.
    """

    delta: float
    kind: str
    detail: str = ""


def response_denominator(params: SystemParams, delta):
    """``F1 + F2`` (vanishes on the response poles)."""
    d = np.asarray(delta, dtype=float)
    k1 = params.kappa1 - 1j * d
    k2 = params.kappa2 - 1j * d
    gm = params.gamma_m - 1j * d
    r = params.amplitude_ratio
    f1 = gm * k1 * k2
    f2 = params.G**2 * (r**2 * k1 + k2)
    return f1 + f2


def is_pole(params: SystemParams, denominator, threshold: float = POLE_THRESHOLD):
    return np.abs(denominator) < threshold * params.kappa1**3


def amplitude_arrays(params: SystemParams, drive: DriveConfig, delta):
    """Closed-form (db, da1, da2) and the shared denominator, broadcast over delta.

    ``r = sqrt(n)`` is the intracavity amplitude ratio |a2s/a1s|; it is what
    multiplies G in the right-cavity coupling.
    """
    d = np.asarray(delta, dtype=float)
    k1 = params.kappa1 - 1j * d
    k2 = params.kappa2 - 1j * d
    gm = params.gamma_m - 1j * d
    G = params.G
    r = params.amplitude_ratio
    eL = drive.eps_L
    eR = drive.probe_right

    den = gm * k1 * k2 + G**2 * (r**2 * k1 + k2)
    with np.errstate(divide="ignore", invalid="ignore"):
        db = -1j * G * (r * eR * k1 - eL * k2) / den
        da1 = (G**2 * (r * eR + r**2 * eL) + eL * gm * k2) / den
        da2 = (G**2 * (eR + r * eL) + eR * gm * k1) / den
    return db, da1, da2, den


def output_arrays(params: SystemParams, drive: DriveConfig, da1, da2):
    with np.errstate(invalid="ignore"):  # nan/inf only on poles, which callers mask
        out_L = 2.0 * params.kappa1 * da1 - drive.eps_L
        out_R = 2.0 * params.kappa2 * da2 - drive.probe_right
    return out_L, out_R


def channel_arrays(params: SystemParams, drive: DriveConfig, delta):
    """Complex output/probe ratios for the four channels plus a pole mask.

    Keys ``rl, tl, rr, tr``; a channel whose reference probe is zero is absent.
    """
    _, da1, da2, den = amplitude_arrays(params, drive, delta)
    out_L, out_R = output_arrays(params, drive, da1, da2)
    ratios = {}
    if drive.eps_L > 0:
        ratios["rl"] = out_L / drive.eps_L
        ratios["tl"] = out_R / drive.eps_L
    if drive.eps_R > 0:
        ratios["rr"] = out_R / drive.eps_R
        ratios["tr"] = out_L / drive.eps_R
    return ratios, is_pole(params, den)


def fluctuation_amplitudes(
    params: SystemParams,
    drive: DriveConfig,
    delta: float,
    pole_threshold: float = POLE_THRESHOLD,
) -> FluctuationAmps:
    db, da1, da2, den = amplitude_arrays(params, drive, delta)
    if is_pole(params, den, pole_threshold):
        raise ResponsePole(f"|F1+F2| = {abs(complex(den)):.3g} at delta = {delta!r}")
    return FluctuationAmps(complex(db), complex(da1), complex(da2), float(delta))


def output_fields(amps: FluctuationAmps, drive: DriveConfig, params: SystemParams) -> OutputFields:
    out_L, out_R = output_arrays(params, drive, amps.da1, amps.da2)
    return OutputFields(complex(out_L), complex(out_R))


def _result_from_ratios(delta: float, ratios: dict) -> TransportResult:
    def power(key):
        return float(abs(ratios[key]) ** 2) if key in ratios else None

    def phase(key):
        return float(np.angle(ratios[key])) if key in ratios else None

    return TransportResult(
        delta=float(delta),
        R_l=power("rl"),
        T_l=power("tl"),
        R_r=power("rr"),
        T_r=power("tr"),
        arg_rl=phase("rl"),
        arg_tl=phase("tl"),
        arg_rr=phase("rr"),
        arg_tr=phase("tr"),
    )


def _require_probe(drive: DriveConfig) -> None:
    if drive.eps_L <= 0 and drive.eps_R <= 0:
        raise UndefinedRatio("both probe amplitudes are zero; no ratio is defined")


def transport_coefficients(params: SystemParams, drive: DriveConfig, delta: float) -> TransportResult:
    _require_probe(drive)
    amps = fluctuation_amplitudes(params, drive, delta)
    out = output_fields(amps, drive, params)
    ratios = {}
    if drive.eps_L > 0:
        ratios["rl"] = out.out_L / drive.eps_L
        ratios["tl"] = out.out_R / drive.eps_L
    if drive.eps_R > 0:
        ratios["rr"] = out.out_R / drive.eps_R
        ratios["tr"] = out.out_L / drive.eps_R
    return _result_from_ratios(delta, ratios)


def check_grid(grid) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("grid must be a nonempty 1-D sequence")
    if grid.size > 1 and not np.all(np.diff(grid) > 0):
        raise ValueError("grid must be strictly increasing")
    if not np.all(np.isfinite(grid)):
        raise ValueError("grid must be finite")
    return grid


def spectrum(params: SystemParams, drive: DriveConfig, grid) -> list[TransportResult | Marker]:
    """Transport coefficients over a detuning grid; poles become ``Marker``s."""
    _require_probe(drive)
    grid = check_grid(grid)
    ratios, poles = channel_arrays(params, drive, grid)
    results: list[TransportResult | Marker] = []
    for i, d in enumerate(grid):
        if poles[i]:
            results.append(Marker(float(d), "pole", "|F1+F2| below threshold"))
        else:
            results.append(_result_from_ratios(d, {k: v[i] for k, v in ratios.items()}))
    return results


def wrap_phase(phi):
    """Reduce to (-pi, pi]."""
    return math.pi - np.mod(math.pi - np.asarray(phi), 2 * math.pi)
