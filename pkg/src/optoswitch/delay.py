"""Group delays of the four output channels.

The delay of channel ``m`` is the slope of its output phase with respect to
the probe frequency. With the cavity frequency fixed, d/d(omega_p) equals
d/d(delta), so every delay here is a derivative in ``delta`` and carries units
of 1/(rate unit of the params). Positive means slow light.

Derivatives are central differences on locally unwrapped phases with one
Richardson step (h and h/2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import PhaseJump, PoleAdjacent, ResponsePole, UndefinedRatio
from .model import DriveConfig, SystemParams
from .response import Marker, channel_arrays, check_grid, wrap_phase

CHANNELS = ("rl", "tl", "rr", "tr")
DEFAULT_STEP = 1e-6
PHASE_JUMP_LIMIT = math.pi / 2

# per-point status bits, shared with sweep datasets
OK = 0
POLE = 1
UNDEFINED = 2
POLE_ADJACENT = 4
PHASE_JUMP = 8

_STATUS_KIND = {POLE: "pole", UNDEFINED: "undefined", POLE_ADJACENT: "pole_adjacent", PHASE_JUMP: "phase_jump"}


def _channel_ratio(params: SystemParams, drive: DriveConfig, deltas, channel: str):
    if channel not in CHANNELS:
        raise ValueError(f"unknown channel {channel!r}; expected one of {CHANNELS}")
    ratios, poles = channel_arrays(params, drive, deltas)
    if channel not in ratios:
        raise UndefinedRatio(f"channel {channel} needs a nonzero reference probe")
    return ratios[channel], poles


def _central_difference(params, drive, centers, channel, h):
    """Slope and status for a symmetric three-point stencil at each center."""
    lo, poles_lo = _channel_ratio(params, drive, centers - h, channel)
    mid, poles_mid = _channel_ratio(params, drive, centers, channel)
    hi, poles_hi = _channel_ratio(params, drive, centers + h, channel)

    status = np.zeros(centers.shape, dtype=np.int64)
    status[poles_lo | poles_hi] |= POLE_ADJACENT
    status[poles_mid] |= POLE
    zero = (lo == 0) | (mid == 0) | (hi == 0)
    status[zero & (status == OK)] |= UNDEFINED

    with np.errstate(invalid="ignore"):
        up = wrap_phase(np.angle(hi) - np.angle(mid))
        down = wrap_phase(np.angle(mid) - np.angle(lo))
    jump = (np.abs(up) > PHASE_JUMP_LIMIT) | (np.abs(down) > PHASE_JUMP_LIMIT)
    status[jump & (status == OK)] |= PHASE_JUMP

    slope = (up + down) / (2.0 * h)
    slope[status != OK] = np.nan
    return slope, status


def delay_arrays(
    params: SystemParams,
    drive: DriveConfig,
    deltas,
    channel: str,
    h: float | None = None,
    richardson: bool = True,
):
    """Vectorized group delay with per-point status codes."""
    centers = np.atleast_1d(np.asarray(deltas, dtype=float))
    h = DEFAULT_STEP * params.kappa1 if h is None else float(h)
    if not h > 0:
        raise ValueError("step h must be > 0")
    coarse, status = _central_difference(params, drive, centers, channel, h)
    if not richardson:
        return coarse, status
    fine, status_fine = _central_difference(params, drive, centers, channel, h / 2)
    status = status | status_fine
    tau = (4.0 * fine - coarse) / 3.0
    tau[status != OK] = np.nan
    return tau, status


def refined_delay_arrays(
    params: SystemParams,
    drive: DriveConfig,
    deltas,
    channel: str,
    h: float | None = None,
    max_refine: int = 2,
):
    """``delay_arrays`` with points flagged PHASE_JUMP retried at h/10, h/100, ..."""
    deltas = np.atleast_1d(np.asarray(deltas, dtype=float))
    step = DEFAULT_STEP * params.kappa1 if h is None else float(h)
    tau, status = delay_arrays(params, drive, deltas, channel, step)
    for _ in range(max_refine):
        retry = status == PHASE_JUMP
        if not retry.any():
            break
        step /= 10.0
        tau[retry], status[retry] = delay_arrays(params, drive, deltas[retry], channel, step)
    return tau, status


def _raise_for_status(code: int, delta: float, channel: str) -> None:
    if code & POLE:
        raise ResponsePole(f"delta = {delta!r} is a response pole")
    if code & POLE_ADJACENT:
        raise PoleAdjacent(f"stencil around delta = {delta!r} touches a response pole")
    if code & UNDEFINED:
        raise UndefinedRatio(f"output of channel {channel} vanishes near delta = {delta!r}")
    if code & PHASE_JUMP:
        raise PhaseJump(f"phase of channel {channel} jumps by > pi/2 inside the stencil at delta = {delta!r}; shrink h")


def group_delay(
    params: SystemParams,
    drive: DriveConfig,
    delta: float,
    channel: str = "rl",
    h: float | None = None,
    richardson: bool = True,
) -> float:
    """Group delay of ``channel`` at ``delta`` in 1/(rate unit).

    Use ``params.to_seconds`` for seconds.
    """
    tau, status = delay_arrays(params, drive, [delta], channel, h, richardson)
    _raise_for_status(int(status[0]), delta, channel)
    return float(tau[0])


@dataclass(frozen=True)
class DelayResult:
    """Delays of all four channels at one detuning (``None`` if undefined)."""

    delta: float
    tau_rl: float | None
    tau_tl: float | None
    tau_rr: float | None
    tau_tr: float | None
    unwrap_branch: dict

    @property
    def tau_L(self) -> float | None:
        return self.tau_rl

    @property
    def tau_R(self) -> float | None:
        return self.tau_tl


def delay_result(params: SystemParams, drive: DriveConfig, delta: float, h: float | None = None) -> DelayResult:
    taus = {}
    for channel in CHANNELS:
        try:
            taus[channel] = group_delay(params, drive, delta, channel, h)
        except (UndefinedRatio, PhaseJump, PoleAdjacent):
            taus[channel] = None
    return DelayResult(
        delta=float(delta),
        tau_rl=taus["rl"],
        tau_tl=taus["tl"],
        tau_rr=taus["rr"],
        tau_tr=taus["tr"],
        unwrap_branch={c: 0 for c in CHANNELS},
    )


def unwrap_valid(phase: np.ndarray) -> np.ndarray:
    """Unwrap across the finite entries only; NaNs stay in place."""
    phase = np.asarray(phase, dtype=float)
    out = phase.copy()
    valid = np.isfinite(phase)
    if valid.any():
        out[valid] = np.unwrap(phase[valid])
    return out


@dataclass(frozen=True)
class DelaySpectrum:
    """Delay of one channel over a grid.

    ``phase`` is the globally unwrapped output phase and ``branch`` the number
    of 2*pi turns added to the principal value at each point. ``tau`` is NaN
    exactly where ``status`` is nonzero.
    """

    channel: str
    delta: np.ndarray
    tau: np.ndarray
    status: np.ndarray
    phase: np.ndarray
    branch: np.ndarray

    def points(self) -> list[tuple[float, float | Marker]]:
        out = []
        for d, t, s in zip(self.delta, self.tau, self.status):
            s = int(s)
            if s == OK:
                out.append((float(d), float(t)))
            else:
                kind = _STATUS_KIND[s & -s]  # lowest set bit
                out.append((float(d), Marker(float(d), kind)))
        return out


def delay_spectrum(
    params: SystemParams,
    drive: DriveConfig,
    grid,
    channel: str = "rl",
    h: float | None = None,
    max_refine: int = 2,
) -> DelaySpectrum:
    """Delay over a strictly increasing grid.

    Points whose stencil straddles a phase jump are retried with a step ten
    times smaller, up to ``max_refine`` times, before being marked.
    """
    grid = check_grid(grid)
    ratio, poles = _channel_ratio(params, drive, grid, channel)
    raw = np.angle(ratio).astype(float)
    raw[poles | (ratio == 0)] = np.nan
    phase = unwrap_valid(raw)
    with np.errstate(invalid="ignore"):
        branch = np.where(np.isfinite(phase), np.rint((phase - raw) / (2 * math.pi)), 0).astype(np.int64)

    tau, status = refined_delay_arrays(params, drive, grid, channel, h, max_refine)
    return DelaySpectrum(channel, grid, tau, status, phase, branch)
