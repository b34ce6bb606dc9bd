"""Analytic reflection/transmission rates for three special configurations.

These are written out independently of ``response`` (no shared algebra) so
that each path can be used to check the other:

* single probe from the left, balanced gain/loss:  ``single_probe_RT``
* equal probes in antiphase, balanced gain/loss:   ``fipr_RT`` (R_L = 1 for every delta)
* equal resonant probes, arbitrary relative phase: ``phase_resonant_RT``

"Balanced" means kappa1 = -kappa2 = gamma_m = kappa with n = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ResponsePole
from .model import DriveConfig, SystemParams
from .response import POLE_THRESHOLD


def _check_pole(den, kappa: float) -> None:
    if np.any(np.abs(den) < POLE_THRESHOLD * kappa**3):
        raise ResponsePole("closed-form denominator below pole threshold")


def _unwrap_scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def single_probe_RT(G, kappa, delta):
    """(R_L, T_L) for a lone left probe."""
    d = np.asarray(delta, dtype=float)
    lorentz = kappa**2 + d**2
    den = (kappa - 1j * d) * lorentz + 2j * G**2 * d
    _check_pole(den, kappa)
    num_r = (kappa + 1j * d) * lorentz - 2j * G**2 * d - 2 * kappa * G**2
    num_t = 2 * kappa * G**2
    R = np.abs(num_r / den) ** 2
    T = np.abs(num_t / den) ** 2
    return _unwrap_scalar(R), _unwrap_scalar(T)


def fipr_RT(G, kappa, delta):
    """(R_L, T_L) for equal antiphase probes; R_L is identically one."""
    d = np.asarray(delta, dtype=float)
    den = 2j * G**2 * d + (kappa - 1j * d) ** 2 * (kappa + 1j * d)
    _check_pole(den, kappa)
    num = 2j * G**2 * d - (kappa - 1j * d) ** 3
    T = np.abs(num / den) ** 2
    R = np.ones_like(T)
    return _unwrap_scalar(R), _unwrap_scalar(T)


def phase_resonant_RT(G, kappa, theta):
    """(R_L, T_L) at delta = 0 for equal probes with relative phase ``theta``."""
    phase = np.exp(1j * np.asarray(theta, dtype=float))
    coupling = 2 * G**2 * (1 + phase) / kappa**2
    R = np.abs(1 - coupling) ** 2
    T = np.abs(phase + coupling) ** 2
    return _unwrap_scalar(R), _unwrap_scalar(T)


@dataclass(frozen=True)
class CaseCondition:
    """A named special configuration and the constraints it imposes.

    ``constraints`` lists (name, value) pairs; ``kappa`` in a value stands for
    kappa1. ``delta`` constraints only apply when a detuning is supplied.
    """

    case_id: str
    constraints: tuple[tuple[str, str], ...]

    def matches(
        self,
        params: SystemParams,
        drive: DriveConfig,
        delta: float | None = None,
        tol: float = 1e-12,
    ) -> bool:
        k = params.kappa1

        def close(a, b, scale=1.0):
            return abs(a - b) <= tol * max(scale, abs(b))

        checks = {
            "kappa2": close(params.kappa2, -k, k),
            "gamma_m": close(params.gamma_m, k, k),
            "n": close(params.n, 1.0),
            "eps_R": drive.eps_R == 0.0,
            "eps_L=eps_R": drive.eps_L > 0 and close(drive.eps_L, drive.eps_R, drive.eps_L),
            "theta": close(math.remainder(drive.theta - math.pi, 2 * math.pi), 0.0),
            "delta": True if delta is None else close(delta, 0.0, k),
        }
        return all(checks[name] for name, _ in self.constraints)

    def build(self, G: float, kappa: float = 1.0, theta: float | None = None) -> tuple[SystemParams, DriveConfig]:
        """Parameters and drive realising this case at coupling ``G``."""
        params = SystemParams(kappa1=kappa, kappa2=-kappa, gamma_m=kappa, G=G, n=1.0)
        if self.case_id == "SingleProbe":
            drive = DriveConfig(eps_L=1.0, eps_R=0.0, theta=0.0)
        elif self.case_id == "FIPR":
            drive = DriveConfig(eps_L=1.0, eps_R=1.0, theta=math.pi)
        else:
            drive = DriveConfig(eps_L=1.0, eps_R=1.0, theta=0.0 if theta is None else theta)
        return params, drive


_BALANCED = (("kappa2", "-kappa"), ("gamma_m", "kappa"), ("n", "1"))

SINGLE_PROBE = CaseCondition("SingleProbe", (("eps_R", "0"),) + _BALANCED)
FIPR = CaseCondition("FIPR", (("eps_L=eps_R", "eps_L"), ("theta", "pi")) + _BALANCED)
PHASE_RESONANT = CaseCondition("PhaseResonant", (("eps_L=eps_R", "eps_L"), ("delta", "0")) + _BALANCED)

CASES = (SINGLE_PROBE, FIPR, PHASE_RESONANT)


def classify(params: SystemParams, drive: DriveConfig, delta: float | None = None) -> str | None:
    """First matching case id, or None."""
    for case in CASES:
        if case.matches(params, drive, delta):
            return case.case_id
    return None
