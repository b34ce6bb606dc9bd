"""Physical parameters, classical steady state and regime checks.

Rates are angular frequencies. A ``SystemParams`` instance carries its own
rate unit (``rate_unit``, rad/s per unit) so the same container serves both
SI inputs (``rate_unit == 1``) and the normalized kappa-units used by every
figure (``rate_unit == kappa1`` in rad/s).

Gain in the right cavity is encoded by a negative ``kappa2``; the value is
used with its sign everywhere except under the square root of the
power-to-amplitude conversion, where ``|kappa2|`` is taken.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT
from scipy.constants import hbar as HBAR

from .errors import NonPositiveParameter, SingularCavityResponse, SteadyStateDivergence

# Fig. 2 parameter set (membrane-in-the-middle device)
DEVICE_CAVITY_LENGTH = 25e-3
DEVICE_MASS = 145e-12
DEVICE_KAPPA = 2 * math.pi * 215e3
DEVICE_OMEGA_M = 2 * math.pi * 947e3
# not given with the parameter set; a common Nd:YAG drive
DEFAULT_WAVELENGTH = 1064e-9


def _require_positive(**values: float) -> None:
    for name, value in values.items():
        if not (value > 0 and math.isfinite(value)):
            raise NonPositiveParameter(f"{name} must be finite and > 0, got {value!r}")


def _require_nonnegative(**values: float) -> None:
    for name, value in values.items():
        if not (value >= 0 and math.isfinite(value)):
            raise NonPositiveParameter(f"{name} must be finite and >= 0, got {value!r}")


@dataclass(frozen=True)
class PhysicalParams:
    """Device parameters in SI units (rates in rad/s, powers in W)."""

    cavity_length: float
    mass: float
    cavity_freq: float
    mech_freq: float
    control_freq: float
    kappa1: float
    kappa2: float
    gamma_m: float
    control_power1: float = 0.0
    control_power2: float = 0.0
    probe_power1: float = 0.0
    probe_power2: float = 0.0

    def __post_init__(self) -> None:
        _require_positive(
            cavity_length=self.cavity_length,
            mass=self.mass,
            cavity_freq=self.cavity_freq,
            mech_freq=self.mech_freq,
            control_freq=self.control_freq,
            kappa1=self.kappa1,
            gamma_m=self.gamma_m,
        )
        _require_nonnegative(
            control_power1=self.control_power1,
            control_power2=self.control_power2,
            probe_power1=self.probe_power1,
            probe_power2=self.probe_power2,
        )
        if not math.isfinite(self.kappa2):
            raise NonPositiveParameter(f"kappa2 must be finite, got {self.kappa2!r}")

    @property
    def q_factor(self) -> float:
        return self.mech_freq / self.gamma_m

    @property
    def g0(self) -> float:
        """Single-photon optomechanical coupling, rad/s."""
        zpf = math.sqrt(HBAR / (2.0 * self.mass * self.mech_freq))
        return self.cavity_freq * zpf / self.cavity_length

    @property
    def probe_freq(self) -> float:
        return self.cavity_freq

    @classmethod
    def reference(
        cls,
        control_power1: float = 1e-3,
        control_power2: float | None = None,
        wavelength: float = DEFAULT_WAVELENGTH,
        kappa2: float = -DEVICE_KAPPA,
        gamma_m: float = DEVICE_KAPPA,
    ) -> PhysicalParams:
        """Fig. 2 device, control fields on the red sideband (Delta0 = omega_m).

        ``control_power2`` defaults to ``control_power1``.
        """
        control_freq = 2 * math.pi * SPEED_OF_LIGHT / wavelength
        return cls(
            cavity_length=DEVICE_CAVITY_LENGTH,
            mass=DEVICE_MASS,
            cavity_freq=control_freq + DEVICE_OMEGA_M,
            mech_freq=DEVICE_OMEGA_M,
            control_freq=control_freq,
            kappa1=DEVICE_KAPPA,
            kappa2=kappa2,
            gamma_m=gamma_m,
            control_power1=control_power1,
            control_power2=control_power1 if control_power2 is None else control_power2,
        )


@dataclass(frozen=True)
class SystemParams:
    """Rates and effective couplings entering the linearized equations.

    ``G`` is the effective coupling ``g0 |a1s|`` and ``n = |a2s/a1s|**2`` the
    intracavity photon-number ratio. ``delta0`` defaults to ``omega_m`` (red
    sideband). ``g0`` is optional and only needed for steady-state work.
    """

    kappa1: float = 1.0
    kappa2: float = -1.0
    gamma_m: float = 1.0
    omega_m: float = DEVICE_OMEGA_M / DEVICE_KAPPA
    G: float = 0.0
    n: float = 1.0
    delta0: float | None = None
    g0: float | None = None
    rate_unit: float = field(default=1.0, compare=False)

    def __post_init__(self) -> None:
        _require_positive(
            kappa1=self.kappa1,
            gamma_m=self.gamma_m,
            omega_m=self.omega_m,
            rate_unit=self.rate_unit,
        )
        _require_nonnegative(G=self.G, n=self.n)
        if not math.isfinite(self.kappa2):
            raise NonPositiveParameter(f"kappa2 must be finite, got {self.kappa2!r}")
        if self.g0 is not None:
            _require_nonnegative(g0=self.g0)
        if self.delta0 is None:
            object.__setattr__(self, "delta0", self.omega_m)

    @property
    def amplitude_ratio(self) -> float:
        """``|a2s/a1s|`` = sqrt(n); multiplies G in the right-cavity coupling."""
        return math.sqrt(self.n)

    @property
    def q_factor(self) -> float:
        return self.omega_m / self.gamma_m

    def replace(self, **changes) -> SystemParams:
        return replace(self, **changes)

    def normalized(self) -> SystemParams:
        """Same physics with every rate expressed in units of kappa1."""
        k = self.kappa1
        return SystemParams(
            kappa1=1.0,
            kappa2=self.kappa2 / k,
            gamma_m=self.gamma_m / k,
            omega_m=self.omega_m / k,
            G=self.G / k,
            n=self.n,
            delta0=self.delta0 / k,
            g0=None if self.g0 is None else self.g0 / k,
            rate_unit=self.rate_unit * k,
        )

    def to_seconds(self, tau):
        """Convert a delay expressed in 1/(rate unit) to seconds."""
        return tau / self.rate_unit


@dataclass(frozen=True)
class DriveConfig:
    """Probe amplitudes (real, >= 0), relative probe phase, control amplitudes.

    Only ratios of the probe amplitudes matter for every reported quantity.
    """

    eps_L: float = 1.0
    eps_R: float = 0.0
    theta: float = 0.0
    eps_cL: float | None = None
    eps_cR: float | None = None

    def __post_init__(self) -> None:
        _require_nonnegative(eps_L=self.eps_L, eps_R=self.eps_R)
        for name in ("eps_cL", "eps_cR"):
            value = getattr(self, name)
            if value is not None:
                _require_nonnegative(**{name: value})
        if not math.isfinite(self.theta):
            raise NonPositiveParameter(f"theta must be finite, got {self.theta!r}")

    @property
    def probe_right(self) -> complex:
        """Complex right-probe drive ``eps_R * exp(i theta)``."""
        return self.eps_R * complex(math.cos(self.theta), math.sin(self.theta))

    @property
    def theta_reduced(self) -> float:
        return self.theta % (2 * math.pi)

    def replace(self, **changes) -> DriveConfig:
        return replace(self, **changes)


_B_FLOOR = 1e-300  # amplitudes below this count as zero (tol * |b| would underflow)


@dataclass(frozen=True)
class SteadyState:
    b_s: complex
    a1s: complex
    a2s: complex
    delta1: float
    delta2: float

    @property
    def photon_ratio(self) -> float:
        if self.a1s == 0:
            return math.nan
        return abs(self.a2s) ** 2 / abs(self.a1s) ** 2

    def residual(self, params: SystemParams, drive: DriveConfig) -> float:
        """Largest relative mismatch when the state is fed back through the
        steady-state equations."""
        a1, a2, _, _ = _cavity_amplitudes(params, drive, self.b_s.real)
        b_new = _mechanical_amplitude(params, a1, a2)
        worst = 0.0
        for old, new in ((self.b_s, b_new), (self.a1s, a1), (self.a2s, a2)):
            scale = max(abs(old), abs(new))
            if scale > _B_FLOOR:
                worst = max(worst, abs(new - old) / scale)
        return worst


def control_amplitudes(phys: PhysicalParams) -> tuple[float, float]:
    """Control-field amplitudes from powers, using |kappa2| for the gain cavity."""
    photon_energy = HBAR * phys.control_freq
    eps_cL = math.sqrt(2.0 * phys.kappa1 * phys.control_power1 / photon_energy)
    eps_cR = math.sqrt(2.0 * abs(phys.kappa2) * phys.control_power2 / photon_energy)
    return eps_cL, eps_cR


def _mechanical_amplitude(params: SystemParams, a1: complex, a2: complex) -> complex:
    g0 = params.g0 or 0.0
    return -1j * g0 * (abs(a2) ** 2 - abs(a1) ** 2) / complex(params.gamma_m, params.omega_m)


def _cavity_amplitudes(params: SystemParams, drive: DriveConfig, re_b: float):
    g0 = params.g0 or 0.0
    delta1 = params.delta0 - 2.0 * g0 * re_b
    delta2 = params.delta0 + 2.0 * g0 * re_b
    den1 = complex(params.kappa1, delta1)
    den2 = complex(params.kappa2, delta2)
    floor = 1e-15 * params.omega_m
    if abs(den1) < floor or abs(den2) < floor:
        raise SingularCavityResponse(
            f"|kappa + i Delta| below {floor:.3g} (den1={den1}, den2={den2})"
        )
    a1 = (drive.eps_cL or 0.0) / den1
    a2 = (drive.eps_cR or 0.0) / den2
    return a1, a2, delta1, delta2


def steady_state(
    params: SystemParams,
    drive: DriveConfig,
    *,
    max_iter: int = 1000,
    tol: float = 1e-12,
    damping: float = 0.5,
) -> SteadyState:
    """Self-consistent classical amplitudes (b_s, a1s, a2s).

    The effective detunings ``Delta0 -/+ 2 g0 Re(b_s)`` feed back into the
    cavity amplitudes, so the system is solved by damped fixed-point iteration
    on ``b_s``.
    """
    b = 0j
    for _ in range(max_iter):
        a1, a2, d1, d2 = _cavity_amplitudes(params, drive, b.real)
        b_new = _mechanical_amplitude(params, a1, a2)
        step = b_new - b
        if abs(step) <= max(tol * abs(b_new), _B_FLOOR):
            return SteadyState(b, a1, a2, d1, d2)
        if not np.isfinite(b_new):
            break
        b = b + damping * step
    raise SteadyStateDivergence(
        f"steady state not converged after {max_iter} iterations (last b_s={b})"
    )


def physical_steady_state(phys: PhysicalParams, drive: DriveConfig | None = None) -> tuple[SystemParams, SteadyState]:
    """Classical steady state of a device, with its (G, n)-free parameters.

    Control amplitudes given in ``drive`` take precedence over the powers in
    ``phys``. Everything is in rad/s.
    """
    eps_cL, eps_cR = control_amplitudes(phys)
    if drive is not None:
        eps_cL = eps_cL if drive.eps_cL is None else drive.eps_cL
        eps_cR = eps_cR if drive.eps_cR is None else drive.eps_cR
    base = SystemParams(
        kappa1=phys.kappa1,
        kappa2=phys.kappa2,
        gamma_m=phys.gamma_m,
        omega_m=phys.mech_freq,
        G=0.0,
        n=1.0,
        delta0=phys.cavity_freq - phys.control_freq,
        g0=phys.g0,
    )
    return base, steady_state(base, DriveConfig(eps_cL=eps_cL, eps_cR=eps_cR))


def derive_system_params(phys: PhysicalParams, drive: DriveConfig | None = None) -> SystemParams:
    """Map device parameters to (G, n) through the classical steady state.

    The result is in rad/s (``rate_unit == 1``).
    """
    base, ss = physical_steady_state(phys, drive)
    if ss.a1s == 0:
        if ss.a2s != 0:
            warnings.warn(
                "left cavity is undriven; the right-cavity coupling cannot be "
                "expressed through (G, n) and is dropped",
                RuntimeWarning,
                stacklevel=2,
            )
        n = 1.0 if ss.a2s == 0 else 0.0
    else:
        n = ss.photon_ratio
    return base.replace(G=phys.g0 * abs(ss.a1s), n=n)


def photon_ratio_estimate(params: SystemParams, drive: DriveConfig) -> float:
    """Approximate photon-number ratio with both effective detunings set to omega_m.

    Valid for g0 << omega_m; ``steady_state`` gives the exact value.
    """
    if params.g0 is not None and 10.0 * params.g0 > params.omega_m:
        warnings.warn(
            f"g0={params.g0:.3g} is not << omega_m={params.omega_m:.3g}; "
            "photon-ratio estimate unreliable",
            RuntimeWarning,
            stacklevel=2,
        )
    eps_cL = drive.eps_cL or 0.0
    eps_cR = drive.eps_cR or 0.0
    wm2 = params.omega_m**2
    num = eps_cR**2 * (params.kappa1**2 + wm2)
    den = eps_cL**2 * (params.kappa2**2 + wm2)
    if den == 0:
        return math.nan if num == 0 else math.inf
    return num / den


@dataclass(frozen=True)
class RegimeReport:
    """Informative check of the approximations behind the linear response.

    ``>>`` conditions pass when the margin is at least ``much_greater``;
    ``~=`` conditions pass when the relative offset is at most ``approx_tol``.
    """

    resolved_sideband: bool
    sideband_margin: float
    high_q: bool
    q_factor: float
    rwa_valid: bool
    rwa_margins: tuple[float, float]
    red_detuned: bool
    detuning_offsets: tuple[float, float]
    ratio_term_negligible: bool | None
    ratio_term: float
    much_greater: float = 10.0
    approx_tol: float = 0.05

    def lines(self) -> list[str]:
        def flag(value):
            return "n/a" if value is None else ("yes" if value else "NO")

        return [
            f"resolved sideband   {flag(self.resolved_sideband):>4}  omega_m/|kappa| = {self.sideband_margin:.6g}",
            f"high Q              {flag(self.high_q):>4}  Q = {self.q_factor:.6g}",
            "RWA valid           {:>4}  omega_m/(g0|a1s|) = {:.6g}, omega_m/(g0|a2s|) = {:.6g}".format(
                flag(self.rwa_valid), *self.rwa_margins
            ),
            "red detuned         {:>4}  |Delta1-omega_m|/omega_m = {:.6g}, |Delta2-omega_m|/omega_m = {:.6g}".format(
                flag(self.red_detuned), *self.detuning_offsets
            ),
            f"feedback negligible {flag(self.ratio_term_negligible):>4}  2 g0 Re(b_s)/Delta0 = {self.ratio_term:.6g}",
        ]


def _safe_ratio(num: float, den: float) -> float:
    return math.inf if den == 0 else num / den


def validate_regime(
    params: SystemParams,
    ss: SteadyState | None = None,
    *,
    much_greater: float = 10.0,
    approx_tol: float = 0.05,
) -> RegimeReport:
    """Check resolved-sideband, high-Q, RWA and red-detuning assumptions.

    Without a steady state the check falls back to ``G`` and ``n``: the
    detunings are taken as ``delta0`` and the feedback term is evaluated only
    when it is determined (equal photon numbers, or ``g0`` known).
    """
    wm = params.omega_m
    sideband = wm / max(abs(params.kappa1), abs(params.kappa2))
    q = params.q_factor

    if ss is not None and params.g0 is not None:
        c1, c2 = params.g0 * abs(ss.a1s), params.g0 * abs(ss.a2s)
    else:
        c1, c2 = params.G, params.G * params.amplitude_ratio
    rwa = (_safe_ratio(wm, c1), _safe_ratio(wm, c2))

    if ss is not None:
        d1, d2 = ss.delta1, ss.delta2
        b_s = ss.b_s
    else:
        d1 = d2 = params.delta0
        if params.n == 1.0:
            b_s = 0j
        elif params.g0:
            n1 = (params.G / params.g0) ** 2
            b_s = -1j * params.g0 * (params.n * n1 - n1) / complex(params.gamma_m, wm)
        else:
            b_s = None
    offsets = (abs(d1 - wm) / wm, abs(d2 - wm) / wm)

    if b_s is None:
        ratio_term, negligible = math.nan, None
    else:
        ratio_term = 2.0 * (params.g0 or 0.0) * b_s.real / params.delta0
        negligible = abs(ratio_term) * much_greater <= 1.0

    return RegimeReport(
        resolved_sideband=sideband >= much_greater,
        sideband_margin=sideband,
        high_q=q >= much_greater,
        q_factor=q,
        rwa_valid=min(rwa) >= much_greater,
        rwa_margins=rwa,
        red_detuned=max(offsets) <= approx_tol,
        detuning_offsets=offsets,
        ratio_term_negligible=negligible,
        ratio_term=ratio_term,
        much_greater=much_greater,
        approx_tol=approx_tol,
    )
