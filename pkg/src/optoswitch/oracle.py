"""Independent checks of the closed-form response.

Three routes that share no algebra with ``response``:

* a generic LU solve of the steady-harmonic linearized equations,
* eigenvalues of the linearized system matrix (dynamical stability),
* fixed-step RK4 integration in time followed by a harmonic fit.

The linearized equations read ``x' = A x + d exp(-i delta t)`` with state
``x = (delta_b, delta_a1, delta_a2)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import SingularSystem, TransientNotDecayed, UnstableSystem
from .model import DriveConfig, SystemParams
from .response import FluctuationAmps

PIVOT_TOL = 1e-14
FIT_TOL = 1e-4


def system_matrix(params: SystemParams) -> np.ndarray:
    G = params.G
    Gr = params.G * params.amplitude_ratio
    return np.array(
        [
            [-params.gamma_m, 1j * G, -1j * Gr],
            [1j * G, -params.kappa1, 0.0],
            [-1j * Gr, 0.0, -params.kappa2],
        ],
        dtype=complex,
    )


def drive_vector(drive: DriveConfig) -> np.ndarray:
    return np.array([0.0, drive.eps_L, drive.probe_right], dtype=complex)


def characteristic_polynomial(params: SystemParams) -> np.ndarray:
    """Coefficients of det(s I - A), highest power first."""
    A = system_matrix(params)
    minors = sum(
        A[i, i] * A[j, j] - A[i, j] * A[j, i] for i in range(3) for j in range(i + 1, 3)
    )
    return np.array([1.0, -np.trace(A), minors, -np.linalg.det(A)], dtype=complex)


def solve_linear_response(params: SystemParams, drive: DriveConfig, delta: float) -> FluctuationAmps:
    """Solve ``(-i delta I - A) x = d`` by LU with partial pivoting."""
    M = -1j * delta * np.eye(3) - system_matrix(params)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(M)
    smallest = np.min(np.abs(np.diag(lu)))
    if smallest < PIVOT_TOL * np.linalg.norm(M):
        raise SingularSystem(
            f"pivot {smallest:.3g} below {PIVOT_TOL:g} * ||M|| at delta = {delta!r}"
        )
    x = scipy.linalg.lu_solve((lu, piv), drive_vector(drive))
    return FluctuationAmps(complex(x[0]), complex(x[1]), complex(x[2]), float(delta))


@dataclass(frozen=True)
class StabilityReport:
    eigenvalues: tuple[complex, complex, complex]
    max_real_part: float
    stable: bool
    margin: float

    def lines(self) -> list[str]:
        out = [f"eigenvalue {k}: {ev.real:+.12g} {ev.imag:+.12g}i" for k, ev in enumerate(self.eigenvalues)]
        out.append(f"max real part: {self.max_real_part:+.12g}")
        out.append(f"verdict: {'stable' if self.stable else 'unstable'} (margin {self.margin:.6g} kappa1)")
        return out


def system_stability(params: SystemParams) -> StabilityReport:
    eig = np.linalg.eigvals(system_matrix(params))
    eig = eig[np.lexsort((eig.imag, eig.real))]
    max_re = float(eig.real.max())
    return StabilityReport(
        eigenvalues=tuple(complex(e) for e in eig),
        max_real_part=max_re,
        stable=max_re < 0,
        margin=abs(max_re) / params.kappa1,
    )


def _max_real_part(params: SystemParams, G: float) -> float:
    return system_stability(params.replace(G=G)).max_real_part


def _bisect_boundary(params: SystemParams, lo: float, hi: float, tol: float) -> float:
    f_lo = _max_real_part(params, lo)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        f_mid = _max_real_part(params, mid)
        if (f_mid < 0) == (f_lo < 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def stable_window(
    params: SystemParams,
    G_max: float = 5.0,
    samples: int = 501,
    tol: float = 1e-12,
) -> list[tuple[float, float]]:
    """Intervals of G in [0, G_max] where the linearized system is stable.

    Sign changes of the largest eigenvalue real part are located on a uniform
    scan and refined by bisection to ``tol * kappa1``. Empty if no stable G.
    """
    Gs = np.linspace(0.0, G_max, samples)
    stable = np.array([_max_real_part(params, g) < 0 for g in Gs])
    windows = []
    start = 0.0 if stable[0] else None
    for i in range(1, samples):
        if stable[i] == stable[i - 1]:
            continue
        edge = _bisect_boundary(params, Gs[i - 1], Gs[i], tol * params.kappa1)
        if stable[i]:
            start = edge
        else:
            windows.append((start, edge))
            start = None
    if start is not None:
        windows.append((start, float(G_max)))
    return [(float(a), float(b)) for a, b in windows]


@dataclass(frozen=True)
class _Plan:
    A: np.ndarray
    d: np.ndarray
    delta: float
    dt: float
    steps: int


def _plan(params, drive, delta, horizon, dt) -> _Plan:
    report = system_stability(params)
    if not report.stable:
        raise UnstableSystem(f"max real part {report.max_real_part:+.3g} >= 0")
    decay = -report.max_real_part
    if horizon is None:
        horizon = 40.0 / decay
    elif horizon < 10.0 / decay:
        raise ValueError(f"horizon {horizon:g} shorter than 10/|max Re| = {10.0 / decay:g}")
    scale = max(max(abs(e) for e in report.eigenvalues), abs(delta), params.kappa1)
    dt_max = 0.01 / scale
    if dt is None:
        dt = dt_max
    elif dt > dt_max * (1 + 1e-12):
        raise ValueError(f"dt {dt:g} exceeds 0.01/scale = {dt_max:g}")
    return _Plan(system_matrix(params), drive_vector(drive), float(delta), float(dt), math.ceil(horizon / dt))


def _rk4_step(A, d, w, t, x, dt):
    """One classical RK4 step of x' = A x + d exp(-i w t), batched over axis 0."""

    def rhs(s, y):
        return np.einsum("bij,bj->bi", A, y) + d * np.exp(-1j * w * s)[:, None]

    half = (dt / 2)[:, None]
    k1 = rhs(t, x)
    k2 = rhs(t + dt / 2, x + half * k1)
    k3 = rhs(t + dt / 2, x + half * k2)
    k4 = rhs(t + dt, x + dt[:, None] * k3)
    return x + (dt / 6)[:, None] * (k1 + 2 * k2 + 2 * k3 + k4)


def _rk4_harmonic_fit(plans: list[_Plan], max_samples: int = 2000) -> tuple[np.ndarray, np.ndarray]:
    """Integrate all plans in lockstep from x = 0; fit x(t) = x+ exp(-i delta t).

    Every system runs the same number of steps with its own dt, so each one
    covers at least its requested horizon. The fit uses the last quarter.

    The equations are linear with a harmonic drive, so one RK4 step is the
    affine map ``x -> M x + c exp(-i delta t_k)``. M and c are read off by
    applying ``_rk4_step`` once to the unit vectors (undriven) and to the
    zero state (driven); iterating the map reproduces RK4 step for step.
    """
    A = np.stack([p.A for p in plans])
    d = np.stack([p.d for p in plans])
    w = np.array([p.delta for p in plans])
    dt = np.array([p.dt for p in plans])
    batch = len(plans)
    steps = max(p.steps for p in plans)
    first = (3 * steps) // 4
    stride = max(1, (steps - first) // max_samples)

    zero_t = np.zeros(batch)
    no_drive = np.zeros_like(d)
    M = np.stack(
        [_rk4_step(A, no_drive, w, zero_t, np.tile(np.eye(3)[j], (batch, 1)).astype(complex), dt) for j in range(3)],
        axis=2,
    )
    c = _rk4_step(A, d, w, zero_t, np.zeros_like(d), dt)

    x = np.zeros_like(d)
    samples, times = [], []
    chunk = 4096
    for k0 in range(0, steps, chunk):
        ks = np.arange(k0, min(k0 + chunk, steps))
        forcing = c[:, None, :] * np.exp(-1j * w[:, None] * (ks[None, :] * dt[:, None]))[..., None]
        for j, k in enumerate(ks):
            x = np.einsum("bij,bj->bi", M, x) + forcing[:, j]
            if k + 1 >= first and (steps - k - 1) % stride == 0:
                samples.append(x)
                times.append((k + 1) * dt)

    X = np.stack(samples, axis=1)  # (batch, samples, 3)
    T = np.stack(times, axis=1)  # (batch, samples)
    carrier = np.exp(-1j * w[:, None] * T)
    x_plus = np.mean(X / carrier[..., None], axis=1)
    misfit = np.linalg.norm(X - x_plus[:, None, :] * carrier[..., None], axis=2).max(axis=1)
    return x_plus, misfit


def integrate_time_domain_batch(
    points: list[tuple[SystemParams, DriveConfig, float]],
    horizon: float | None = None,
    dt: float | None = None,
) -> list[FluctuationAmps]:
    """``integrate_time_domain`` for many points at once (vectorized RK4)."""
    plans = [_plan(p, dr, de, horizon, dt) for p, dr, de in points]
    x_plus, misfit = _rk4_harmonic_fit(plans)
    out = []
    for (_, _, delta), xp, err in zip(points, x_plus, misfit):
        size = np.linalg.norm(xp)
        if size > 0 and err > FIT_TOL * size:
            raise TransientNotDecayed(
                f"harmonic fit residual {err / size:.3g} (relative) at delta = {delta!r}"
            )
        out.append(FluctuationAmps(complex(xp[0]), complex(xp[1]), complex(xp[2]), float(delta)))
    return out


def integrate_time_domain(
    params: SystemParams,
    drive: DriveConfig,
    delta: float,
    horizon: float | None = None,
    dt: float | None = None,
) -> FluctuationAmps:
    """Steady harmonic amplitudes from direct time integration.

    Requires a stable system. ``horizon`` defaults to 40/|max Re(eig)| (at
    least 10/|max Re| if given) and ``dt`` to 0.01/max(|eig|, |delta|, kappa1).
    """
    return integrate_time_domain_batch([(params, drive, delta)], horizon, dt)[0]


def random_stable_draws(
    rng: np.random.Generator,
    count: int,
    min_margin: float = 0.2,
) -> list[tuple[SystemParams, DriveConfig, float]]:
    """Random (params, drive, delta) points whose slowest mode decays at
    least ``min_margin * kappa1``.

    Ranges (kappa1 = 1): kappa2 in [-0.5, 2] (mild gain allowed), gamma_m in
    [0.2, 2], G in [0, 2], n in [0.25, 4], delta in [-3, 3], probe amplitudes
    in (0, 1], theta in [0, 2 pi).
    """
    draws = []
    while len(draws) < count:
        params = SystemParams(
            kappa1=1.0,
            kappa2=rng.uniform(-0.5, 2.0),
            gamma_m=rng.uniform(0.2, 2.0),
            G=rng.uniform(0.0, 2.0),
            n=rng.uniform(0.25, 4.0),
        )
        drive = DriveConfig(
            eps_L=rng.uniform(0.05, 1.0),
            eps_R=rng.uniform(0.05, 1.0),
            theta=rng.uniform(0.0, 2 * math.pi),
        )
        delta = rng.uniform(-3.0, 3.0)
        if system_stability(params).max_real_part < -min_margin * params.kappa1:
            draws.append((params, drive, delta))
    return draws
