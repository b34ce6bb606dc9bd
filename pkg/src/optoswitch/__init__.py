"""Photon transport in a passive-active two-cavity optomechanical system.

The public surface re-exports the parameter containers, the linear-response
solver, the analytic special cases, group delays, the verification oracles and
the sweep machinery.
"""

__version__ = "0.1.0"

from .errors import (
    OptoswitchError,
    NonPositiveParameter,
    SteadyStateDivergence,
    SingularCavityResponse,
    ResponsePole,
    UndefinedRatio,
    PoleAdjacent,
    PhaseJump,
    SingularSystem,
    UnstableSystem,
    TransientNotDecayed,
    UnknownFigure,
)
from .model import (
    PhysicalParams,
    SystemParams,
    DriveConfig,
    SteadyState,
    RegimeReport,
    derive_system_params,
    physical_steady_state,
    steady_state,
    photon_ratio_estimate,
    validate_regime,
)
from .response import (
    FluctuationAmps,
    OutputFields,
    TransportResult,
    Marker,
    fluctuation_amplitudes,
    output_fields,
    transport_coefficients,
    spectrum,
)
from .closedform import (
    CaseCondition,
    SINGLE_PROBE,
    FIPR,
    PHASE_RESONANT,
    single_probe_RT,
    fipr_RT,
    phase_resonant_RT,
)
from .delay import DelayResult, DelaySpectrum, group_delay, delay_result, delay_spectrum
from .oracle import (
    StabilityReport,
    system_matrix,
    drive_vector,
    solve_linear_response,
    system_stability,
    stable_window,
    integrate_time_domain,
)
from .sweep import SweepSpec, Dataset, run_sweep, figure_dataset, FIGURES
