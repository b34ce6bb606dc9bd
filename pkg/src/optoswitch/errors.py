"""Exception hierarchy.

Everything raised on purpose by the package derives from ``OptoswitchError``;
the CLI maps these to exit code 3 (physics error).
"""


class OptoswitchError(Exception):
    """Base class for all package errors."""


class NonPositiveParameter(OptoswitchError, ValueError):
    """A strictly positive (or non-negative) parameter violated its bound."""


class SteadyStateDivergence(OptoswitchError):
    """Fixed-point iteration for the classical steady state did not converge."""


class SingularCavityResponse(OptoswitchError):
    """``kappa + i*Delta`` of a cavity is numerically zero."""


class ResponsePole(OptoswitchError):
    """The linear-response denominator ``F1 + F2`` vanishes at this detuning."""


class UndefinedRatio(OptoswitchError):
    """A ratio or phase was requested whose reference probe (or output) is zero."""


class PoleAdjacent(OptoswitchError):
    """A finite-difference stencil point sits on a response pole."""


class PhaseJump(OptoswitchError):
    """Phase changes by more than pi/2 between adjacent stencil points."""


class SingularSystem(OptoswitchError):
    """Generic linear solve hit a pivot below tolerance."""


class UnstableSystem(OptoswitchError):
    """Time-domain integration requested for a dynamically unstable system."""


class TransientNotDecayed(OptoswitchError):
    """Harmonic fit residual too large; transients have not died out."""


class UnknownFigure(OptoswitchError, KeyError):
    """Figure identifier not in the preset registry."""

    def __str__(self) -> str:  # KeyError quotes its argument otherwise
        return str(self.args[0]) if self.args else ""
