"""Exception taxonomy shared across the package.

Two broad classes exist: configuration problems (bad user input, caught
before any physics runs) and compute problems (a numerical routine could
not deliver its contract).  The CLI maps them to distinct exit codes.
"""

from __future__ import annotations


class OamFwmError(Exception):
    """Base class for every error raised by this package."""


class ConfigInvalid(OamFwmError):
    """A run configuration failed validation.

    Args:
        path: dotted path of the offending field, e.g. ``fiber.core_radius``
            or ``gratings[0].resonance.to``.
        message: human-readable diagnostic.
        line: 1-based source line of the field, when known.
        column: 1-based source column of the field, when known.
    """

    def __init__(self, path: str, message: str, line: int | None = None,
                 column: int | None = None):
        self.path = path
        self.message = message
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{path}: {message}{where}")


class ComputeError(OamFwmError):
    """Base class for failures inside numerical routines."""


# --- numerics ---------------------------------------------------------------

class NoSignChange(ComputeError):
    """Root bracketing failed: f(lo) and f(hi) have the same sign."""


class NonFinite(ComputeError):
    """A function evaluation returned NaN or infinity."""


class OutOfDomain(ComputeError):
    """Argument outside the supported domain of a special function."""


class Overflow(ComputeError):
    """A special-function value exceeded the floating-point range."""


class MaxSubdivisionsExceeded(ComputeError):
    """Adaptive quadrature hit its subdivision budget.

    The best available estimate and its error bound are attached so a
    caller can decide whether the partial result is still usable.
    """

    def __init__(self, message: str, best_estimate: complex,
                 error_estimate: float):
        self.best_estimate = best_estimate
        self.error_estimate = error_estimate
        super().__init__(f"{message} (best estimate {best_estimate!r}, "
                         f"error bound {error_estimate:.3e})")


class QuadratureFailure(ComputeError):
    """A fixed-rule quadrature could not reach the requested tolerance."""


# --- fiber modes and OAM basis ----------------------------------------------

class NotGuided(ComputeError):
    """The requested mode has no guided solution at this frequency."""


class BranchAmbiguity(ComputeError):
    """A dispersion root could not be classified as HE or EH."""


class DegenerateFlux(ComputeError):
    """A mode profile carries (numerically) zero longitudinal power."""


class UnstableMode(ComputeError):
    """The requested OAM label does not form a stable propagating mode.

    Counter-rotating combinations with |charge| = 1 mix TE and TM
    constituents whose propagation constants differ, so no z-invariant
    OAM mode of that label exists.
    """


# --- coupling and JSA ---------------------------------------------------------

class DirectionMismatch(ComputeError):
    """Grating and mode pair belong to different propagation directions."""


class DegenerateDispersion(ComputeError):
    """Two coupled modes have (numerically) equal propagation constants."""


class ForbiddenChannel(ComputeError):
    """The requested signal/idler pair violates angular-momentum selection."""


class GridTooNarrow(ComputeError):
    """A frequency window could not be widened enough to contain the JSI."""


class NoRootInWindow(ComputeError):
    """A predicted peak condition has no root inside the search window."""
