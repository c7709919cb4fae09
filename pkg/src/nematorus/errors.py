"""Exception types shared across the package."""


class NematorusError(Exception):
    """Base class for package-specific failures."""


class InvalidRatio(NematorusError, ValueError):
    """Torus aspect ratio mu = R/r must exceed 1."""


class InvalidConstants(NematorusError, ValueError):
    """Elastic moduli must be strictly positive."""


class AmbiguousJump(NematorusError):
    """An adjacent-node angle jump reduces to ~pi/2 mod pi, so the
    line-field winding cannot be read off unambiguously (grid too
    coarse for the field)."""


class StepUnstable(NematorusError):
    """An explicit flow step increased the energy beyond roundoff;
    the time step is too large for this grid."""


class BracketInvalid(NematorusError):
    """Both endpoints of a bisection bracket classify identically."""

    def __init__(self, message, lo_class=None, hi_class=None):
        super().__init__(message)
        self.lo_class = lo_class
        self.hi_class = hi_class


class ConfigError(NematorusError):
    """Malformed run configuration (carries line/field diagnostics)."""
