"""Exception hierarchy."""


class Darboux1dError(Exception):
    """Base class for all package errors."""


class ConfigError(Darboux1dError):
    """Bad run configuration (unknown keys, missing values, bad types)."""


class NumericsError(Darboux1dError):
    """A numerical stage failed."""


class IntegrationBlowupError(NumericsError):
    """Potential singular or solution blow-up during integration."""

    def __init__(self, x, detail=""):
        self.x = x
        msg = f"potential singular or solution blow-up near x = {x:.12g}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class PotentialRegularityError(NumericsError):
    """Potential has a pole or is otherwise not evaluable on the interval."""


class DegenerateCaseError(NumericsError):
    """Construction degenerates for these parameters; an alternative route exists."""


class WronskianZeroError(NumericsError):
    """Transformation Wronskian vanishes inside the open interval."""

    def __init__(self, x, detail=""):
        self.x = x
        msg = f"Wronskian vanishes on (a, b) near x = {x:.12g}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class NotAnEigenvalueError(NumericsError):
    """Requested level is not a spectral point within tolerance."""


class AmbiguousWindingError(NumericsError):
    """Contour winding number did not settle near an integer."""


class RootOnContourError(NumericsError):
    """A characteristic-function root sits on the integration contour."""


class ScanWarning(UserWarning):
    """Non-fatal spectral-scan diagnostics (e.g. scan step too coarse)."""
