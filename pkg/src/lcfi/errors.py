"""Exception types shared across the package."""


class SingularityError(ValueError):
    """A field or potential was requested on a singular set (tube axis, Dirac string)."""


class DiracStringCrossing(SingularityError):
    """A path crosses the Dirac string of a string gauge."""

    def __init__(self, message, crossings=1):
        super().__init__(message)
        self.crossings = crossings


class GeometryError(ValueError):
    """Degenerate path or interferometer geometry."""


class QuadratureError(ArithmeticError):
    """A quadrature failed to reach its tolerance.

    ``residual`` is the last difference between successive refinements.
    """

    def __init__(self, message, residual):
        super().__init__(f"{message} (residual estimate {residual:.3e})")
        self.residual = residual


class DivergentTailError(QuadratureError):
    """An improper integral over the plane does not converge absolutely."""


class StepInstabilityError(ArithmeticError):
    """Energy drift of the particle integrator exceeded its threshold."""


class ConfigError(ValueError):
    """Invalid experiment configuration; carries the source location when known."""

    def __init__(self, message, line=None, column=None):
        loc = ""
        if line is not None:
            loc = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(loc + message)
        self.line = line
        self.column = column
