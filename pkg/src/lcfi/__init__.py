"""Potential-based vs. local field-interaction simulator for a charge coupled to a confined flux."""

from .units import NATURAL, Units
from .errors import (
    ConfigError,
    DiracStringCrossing,
    DivergentTailError,
    GeometryError,
    QuadratureError,
    SingularityError,
    StepInstabilityError,
)

__version__ = "0.1.0"

__all__ = [
    "NATURAL",
    "Units",
    "ConfigError",
    "DiracStringCrossing",
    "DivergentTailError",
    "GeometryError",
    "QuadratureError",
    "SingularityError",
    "StepInstabilityError",
    "__version__",
]
