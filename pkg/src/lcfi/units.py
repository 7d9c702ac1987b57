"""Gaussian unit constants.

The default instance is natural mode (hbar = c = e = 1), in which q*flux/(hbar*c)
is directly the dimensionless Aharonov-Bohm phase.
"""

from dataclasses import dataclass


@dataclass(frozen=True)
class Units:
    hbar: float = 1.0
    c: float = 1.0
    e: float = 1.0  # elementary charge, used by the Andreev device

    def __post_init__(self):
        for name in ("hbar", "c", "e"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)!r}")

    @property
    def natural(self) -> bool:
        return self.hbar == 1.0 and self.c == 1.0 and self.e == 1.0


NATURAL = Units()
