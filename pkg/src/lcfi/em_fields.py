"""External fields of a confined flux tube and its vector potentials.

Geometry is planar: points are 2D, the flux (and B) point along +z.  A finite
tube of radius ``a`` carries a uniform core field Phi/(pi a^2); ``a = 0`` is
the ideal line flux and is always handled in closed form.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import SingularityError
from .expr import ScalarField
from .units import NATURAL, Units

AZIMUTHAL = "azimuthal"
DIRAC_STRING = "dirac-string"

# relative distance below which a point counts as sitting on the axis or the string
_SINGULAR_EPS = 1e-12


@dataclass(frozen=True)
class FluxTube:
    flux: float
    radius: float = 0.0
    center: tuple = (0.0, 0.0)
    flux_rate: float = 0.0

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError(f"tube radius must be >= 0, got {self.radius}")
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))

    @property
    def ideal(self) -> bool:
        return self.radius == 0.0

    def tube_at(self, t: float) -> "FluxTube":
        """Snapshot at time ``t`` for a constant flux rate (flux is the t = 0 value)."""
        if self.flux_rate == 0.0:
            return self
        return replace(self, flux=self.flux + self.flux_rate * t)

    def relative(self, points) -> np.ndarray:
        return np.asarray(points, dtype=float) - np.asarray(self.center)


@dataclass(frozen=True)
class GaugeSpec:
    """A vector-potential gauge of the flux tube.

    ``base`` is the symmetric (Coulomb) gauge or the Dirac-string gauge, the
    latter being the symmetric gauge plus chi = -Phi*theta/(2 pi) with theta
    measured counterclockwise from ``string_angle`` on [0, 2 pi).  ``chi`` holds
    additional smooth gauge functions, applied additively.
    """

    base: str = AZIMUTHAL
    string_angle: float = np.pi
    chi: tuple = field(default=())

    def __post_init__(self):
        if self.base not in (AZIMUTHAL, DIRAC_STRING):
            raise ValueError(f"unknown base gauge {self.base!r}")
        object.__setattr__(self, "chi", tuple(self.chi))

    @property
    def identifier(self) -> str:
        ident = AZIMUTHAL if self.base == AZIMUTHAL else f"{DIRAC_STRING}@{self.string_angle:.12g}"
        for c in self.chi:
            ident += f"+chi[{c.label}]"
        return ident

    @property
    def string_direction(self) -> np.ndarray:
        return np.array([np.cos(self.string_angle), np.sin(self.string_angle)])


def gauge_transform(gauge: GaugeSpec, chi) -> GaugeSpec:
    """Return ``gauge`` with A -> A + grad(chi).  ``chi`` may be an expression string."""
    if isinstance(chi, str):
        chi = ScalarField.parse(chi)
    return replace(gauge, chi=gauge.chi + (chi,))


def _polar(tube: FluxTube, points):
    d = tube.relative(points)
    rho = np.hypot(d[..., 0], d[..., 1])
    return d, rho


def _theta_hat(d, rho):
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.stack([-d[..., 1] / rho, d[..., 0] / rho], axis=-1)


def _check_axis(tube: FluxTube, rho, what: str):
    scale = max(tube.radius, 1.0)
    if np.any(rho <= _SINGULAR_EPS * scale):
        raise SingularityError(f"{what} is singular at the tube center {tube.center}")


def string_angle_of(gauge: GaugeSpec, tube: FluxTube, points) -> np.ndarray:
    """Angle of ``points`` about the tube, measured from the string direction, in [0, 2 pi)."""
    d = tube.relative(points)
    theta = np.arctan2(d[..., 1], d[..., 0]) - gauge.string_angle
    return np.mod(theta, 2 * np.pi)


def on_dirac_string(gauge: GaugeSpec, tube: FluxTube, points) -> np.ndarray:
    if gauge.base != DIRAC_STRING:
        return np.zeros(np.shape(points)[:-1], dtype=bool)
    d = tube.relative(points)
    s = gauge.string_direction
    along = d[..., 0] * s[0] + d[..., 1] * s[1]
    across = d[..., 0] * s[1] - d[..., 1] * s[0]
    rho = np.hypot(d[..., 0], d[..., 1])
    return (along > 0) & (np.abs(across) <= _SINGULAR_EPS * np.maximum(rho, 1.0))


def symmetric_potential(tube: FluxTube, points) -> np.ndarray:
    """Symmetric-gauge A: Phi/(2 pi rho) outside the core, Phi rho/(2 pi a^2) inside, azimuthal."""
    d, rho = _polar(tube, points)
    if tube.ideal:
        _check_axis(tube, rho, "vector potential")
    a = tube.radius
    with np.errstate(invalid="ignore", divide="ignore"):
        mag = np.where(rho >= a, tube.flux / (2 * np.pi * rho), tube.flux * rho / (2 * np.pi * a * a))
        # inside the core A = (Phi/(2 pi a^2)) * (-y, x), which is regular at the axis
        inside = rho < a
        out = _theta_hat(d, rho) * mag[..., None]
    if np.any(inside):
        core = tube.flux / (2 * np.pi * a * a) * np.stack([-d[..., 1], d[..., 0]], axis=-1)
        out = np.where(inside[..., None], core, out)
    return out


def string_branch_chi(gauge: GaugeSpec, tube: FluxTube, points) -> np.ndarray:
    """Single-valued (discontinuous across the string) branch of the string-gauge function."""
    return -tube.flux * string_angle_of(gauge, tube, points) / (2 * np.pi)


def vector_potential(gauge: GaugeSpec, tube: FluxTube, point) -> np.ndarray:
    """Vector potential A at ``point`` (shape (..., 2)) in ``gauge``.

    Raises SingularityError on the tube axis (ideal tube or string gauge) and
    on the Dirac string.
    """
    point = np.asarray(point, dtype=float)
    a_vec = symmetric_potential(tube, point)
    if gauge.base == DIRAC_STRING:
        d, rho = _polar(tube, point)
        _check_axis(tube, rho, "Dirac-string gauge potential")
        if np.any(on_dirac_string(gauge, tube, point)):
            raise SingularityError(
                f"point lies on the Dirac string (angle {gauge.string_angle:.6g} from {tube.center})"
            )
        a_vec = a_vec - _theta_hat(d, rho) * (tube.flux / (2 * np.pi * rho))[..., None]
    for chi in gauge.chi:
        a_vec = a_vec + chi.gradient(point)
    return a_vec


def magnetic_field(tube: FluxTube, point) -> np.ndarray:
    """B_z: Phi/(pi a^2) strictly inside the core, exactly 0 elsewhere (and everywhere for a = 0)."""
    _, rho = _polar(tube, point)
    if tube.ideal:
        return np.zeros_like(rho)
    return np.where(rho < tube.radius, tube.flux / (np.pi * tube.radius**2), 0.0)


def induced_electric_field(tube: FluxTube, point, time: float = 0.0, units: Units = NATURAL) -> np.ndarray:
    """E = -(1/c) dA/dt of the symmetric gauge for a tube with ``flux_rate`` set.

    The field is azimuthal with magnitude (dPhi/dt)/(2 pi c rho) outside the core,
    directed against the flux increase.  ``time`` is accepted for a uniform call
    signature; a constant flux rate makes E time independent.
    """
    point = np.asarray(point, dtype=float)
    if tube.flux_rate == 0.0:
        return np.zeros(point.shape)
    rate_tube = FluxTube(flux=tube.flux_rate, radius=tube.radius, center=tube.center)
    return -symmetric_potential(rate_tube, point) / units.c


def flux_through_circle(tube: FluxTube, radius: float, center=None, n: int = 64) -> float:
    """Flux of B through a circle, by radial Gauss-Legendre quadrature of the core field.

    ``center`` defaults to the tube center, where the angular integral is exact.
    """
    if center is not None and np.any(np.asarray(center, dtype=float) != np.asarray(tube.center)):
        raise NotImplementedError("only circles concentric with the tube are supported")
    if tube.ideal:
        return float(tube.flux) if radius > 0 else 0.0
    x, w = np.polynomial.legendre.leggauss(n)
    inner = min(radius, tube.radius)
    total = 0.0
    # split at the core edge where B jumps
    for lo, hi in ((0.0, inner), (inner, radius)):
        if hi <= lo:
            continue
        r = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
        pts = np.stack([r + tube.center[0], np.full_like(r, tube.center[1])], axis=-1)
        total += 0.5 * (hi - lo) * np.sum(w * magnetic_field(tube, pts) * 2 * np.pi * r)
    return float(total)


def curl_z(field_fn, point, h: float) -> float:
    """Central-difference z-curl of a planar vector field at ``point``."""
    x, y = float(point[0]), float(point[1])
    ex = np.array([h, 0.0])
    ey = np.array([0.0, h])
    p = np.array([x, y])
    day_dx = (field_fn(p + ex)[1] - field_fn(p - ex)[1]) / (2 * h)
    dax_dy = (field_fn(p + ey)[0] - field_fn(p - ey)[0]) / (2 * h)
    return float(day_dx - dax_dy)
