"""Classical motion under the Lorentz force and the conservation checks of a flux ramp.

The integrator splits each step into a half drift, a half electric kick, an
exact magnetic rotation, a half kick and a half drift.  It is second order and
preserves the speed to rounding in a pure magnetic field.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import trapezoid

from .em_fields import FluxTube, induced_electric_field, magnetic_field
from .errors import GeometryError, StepInstabilityError
from .field_interaction import ChargeState, field_momentum
from .quadrature import gauss_legendre
from .trajectories import Trajectory, winding_number
from .units import NATURAL, Units

LINEAR = "linear"
SMOOTHSTEP = "smoothstep"


@dataclass(frozen=True)
class DynamicsConfig:
    dt: float
    total_time: float
    order: int = 2
    energy_drift_tol: float = 1e-9  # relative kinetic-energy drift allowed in a static field

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.total_time < self.dt:
            raise ValueError("total_time must be at least one step")
        if self.order != 2:
            raise ValueError("only the second-order split integrator is available")

    @property
    def steps(self) -> int:
        return int(round(self.total_time / self.dt))


@dataclass(frozen=True)
class FluxRamp:
    """Flux switched from ``flux_start`` to ``flux_end`` over [0, duration]; constant outside."""

    flux_start: float
    flux_end: float
    duration: float
    profile: str = SMOOTHSTEP
    radius: float = 0.0
    center: tuple = (0.0, 0.0)

    def __post_init__(self):
        if self.profile not in (LINEAR, SMOOTHSTEP):
            raise ValueError(f"unknown ramp profile {self.profile!r}")
        if not self.duration > 0:
            raise ValueError("ramp duration must be positive")

    def _shape(self, t):
        s = np.clip(np.asarray(t, dtype=float) / self.duration, 0.0, 1.0)
        if self.profile == LINEAR:
            return s, np.where((t >= 0) & (t <= self.duration), 1.0, 0.0) / self.duration
        return s * s * (3 - 2 * s), 6 * s * (1 - s) / self.duration

    def flux(self, t):
        return self.flux_start + (self.flux_end - self.flux_start) * self._shape(t)[0]

    def rate(self, t):
        return (self.flux_end - self.flux_start) * self._shape(t)[1]

    def tube_at(self, t: float) -> FluxTube:
        return FluxTube(float(self.flux(t)), self.radius, self.center, float(self.rate(t)))


def lorentz_force(charge: ChargeState, tube: FluxTube, time: float = 0.0, units: Units = NATURAL) -> np.ndarray:
    """q (E + v x B / c) in the plane, B along z."""
    b = float(magnetic_field(tube, charge.position))
    v = charge.velocity
    e = induced_electric_field(tube, charge.position, time, units) if tube.flux_rate else np.zeros(2)
    return charge.charge * (e + np.array([v[1] * b, -v[0] * b]) / units.c)


def _tube_source(tube):
    return tube.tube_at if isinstance(tube, FluxRamp) else (lambda t: tube)


def integrate_trajectory(initial: ChargeState, tube: FluxTube | FluxRamp, config: DynamicsConfig,
                         units: Units = NATURAL, t0: float = 0.0) -> Trajectory:
    """Integrate the equation of motion from ``initial``.

    ``tube`` may be a static FluxTube or a FluxRamp.  For a static tube the
    relative kinetic-energy drift is checked against the configured tolerance.
    """
    snapshot = _tube_source(tube)
    static = not isinstance(tube, FluxRamp) and tube.flux_rate == 0.0
    q, m, c = initial.charge, initial.mass, units.c
    h = config.dt
    n = config.steps
    pos = np.empty((n + 1, 2))
    vel = np.empty((n + 1, 2))
    pos[0], vel[0] = initial.position, initial.velocity
    x, y = float(pos[0, 0]), float(pos[0, 1])
    vx, vy = float(vel[0, 0]), float(vel[0, 1])
    for k in range(n):
        t_half = t0 + (k + 0.5) * h
        xh, yh = x + 0.5 * h * vx, y + 0.5 * h * vy
        tb = snapshot(t_half)
        point = np.array([xh, yh])
        b = float(magnetic_field(tb, point))
        if tb.flux_rate:
            ex, ey = induced_electric_field(tb, point, t_half, units)
            vx += 0.5 * h * q * ex / m
            vy += 0.5 * h * q * ey / m
        if b:
            ang = -q * b * h / (m * c)
            ca, sa = np.cos(ang), np.sin(ang)
            vx, vy = ca * vx - sa * vy, sa * vx + ca * vy
        if tb.flux_rate:
            vx += 0.5 * h * q * ex / m
            vy += 0.5 * h * q * ey / m
        x, y = xh + 0.5 * h * vx, yh + 0.5 * h * vy
        pos[k + 1] = x, y
        vel[k + 1] = vx, vy
    ke0 = float(vel[0] @ vel[0])
    drift = float(abs(vel[-1] @ vel[-1] - ke0) / ke0) if ke0 > 0 else 0.0
    if static and drift > config.energy_drift_tol:
        raise StepInstabilityError(f"kinetic energy drifted by {drift:.3g} (tolerance {config.energy_drift_tol:.3g})")
    times = t0 + h * np.arange(n + 1)
    return Trajectory(times, pos, vel, False,
                      {"kind": "integrated", "label": "integrated", "dt": h, "energy_drift": drift})


def deflection_angle(traj: Trajectory) -> float:
    """Signed angle between the first and last velocity."""
    v0, v1 = traj.velocities[0], traj.velocities[-1]
    return float(np.arctan2(v0[0] * v1[1] - v0[1] * v1[0], v0 @ v1))


@dataclass(frozen=True)
class ResidualSeries:
    times: np.ndarray
    residuals: np.ndarray
    scale: float
    metadata: dict = field(default_factory=dict)

    @property
    def max_residual(self) -> float:
        return float(np.max(np.abs(self.residuals))) if self.residuals.size else 0.0

    @property
    def relative(self) -> float:
        return self.max_residual / self.scale if self.scale > 0 else self.max_residual

    def to_table(self, delimiter: str = "\t") -> str:
        buf = io.StringIO()
        np.savetxt(buf, np.column_stack([self.times, self.residuals]), fmt="%.17g", delimiter=delimiter,
                   header=delimiter.join(["t", "residual"]), comments="")
        return buf.getvalue()


def momentum_conservation_check(charge: ChargeState, ramp: FluxRamp, samples: int = 21, step: float | None = None,
                                units: Units = NATURAL, quad=None) -> ResidualSeries:
    """|Q E + dPi_Q/dt| at interior ramp times for a charge held at rest.

    dPi_Q/dt is the central difference of the field momentum with step
    ``step`` (default 1e-4 of the ramp duration).
    """
    h = ramp.duration * 1e-4 if step is None else step
    times = np.linspace(0.0, ramp.duration, samples + 2)[1:-1]
    held = charge.moved(velocity=(0.0, 0.0))
    res = np.empty(len(times))
    scale = 0.0
    for i, t in enumerate(times):
        qe = charge.charge * induced_electric_field(ramp.tube_at(t), held.position, t, units)
        dpi = (field_momentum(held, ramp.tube_at(t + h), units, quad)
               - field_momentum(held, ramp.tube_at(t - h), units, quad)) / (2 * h)
        res[i] = float(np.hypot(*(qe + dpi)))
        scale = max(scale, float(np.hypot(*qe)))
    return ResidualSeries(times, res, scale, {"step": h, "check": "momentum"})


def faraday_check(tube: FluxTube, loop: Trajectory, units: Units = NATURAL, nodes: int = 4) -> float:
    """|circulation of E + winding * (dPhi/dt) / c| around a closed loop outside the core.

    The circulation uses ``nodes`` Gauss-Legendre points per polyline segment.
    """
    if not loop.closed:
        raise GeometryError("Faraday check needs a closed loop")
    rel = tube.relative(loop.positions)
    if not tube.ideal and np.min(np.hypot(rel[:, 0], rel[:, 1])) <= tube.radius:
        raise GeometryError("loop enters the tube core")
    if tube.flux_rate == 0.0:
        return 0.0
    x, w = gauss_legendre(nodes)
    t = 0.5 * (x + 1.0)
    p0, d = loop.positions[:-1], np.diff(loop.positions, axis=0)
    pts = p0[:, None, :] + t[None, :, None] * d[:, None, :]
    e = induced_electric_field(tube, pts.reshape(-1, 2), units=units).reshape(pts.shape)
    circulation = float(np.sum(0.5 * w[None, :] * np.einsum("snk,sk->sn", e, d)))
    return abs(circulation + winding_number(loop, tube.center) * tube.flux_rate / units.c)


@dataclass(frozen=True)
class WorkBalance:
    work_integral: float
    final_work: float
    residual: float

    @property
    def relative(self) -> float:
        scale = max(abs(self.work_integral), abs(self.final_work))
        return self.residual / scale if scale > 0 else self.residual


def work_balance_check(charge: ChargeState, ramp: FluxRamp, steps: int = 2000, units: Units = NATURAL,
                       quad=None) -> WorkBalance:
    """Compare int -q rdot.E dt over the ramp with rdot.(Pi_q(T) - Pi_q(0)).

    rdot is held fixed and the charge is kept at its position (the motion is
    externally enforced, only the velocity enters the work rate).  The time
    integral uses the trapezoid rule on ``steps`` intervals.
    """
    times = np.linspace(0.0, ramp.duration, steps + 1)
    rates = np.array([-charge.charge * float(charge.velocity @ induced_electric_field(ramp.tube_at(t), charge.position,
                                                                                     t, units))
                      for t in times])
    integral = float(trapezoid(rates, times))
    pi_end = field_momentum(charge, replace(ramp.tube_at(ramp.duration), flux_rate=0.0), units, quad)
    pi_start = field_momentum(charge, replace(ramp.tube_at(0.0), flux_rate=0.0), units, quad) \
        if ramp.flux_start else np.zeros(2)
    final = float(charge.velocity @ (pi_end - pi_start))
    return WorkBalance(integral, final, abs(integral - final))
