"""Gauge-invariant field-overlap quantities of a point charge and a flux tube.

field momentum      Pi_q = (1/4 pi c) int E_q x B d^3r'
interaction energy  U_q  = (1/4 pi)   int E_q . E d^3r'
local Lagrangian    L^f  = rdot . Pi_q - U_q
potential Lagrangian L   = (q/c) rdot . A           (V = 0)
boundary term       F    = (1/4 pi c) int E_q . A d^3r'

E_q is the static Coulomb field of the charge.  The ideal tube (a = 0) is
evaluated in closed form; a finite tube goes through the plane quadrature of
:mod:`lcfi.quadrature`.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import em_fields
from .em_fields import DIRAC_STRING, FluxTube, GaugeSpec
from .errors import DiracStringCrossing, SingularityError
from .quadrature import QuadratureConfig, QuadResult, check_tail, plane_integral, refine
from .units import NATURAL, Units

_NONREL_LIMIT = 0.1


class NonRelativisticWarning(UserWarning):
    """Charge speed is not small compared with c."""


@dataclass(frozen=True)
class ChargeState:
    charge: float
    mass: float = 1.0
    position: tuple = (1.0, 0.0)
    velocity: tuple = (0.0, 0.0)

    def __post_init__(self):
        if not self.mass > 0:
            raise ValueError(f"mass must be positive, got {self.mass}")
        object.__setattr__(self, "position", np.array(self.position, dtype=float))
        object.__setattr__(self, "velocity", np.array(self.velocity, dtype=float))
        self.position.setflags(write=False)
        self.velocity.setflags(write=False)

    def speed_ratio(self, units: Units = NATURAL) -> float:
        return float(np.hypot(*self.velocity)) / units.c

    def validity_warnings(self, units: Units = NATURAL) -> tuple:
        beta = self.speed_ratio(units)
        if beta >= _NONREL_LIMIT:
            return (f"|v|/c = {beta:.3g} is not small; non-relativistic Coulomb field assumed",)
        return ()

    def moved(self, position=None, velocity=None) -> "ChargeState":
        return ChargeState(self.charge, self.mass,
                           self.position if position is None else position,
                           self.velocity if velocity is None else velocity)


@dataclass(frozen=True)
class InteractionBreakdown:
    field_momentum: np.ndarray
    interaction_energy: float
    lagrangian_local: float
    lagrangian_potential: float | None
    boundary_term: float | None
    gauge_used: str | None
    warnings: tuple = field(default=())


def _length_scale(charge: ChargeState, tube: FluxTube) -> float:
    rho = float(np.hypot(*tube.relative(charge.position)))
    return max(rho, tube.radius, 1e-3)


def _core_breaks(charge: ChargeState, tube: FluxTube):
    """Ray/core-circle intersection radii and, for an outside charge, the window of rays hitting the core."""
    d = tube.relative(charge.position)
    a = tube.radius
    dist2 = float(d @ d)

    def ray_breaks(shat):
        b = shat @ d
        disc = b * b - dist2 + a * a
        root = np.sqrt(np.maximum(disc, 0.0))
        out = np.stack([-b - root, -b + root], axis=-1)
        return np.where(disc[:, None] > 0, out, -1.0)

    window = None
    if dist2 > a * a:
        window = (float(np.arctan2(-d[1], -d[0])), a / np.sqrt(dist2))
    return ray_breaks, window


def _check_off_axis(charge: ChargeState, tube: FluxTube):
    rho = float(np.hypot(*tube.relative(charge.position)))
    if rho <= 1e-12 * max(tube.radius, 1.0):
        raise SingularityError(f"charge sits on the tube center {tube.center}")
    return rho


def _resolve(quad: QuadratureConfig | None) -> QuadratureConfig:
    return QuadratureConfig() if quad is None else quad


def _overlap(charge: ChargeState, tube: FluxTube, integrand, quad: QuadratureConfig, scale: float, what: str,
             level: int | None = None):
    ray_breaks, window = _core_breaks(charge, tube)
    L = _length_scale(charge, tube)

    def evaluate(lvl):
        return plane_integral(charge.position, integrand, lvl, quad, L, ray_breaks, window)

    if level is not None:
        return QuadResult(evaluate(level), np.nan, level)
    return refine(evaluate, quad, scale, what)


def field_momentum(charge: ChargeState, tube: FluxTube, units: Units = NATURAL,
                   quad: QuadratureConfig | None = None, full_output: bool = False, level: int | None = None):
    """Field momentum of the charge's Coulomb field overlapping the tube's B.

    Ideal tube: q Phi/(2 pi c rho) along theta-hat.  Finite tube: quadrature
    over the core.  With ``full_output`` a QuadResult (value, error, level) is
    returned; ``level`` pins the quadrature resolution.
    """
    rho = _check_off_axis(charge, tube)
    q = charge.charge
    if tube.ideal:
        d = tube.relative(charge.position)
        value = q * tube.flux / (2 * np.pi * units.c * rho * rho) * np.array([-d[1], d[0]])
        return QuadResult(value, 0.0, -1) if full_output else value
    b_core = tube.flux / (np.pi * tube.radius**2)
    pref = q * b_core / (4 * np.pi * units.c)

    def integrand(points, shat):
        inside = np.hypot(*tube.relative(points).T) < tube.radius
        # shat x z-hat = (shat_y, -shat_x)
        return pref * inside[:, None] * np.stack([shat[:, 1], -shat[:, 0]], axis=-1)

    scale = abs(q * tube.flux) / (2 * np.pi * units.c * max(rho, tube.radius))
    res = _overlap(charge, tube, integrand, _resolve(quad), scale, "field momentum", level)
    return res if full_output else res.value


def interaction_energy(charge: ChargeState, tube: FluxTube, time: float = 0.0, units: Units = NATURAL,
                       quad: QuadratureConfig | None = None, full_output: bool = False,
                       level: int | None = None):
    """Overlap energy of the charge's field with the tube's induced E (zero for a static tube)."""
    if tube.flux_rate == 0.0 or charge.charge == 0.0:
        return QuadResult(0.0, 0.0, -1) if full_output else 0.0
    if tube.ideal:
        # the induced field is solenoidal and tangential on every circle about the charge's
        # far field, so each annulus about the charge contributes zero
        _check_off_axis(charge, tube)
        return QuadResult(0.0, 0.0, -1) if full_output else 0.0
    pref = charge.charge / (4 * np.pi)

    def integrand(points, shat):
        e = em_fields.induced_electric_field(tube, points, time, units)
        return pref * np.einsum("pk,pk->p", shat, e)

    scale = abs(charge.charge * tube.flux_rate) / (2 * np.pi * units.c)
    res = _overlap(charge, tube, integrand, _resolve(quad), scale, "interaction energy", level)
    return res if full_output else res.value


def work_to_establish_B(charge: ChargeState, tube: FluxTube, units: Units = NATURAL,
                        quad: QuadratureConfig | None = None, level: int | None = None) -> float:
    """Work against the induced emf that keeps rdot fixed while B is switched on: rdot . Pi_q."""
    pi_q = field_momentum(charge, tube, units, quad, level=level)
    return float(charge.velocity @ pi_q)


def lagrangian_local(charge: ChargeState, tube: FluxTube, time: float = 0.0, units: Units = NATURAL,
                     quad: QuadratureConfig | None = None, level: int | None = None) -> float:
    """rdot . Pi_q - U_q."""
    return (work_to_establish_B(charge, tube, units, quad, level)
            - interaction_energy(charge, tube, time, units, quad, level=level))


def lagrangian_potential(charge: ChargeState, gauge: GaugeSpec, tube: FluxTube, units: Units = NATURAL) -> float:
    """(q/c) rdot . A with V = 0."""
    a_vec = em_fields.vector_potential(gauge, tube, charge.position)
    return float(charge.charge / units.c * (charge.velocity @ a_vec))


def field_angular_momentum(q: float, flux: float, units: Units = NATURAL) -> float:
    return q * flux / (2 * np.pi * units.c)


def string_boundary_term(charge: ChargeState, gauge: GaugeSpec, tube: FluxTube, units: Units = NATURAL) -> float:
    """Contribution to F of the Dirac string's delta-function potential.

    The string gauge differs from the symmetric one by grad(chi) with chi
    jumping by Phi across the string; its overlap with E_q is Phi/(4 pi c)
    times the charge's electric flux through the string half-plane,
    2 q (theta_s - pi), with theta_s the charge's angle from the string.
    """
    if gauge.base != DIRAC_STRING:
        return 0.0
    if np.any(em_fields.on_dirac_string(gauge, tube, charge.position)):
        raise SingularityError("charge sits on the Dirac string")
    theta_s = float(em_fields.string_angle_of(gauge, tube, charge.position))
    return charge.charge * tube.flux / (2 * np.pi * units.c) * (theta_s - np.pi)


def chi_boundary_term(charge: ChargeState, chi, tube: FluxTube, units: Units = NATURAL,
                       quad: QuadratureConfig | None = None, full_output: bool = False,
                      level: int | None = None, tail_check: bool = True):
    """Overlap (1/4 pi c) int E_q . grad(chi).  Raises DivergentTailError unless grad(chi) decays fast enough."""
    quad = _resolve(quad)
    pref = charge.charge / (4 * np.pi * units.c)
    L = _length_scale(charge, tube)

    def integrand(points, shat):
        return pref * np.einsum("pk,pk->p", shat, chi.gradient(points))

    grad_here = float(np.hypot(*chi.gradient(charge.position[None, :])[0]))
    scale = abs(pref) * L * max(grad_here, 1e-300)
    if tail_check:
        check_tail(charge.position, integrand, L, threshold=max(quad.atol, quad.rtol * scale),
                   what=f"gauge function {chi.label!r}")

    def evaluate(lvl):
        return plane_integral(charge.position, integrand, lvl, quad, L)

    res = QuadResult(evaluate(level), np.nan, level) if level is not None else refine(
        evaluate, quad, scale, "gauge-function overlap")
    return res if full_output else res.value


def boundary_term(charge: ChargeState, gauge: GaugeSpec, tube: FluxTube, units: Units = NATURAL,
                  quad: QuadratureConfig | None = None, full_output: bool = False, level: int | None = None,
                  tail_check: bool = True):
    """F = (1/4 pi c) int E_q . A d^3r' in ``gauge``.

    Split as symmetric-gauge part + Dirac-string part + one term per extra
    gauge function.  The symmetric part vanishes identically for the ideal
    tube and is integrated numerically for a finite core.
    """
    if charge.charge == 0.0:
        return QuadResult(0.0, 0.0, -1) if full_output else 0.0
    quad = _resolve(quad)
    _check_off_axis(charge, tube)
    value, error = 0.0, 0.0
    levels = []
    if not tube.ideal:
        pref = charge.charge / (4 * np.pi * units.c)

        def integrand(points, shat):
            return pref * np.einsum("pk,pk->p", shat, em_fields.symmetric_potential(tube, points))

        scale = abs(charge.charge * tube.flux) / (2 * np.pi * units.c)
        res = _overlap(charge, tube, integrand, quad, scale, "boundary term", level)
        value += res.value
        error += res.error
        levels.append(res.level)
    value += string_boundary_term(charge, gauge, tube, units)
    for chi in gauge.chi:
        res = chi_boundary_term(charge, chi, tube, units, quad, full_output=True, level=level,
                                tail_check=tail_check)
        value += res.value
        error += res.error
        levels.append(res.level)
    if full_output:
        return QuadResult(float(value), float(error), max(levels, default=-1))
    return float(value)


def interaction_breakdown(charge: ChargeState, tube: FluxTube, gauge: GaugeSpec | None = None, time: float = 0.0,
                          units: Units = NATURAL, quad: QuadratureConfig | None = None) -> InteractionBreakdown:
    notes = charge.validity_warnings(units)
    for msg in notes:
        warnings.warn(msg, NonRelativisticWarning, stacklevel=2)
    pi_q = field_momentum(charge, tube, units, quad)
    u_q = interaction_energy(charge, tube, time, units, quad)
    lf = float(charge.velocity @ pi_q) - u_q
    lp = f = None
    if gauge is not None:
        lp = lagrangian_potential(charge, gauge, tube, units)
        f = boundary_term(charge, gauge, tube, units, quad)
    return InteractionBreakdown(pi_q, u_q, lf, lp, f, None if gauge is None else gauge.identifier, notes)


@dataclass(frozen=True)
class LagrangianCheck:
    """Per-sample residual |L^f - L - dF/dt| along a trajectory (interior samples only)."""

    times: np.ndarray
    residuals: np.ndarray
    lagrangian_local: np.ndarray
    lagrangian_potential: np.ndarray
    boundary_rate: np.ndarray
    scale: float
    quadrature_level: int

    @property
    def max_residual(self) -> float:
        return float(np.max(self.residuals))

    @property
    def relative(self) -> float:
        return self.max_residual / self.scale if self.scale > 0 else self.max_residual


def _crosses_string(gauge: GaugeSpec, tube: FluxTube, positions) -> bool:
    if gauge.base != DIRAC_STRING:
        return False
    theta = em_fields.string_angle_of(gauge, tube, positions)
    jumps = np.abs(np.diff(theta)) > np.pi
    return bool(np.any(jumps)) or bool(np.any(em_fields.on_dirac_string(gauge, tube, positions)))


def verify_lagrangian_relation(traj, gauge: GaugeSpec, tube: FluxTube, charge: float, units: Units = NATURAL,
                               quad: QuadratureConfig | None = None) -> LagrangianCheck:
    """Check L^f = L + dF/dt along ``traj`` for a static tube.

    dF/dt is taken by central differences of F between neighbouring samples,
    independent of how F itself is computed.  The quadrature level is fixed
    once per trajectory (the finest level needed at its first, middle and last
    sample) so that F varies smoothly from sample to sample.
    """
    if tube.flux_rate != 0.0:
        raise ValueError("the Lagrangian relation check needs a static tube")
    if _crosses_string(gauge, tube, traj.positions):
        raise DiracStringCrossing("trajectory crosses the Dirac string, where F jumps by q Phi / c")
    quad = _resolve(quad)
    states = [ChargeState(charge, 1.0, r, v) for r, v in zip(traj.positions, traj.velocities)]
    level = None
    if not tube.ideal or gauge.chi:
        probes = (states[0], states[len(states) // 2], states[-1])
        lv = [boundary_term(s, gauge, tube, units, quad, full_output=True).level for s in probes]
        if not tube.ideal:
            lv += [field_momentum(s, tube, units, quad, full_output=True).level for s in probes]
        level = max(lv)
    lf = np.array([lagrangian_local(s, tube, 0.0, units, quad, level) for s in states])
    lp = np.array([lagrangian_potential(s, gauge, tube, units) for s in states])
    # the probes above already ran the divergent-tail check
    f = np.array([boundary_term(s, gauge, tube, units, quad, level=level, tail_check=level is None) for s in states])
    t = traj.times
    dfdt = (f[2:] - f[:-2]) / (t[2:] - t[:-2])
    res = np.abs(lf[1:-1] - lp[1:-1] - dfdt)
    scale = float(np.max(np.abs(lf)))
    return LagrangianCheck(t[1:-1], res, lf[1:-1], lp[1:-1], dfdt, scale, -1 if level is None else level)
