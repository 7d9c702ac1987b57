"""Phase accumulated along paths under the local and the potential-based interaction.

local            phi = (1/hbar) int Pi_q . dr      (no gauge input at all)
potential-based  phi = (q/(hbar c)) int A . dr      (depends on the gauge for open paths)

Polyline segments are integrated exactly where the integrand is known in
closed form (the symmetric potential, the ideal-tube field momentum), and by
Gauss-Legendre quadrature otherwise (gauge-function gradients, finite-core
field momentum).
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from . import em_fields
from .em_fields import DIRAC_STRING, FluxTube, GaugeSpec
from .errors import DiracStringCrossing, SingularityError
from .field_interaction import ChargeState, field_momentum
from .quadrature import QuadratureConfig, gauss_legendre
from .trajectories import Trajectory, segment_angles
from .units import NATURAL, Units

LOCAL = "local-LCFI"
POTENTIAL = "potential-based"

CLOSED_LOOP_RTOL = 1e-8


@dataclass(frozen=True)
class PhaseResult:
    phase: float
    theory: str
    gauge: str | None = None
    path_id: str = "path"
    error_estimate: float = 0.0
    string_crossings: int = 0

    def __post_init__(self):
        if self.theory not in (LOCAL, POTENTIAL):
            raise ValueError(f"unknown theory {self.theory!r}")
        if self.theory == LOCAL and self.gauge is not None:
            raise ValueError("a local-theory phase cannot carry a gauge")


def analytic_open_phase(q: float, flux: float, dtheta: float, units: Units = NATURAL) -> float:
    """q Phi dtheta / (2 pi hbar c)."""
    return q * flux * dtheta / (2 * np.pi * units.hbar * units.c)


def _segment_circle_params(p0, p1, radius):
    """Parameters in (0, 1) where the segments p0->p1 (relative to the circle centre) cross the circle."""
    d = p1 - p0
    a = np.einsum("ij,ij->i", d, d)
    b = 2 * np.einsum("ij,ij->i", p0, d)
    c = np.einsum("ij,ij->i", p0, p0) - radius * radius
    disc = b * b - 4 * a * c
    root = np.sqrt(np.maximum(disc, 0.0))
    with np.errstate(invalid="ignore", divide="ignore"):
        t1 = (-b - root) / (2 * a)
        t2 = (-b + root) / (2 * a)
    ok = disc > 0
    t1 = np.where(ok & (t1 > 0) & (t1 < 1), t1, np.nan)
    t2 = np.where(ok & (t2 > 0) & (t2 < 1), t2, np.nan)
    return t1, t2


def symmetric_line_integral(tube: FluxTube, positions) -> float:
    """Exact integral of the symmetric-gauge A along the polyline through ``positions``.

    Outside the core each segment contributes Phi dtheta/(2 pi); inside it
    contributes Phi (x dy - y dx)/(2 pi a^2), both exact for straight pieces.
    """
    rel = tube.relative(positions)
    if tube.ideal:
        return float(tube.flux / (2 * np.pi) * np.sum(segment_angles(rel, (0.0, 0.0))))
    a = tube.radius
    p0, p1 = rel[:-1], rel[1:]
    t1, t2 = _segment_circle_params(p0, p1, a)
    params = np.stack([np.zeros(len(p0)), t1, t2, np.ones(len(p0))], axis=-1)
    params = np.sort(np.where(np.isnan(params), 1.0, params), axis=-1)
    total = 0.0
    d = p1 - p0
    for k in range(3):
        qa = p0 + params[:, k, None] * d
        qb = p0 + params[:, k + 1, None] * d
        mid = 0.5 * (qa + qb)
        inside = np.einsum("ij,ij->i", mid, mid) < a * a
        cross = qa[:, 0] * qb[:, 1] - qa[:, 1] * qb[:, 0]
        dot = np.einsum("ij,ij->i", qa, qb)
        outside_part = np.arctan2(cross, dot) / (2 * np.pi)
        inside_part = cross / (2 * np.pi * a * a)
        total += float(np.sum(np.where(inside, inside_part, outside_part)))
    return tube.flux * total


def string_crossings(gauge: GaugeSpec, tube: FluxTube, positions) -> np.ndarray:
    """Signed crossings (+1 counterclockwise) of each segment with the Dirac string ray."""
    n_seg = len(positions) - 1
    if gauge.base != DIRAC_STRING:
        return np.zeros(n_seg, dtype=int)
    if np.any(em_fields.on_dirac_string(gauge, tube, positions)):
        raise SingularityError("a path sample lies on the Dirac string")
    rel = tube.relative(positions)
    s = gauge.string_direction
    side = rel[:, 0] * s[1] - rel[:, 1] * s[0]  # > 0 clockwise of the string
    p0, p1 = rel[:-1], rel[1:]
    h0, h1 = side[:-1], side[1:]
    changes = (h0 > 0) != (h1 > 0)
    with np.errstate(invalid="ignore", divide="ignore"):
        lam = np.where(changes, h0 / (h0 - h1), 0.0)
    hit = p0 + lam[:, None] * (p1 - p0)
    along = hit @ s
    crossing = changes & (along > 0)
    return np.where(crossing, np.where(h0 > 0, 1, -1), 0)


def gradient_line_integral(chi, positions, nodes: int = 8):
    """Gauss-Legendre integral of grad(chi) . dr over each polyline segment.

    Returns (value, error estimate), the estimate being the change from
    ``nodes // 2`` to ``nodes`` points per segment.
    """
    positions = np.asarray(positions, dtype=float)
    p0, d = positions[:-1], np.diff(positions, axis=0)

    def rule(n):
        x, w = gauss_legendre(n)
        t = 0.5 * (x + 1.0)
        pts = p0[:, None, :] + t[None, :, None] * d[:, None, :]
        g = chi.gradient(pts.reshape(-1, 2)).reshape(pts.shape)
        return float(np.sum(0.5 * w[None, :] * np.einsum("snk,sk->sn", g, d)))

    fine = rule(nodes)
    return fine, abs(fine - rule(max(nodes // 2, 1)))


def potential_line_integral(gauge: GaugeSpec, tube: FluxTube, positions, allow_string_crossings: bool = False):
    """int A . dr along a polyline, with the Dirac string's delta function counted explicitly.

    Returns (value, error estimate, net signed string crossings).  Crossing the
    string raises DiracStringCrossing unless ``allow_string_crossings``.
    """
    positions = np.asarray(positions, dtype=float)
    value = symmetric_line_integral(tube, positions)
    error = 0.0
    crossings = 0
    if gauge.base == DIRAC_STRING:
        signs = string_crossings(gauge, tube, positions)
        count = int(np.count_nonzero(signs))
        if count and not allow_string_crossings:
            raise DiracStringCrossing(
                f"path crosses the Dirac string of {gauge.identifier} {count} time(s)", count)
        crossings = int(np.sum(signs))
        # regular part of grad(chi_string) is -Phi theta-hat/(2 pi rho); each counterclockwise
        # crossing adds the +Phi jump of chi across the string
        value += -tube.flux / (2 * np.pi) * float(np.sum(segment_angles(tube.relative(positions), (0.0, 0.0))))
        value += tube.flux * crossings
    for chi in gauge.chi:
        v, e = gradient_line_integral(chi, positions)
        value += v
        error += e
    return value, error, crossings


def phase_potential(traj: Trajectory, gauge: GaugeSpec, tube: FluxTube, charge: ChargeState | float,
                    units: Units = NATURAL, allow_string_crossings: bool = False) -> PhaseResult:
    """(q/(hbar c)) int A . dr in ``gauge``.  Static tube assumed."""
    q = charge.charge if isinstance(charge, ChargeState) else float(charge)
    value, err, crossings = potential_line_integral(gauge, tube, traj.positions, allow_string_crossings)
    k = q / (units.hbar * units.c)
    eps = np.finfo(float).eps * len(traj) * abs(k * tube.flux)
    return PhaseResult(k * value, POTENTIAL, gauge.identifier, traj.label, abs(k) * err + eps, crossings)


def phase_local(traj: Trajectory, tube: FluxTube, charge: ChargeState | float, units: Units = NATURAL,
                quad: QuadratureConfig | None = None, nodes: int = 4) -> PhaseResult:
    """(1/hbar) int Pi_q . dr along ``traj``.  Static tube assumed.

    The ideal tube uses the exact per-segment integral of q Phi/(2 pi c rho)
    theta-hat.  A finite core evaluates Pi_q by quadrature at ``nodes``
    Gauss-Legendre points per piece of segment inside or outside the core.
    """
    q = charge.charge if isinstance(charge, ChargeState) else float(charge)
    mass = charge.mass if isinstance(charge, ChargeState) else 1.0
    k = 1.0 / units.hbar
    if tube.ideal:
        dtheta = np.sum(segment_angles(tube.relative(traj.positions), (0.0, 0.0)))
        value = q * tube.flux / (2 * np.pi * units.c) * float(dtheta)
        eps = np.finfo(float).eps * len(traj) * abs(k * q * tube.flux / units.c)
        return PhaseResult(k * value, LOCAL, None, traj.label, eps)
    x, w = gauss_legendre(nodes)
    t = 0.5 * (x + 1.0)
    p0, d = traj.positions[:-1], np.diff(traj.positions, axis=0)
    # Pi_q has a kink on the core circle, so segments are split where they cross it
    rel0 = tube.relative(p0)
    t1, t2 = _segment_circle_params(rel0, rel0 + d, tube.radius)
    total, err = 0.0, 0.0
    for start, step, ca, cb in zip(p0, d, t1, t2):
        cuts = [0.0, *sorted(c for c in (ca, cb) if not np.isnan(c)), 1.0]
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            piece = (hi - lo) * step
            for ti, wi in zip(t, w):
                res = field_momentum(ChargeState(q, mass, start + (lo + ti * (hi - lo)) * step), tube, units,
                                     quad, full_output=True)
                total += 0.5 * wi * float(res.value @ piece)
                err += 0.5 * wi * res.error * float(np.hypot(*piece))
    return PhaseResult(k * total, LOCAL, None, traj.label, k * err)


def two_path_phase_difference(path1: Trajectory, path2: Trajectory, tube: FluxTube, charge, theory: str = LOCAL,
                              gauge: GaugeSpec | None = None, units: Units = NATURAL,
                              allow_string_crossings: bool = False, quad: QuadratureConfig | None = None) -> float:
    """phase(path1) - phase(path2) under ``theory``; the potential theory needs a gauge."""
    if theory == LOCAL:
        if gauge is not None:
            raise ValueError("the local theory takes no gauge")
        return phase_local(path1, tube, charge, units, quad).phase - phase_local(path2, tube, charge, units, quad).phase
    if theory != POTENTIAL:
        raise ValueError(f"unknown theory {theory!r}")
    if gauge is None:
        raise ValueError("the potential-based theory needs a gauge")
    return (phase_potential(path1, gauge, tube, charge, units, allow_string_crossings).phase
            - phase_potential(path2, gauge, tube, charge, units, allow_string_crossings).phase)


@dataclass(frozen=True)
class AuditRow:
    gauge: str
    phase: float
    error_estimate: float
    string_crossings: int


@dataclass(frozen=True)
class GaugeAudit:
    rows: tuple
    spread: float
    local_phase: float
    closed: bool
    tolerance: float
    path_id: str = "path"
    notes: tuple = field(default=())

    @property
    def verdict(self) -> str:
        if self.spread <= self.tolerance:
            return "gauge-invariant"
        return "gauge-dependent" if not self.closed else "closed-loop-violation"

    def to_table(self, delimiter: str = "\t") -> str:
        buf = io.StringIO()
        buf.write(delimiter.join(["gauge", "phase", "error_estimate", "string_crossings", "spread"]) + "\n")
        for r in self.rows:
            buf.write(delimiter.join([r.gauge, f"{r.phase:.17g}", f"{r.error_estimate:.17g}",
                                      str(r.string_crossings), f"{self.spread:.17g}"]) + "\n")
        buf.write(delimiter.join(["local", f"{self.local_phase:.17g}", "0", "0", "0"]) + "\n")
        return buf.getvalue()


def gauge_audit(traj: Trajectory, gauges, tube: FluxTube, charge, units: Units = NATURAL,
                allow_string_crossings: bool = False, paths: tuple | None = None) -> GaugeAudit:
    """Potential-theory phases of one path (or of a path pair) across several gauges.

    With ``paths = (path1, path2)`` the audited quantity is the two-path phase
    difference and ``traj`` is ignored (pass None).  The spread is the largest
    pairwise difference; the local-theory phase is reported alongside.
    """
    gauges = list(gauges)
    if len(gauges) < 2:
        raise ValueError("a gauge audit needs at least two gauges")
    q = charge.charge if isinstance(charge, ChargeState) else float(charge)
    rows = []
    if paths is None:
        for g in gauges:
            r = phase_potential(traj, g, tube, charge, units, allow_string_crossings)
            rows.append(AuditRow(r.gauge, r.phase, r.error_estimate, r.string_crossings))
        local = phase_local(traj, tube, charge, units).phase
        closed = traj.closed
        path_id = traj.label
    else:
        p1, p2 = paths
        for g in gauges:
            r1 = phase_potential(p1, g, tube, charge, units, allow_string_crossings)
            r2 = phase_potential(p2, g, tube, charge, units, allow_string_crossings)
            rows.append(AuditRow(g.identifier, r1.phase - r2.phase, r1.error_estimate + r2.error_estimate,
                                 r1.string_crossings - r2.string_crossings))
        local = two_path_phase_difference(p1, p2, tube, charge, LOCAL, units=units)
        closed = bool(np.allclose(p1.start, p2.start) and np.allclose(p1.end, p2.end))
        path_id = f"{p1.label}|{p2.label}"
    phases = np.array([r.phase for r in rows])
    spread = float(phases.max() - phases.min())
    tol = CLOSED_LOOP_RTOL * max(1.0, abs(q * tube.flux / (units.hbar * units.c)))
    return GaugeAudit(tuple(rows), spread, local, closed, tol, path_id)
