"""The loopless two-source interferometer and the Andreev interferometer.

Loopless device: two independent sources S1, S2, each a superposition u_j|0> + v_j|1>,
detected at a common screen point x.  The detection probability is

    P(x) = |u2 v1 phi1|^2 + |u1 v2 phi2|^2 + 2 |u1 v1 u2 v2 phi1 phi2| cos(phi_B + phi0)

with phi_B the open-path phase of the local theory and phi0 the flux-independent
phase of the wave amplitudes.

Andreev device: two superconductors coupled through a normal region, with output current

    I = (pi e^2 / hbar) V [G1^2 + G2^2 + 2 G1 G2 cos(phi0 + phi_B)],   phi_B = e Phi dtheta / (pi hbar c)
"""

from __future__ import annotations

import io
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import OptimizeWarning, curve_fit

from .em_fields import FluxTube
from .errors import GeometryError
from .phase_engine import analytic_open_phase
from .trajectories import two_path_geometry
from .units import NATURAL, Units

_NORM_TOL = 1e-12
_BIAS_LIMIT = 0.1


class BiasValidityWarning(UserWarning):
    """eV is not small against the gap, so the voltage-independent amplitude is questionable."""


@dataclass(frozen=True)
class SourceState:
    u1: complex
    v1: complex
    u2: complex
    v2: complex

    def __post_init__(self):
        for j, (u, v) in enumerate(((self.u1, self.v1), (self.u2, self.v2)), start=1):
            norm = abs(u) ** 2 + abs(v) ** 2
            if abs(norm - 1.0) > _NORM_TOL:
                raise ValueError(f"source {j} is not normalized: |u|^2 + |v|^2 = {norm}")

    @classmethod
    def balanced(cls) -> "SourceState":
        s = 1 / np.sqrt(2)
        return cls(s, s, s, s)


@dataclass(frozen=True)
class JunctionParams:
    rho1: float = 1.0
    rho2: float = 1.0
    rhoN: float = 1.0
    t1: complex = 1.0
    t2: complex = 1.0
    gap: float = 1.0
    bias: float = 0.01
    tau: float = 1.0  # pulse duration, carried as metadata only
    delta_theta: float = 2 * np.pi
    phi0: float = 0.0

    def __post_init__(self):
        for name in ("rho1", "rho2", "rhoN", "gap"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.tau <= 0:
            raise ValueError("tau must be positive")

    def validity_warnings(self, units: Units = NATURAL) -> tuple:
        ratio = abs(units.e * self.bias) / self.gap
        if ratio > _BIAS_LIMIT:
            return (f"eV/gap = {ratio:.3g} exceeds {_BIAS_LIMIT}; amplitudes neglect the bias dependence",)
        return ()

    @property
    def gamma1(self) -> float:
        return hopping_rate(self.rho1, self.rhoN, self.t1)

    @property
    def gamma2(self) -> float:
        return hopping_rate(self.rho2, self.rhoN, self.t2)


@dataclass(frozen=True)
class FringeDataset:
    """Intensities over an abscissa (screen coordinate or flux) with their phase decomposition."""

    abscissa: np.ndarray
    intensity: np.ndarray
    phi_B: np.ndarray
    phi0: np.ndarray
    visibility: np.ndarray
    std_error: np.ndarray | None = None
    abscissa_name: str = "x"
    extra: dict = field(default_factory=dict)
    warnings: tuple = ()

    def __post_init__(self):
        if np.any(np.asarray(self.intensity) < 0):
            raise ValueError("negative intensity")

    def to_table(self, delimiter: str = "\t") -> str:
        n = len(self.abscissa)
        se = np.zeros(n) if self.std_error is None else np.asarray(self.std_error)
        cols = [self.abscissa, self.intensity, se, self.phi_B, np.broadcast_to(self.visibility, (n,))]
        names = [self.abscissa_name, "intensity", "std_error", "phi_B", "visibility"]
        for k, v in self.extra.items():
            cols.append(np.asarray(v))
            names.append(k)
        buf = io.StringIO()
        np.savetxt(buf, np.column_stack(cols), fmt="%.17g", delimiter=delimiter,
                   header=delimiter.join(names), comments="")
        return buf.getvalue()


def wave_amplitude(source_point, screen_point, k: float, r_min: float = 1e-6) -> complex:
    """Outgoing scalar wave exp(i k r) / max(r, r_min) from ``source_point``."""
    r = float(np.hypot(*(np.asarray(screen_point, float) - np.asarray(source_point, float))))
    if r == 0.0:
        raise GeometryError("screen point coincides with the source")
    return complex(np.exp(1j * k * r) / max(r, r_min))


def _fringe_terms(state: SourceState, f1: complex, f2: complex):
    a1 = state.u2 * state.v1 * f1
    a2 = state.u1 * state.v2 * f2
    return abs(a1) ** 2, abs(a2) ** 2, abs(a1 * a2), np.angle(a1 * np.conj(a2)) if a1 * a2 != 0 else 0.0


def loopless_fringe(state: SourceState, source1, source2, tube: FluxTube, charge: float, k: float, screen_points,
                    units: Units = NATURAL, r_min: float = 1e-6) -> FringeDataset:
    """Detection probability at each screen point.

    phi_B comes from the local theory, (q Phi / 2 pi hbar c) dtheta(x), with
    dtheta(x) recomputed from the two rays for every screen point.  The
    ``dP_dflux`` column is the analytic flux derivative.
    """
    pts = np.atleast_2d(np.asarray(screen_points, dtype=float))
    n = len(pts)
    P, phiB, phi0, vis, dP, dth = (np.empty(n) for _ in range(6))
    for i, x in enumerate(pts):
        _, _, dtheta = two_path_geometry(source1, source2, x, tube.center, n=2)
        f1 = wave_amplitude(source1, x, k, r_min)
        f2 = wave_amplitude(source2, x, k, r_min)
        d1, d2, cross, p0 = _fringe_terms(state, f1, f2)
        pb = analytic_open_phase(charge, tube.flux, dtheta, units)
        phase = pb + p0
        P[i] = max(d1 + d2 + 2 * cross * np.cos(phase), 0.0)
        slope = charge * dtheta / (2 * np.pi * units.hbar * units.c)
        dP[i] = -2 * cross * np.sin(phase) * slope
        phiB[i], phi0[i], dth[i] = pb, p0, dtheta
        vis[i] = 2 * cross / (d1 + d2) if d1 + d2 > 0 else 0.0
    return FringeDataset(pts[:, 0], P, phiB, phi0, vis, None, "x",
                         {"y": pts[:, 1], "delta_theta": dth, "dP_dflux": dP})


def andreev_amplitude(params: JunctionParams, junction: int, condensate_phase: float, units: Units = NATURAL) -> complex:
    """A_j = -pi rho_j |t_j|^2 exp(i phi_j); warns when eV/gap > 0.1."""
    for msg in params.validity_warnings(units):
        warnings.warn(msg, BiasValidityWarning, stacklevel=2)
    if junction not in (1, 2):
        raise ValueError("junction index must be 1 or 2")
    rho, t = (params.rho1, params.t1) if junction == 1 else (params.rho2, params.t2)
    return complex(-np.pi * rho * abs(t) ** 2 * np.exp(1j * condensate_phase))


def hopping_rate(rho_j: float, rho_N: float, t_j: complex) -> float:
    """Single-electron hopping rate 2 pi rho_j rho_N |t_j|^2."""
    if rho_j < 0 or rho_N < 0:
        raise ValueError("densities of states must be non-negative")
    return float(2 * np.pi * rho_j * rho_N * abs(t_j) ** 2)


def andreev_phase(params: JunctionParams, flux, units: Units = NATURAL):
    """phi_B = e Phi dtheta / (pi hbar c), the open-path phase of a charge 2e."""
    return analytic_open_phase(2 * units.e, np.asarray(flux, dtype=float), params.delta_theta, units)


def andreev_current(params: JunctionParams, flux, units: Units = NATURAL):
    """Output current; returns (I, phi_B) with the same shape as ``flux``."""
    g1, g2 = params.gamma1, params.gamma2
    phi_b = andreev_phase(params, flux, units)
    pref = np.pi * units.e**2 * params.bias / units.hbar
    current = pref * (g1 * g1 + g2 * g2 + 2 * g1 * g2 * np.cos(params.phi0 + phi_b))
    return current, phi_b


def visibility(gamma1: float, gamma2: float) -> float:
    denom = gamma1 * gamma1 + gamma2 * gamma2
    if denom == 0:
        raise ValueError("both hopping rates are zero")
    return 2 * gamma1 * gamma2 / denom


def flux_period(params: JunctionParams, units: Units = NATURAL) -> float:
    """Flux period 2 pi^2 hbar c / (e dtheta) of the Andreev current."""
    return 2 * np.pi**2 * units.hbar * units.c / (units.e * abs(params.delta_theta))


def andreev_sweep(params: JunctionParams, fluxes, units: Units = NATURAL) -> FringeDataset:
    fluxes = np.asarray(fluxes, dtype=float)
    current, phi_b = andreev_current(params, fluxes, units)
    return FringeDataset(fluxes, current, phi_b, np.full_like(fluxes, params.phi0),
                         np.full_like(fluxes, visibility(params.gamma1, params.gamma2)), None, "flux",
                         warnings=params.validity_warnings(units))


def measurement_protocol(params: JunctionParams, fluxes, repetitions: int, noise: float, seed: int = 0,
                         units: Units = NATURAL) -> FringeDataset:
    """Repeat a noisy current measurement ``repetitions`` times per flux value and average.

    Each flux point draws from its own generator spawned from ``seed``, so the
    result does not depend on evaluation order.
    """
    if repetitions < 1:
        raise ValueError("need at least one repetition")
    if noise < 0:
        raise ValueError("noise must be non-negative")
    fluxes = np.asarray(fluxes, dtype=float)
    current, phi_b = andreev_current(params, fluxes, units)
    children = np.random.SeedSequence(seed).spawn(len(fluxes))
    mean = np.empty_like(fluxes)
    se = np.empty_like(fluxes)
    for i, child in enumerate(children):
        draws = np.random.default_rng(child).normal(0.0, noise, repetitions) if noise > 0 else np.zeros(repetitions)
        mean[i] = current[i] + draws.mean()
        se[i] = draws.std(ddof=1) / np.sqrt(repetitions) if repetitions > 1 else 0.0
    # additive noise can push a near-zero mean slightly negative
    intensity = np.maximum(mean, 0.0)
    return FringeDataset(fluxes, intensity, phi_b, np.full_like(fluxes, params.phi0),
                         np.full_like(fluxes, visibility(params.gamma1, params.gamma2)), se, "flux",
                         {"raw_mean": mean}, params.validity_warnings(units))


@dataclass(frozen=True)
class SinusoidFit:
    offset: float
    amplitude: float
    slope: float  # phase advance per unit abscissa
    phase: float
    slope_error: float
    period: float
    period_error: float


def _model(x, offset, amplitude, slope, phase):
    return offset + amplitude * np.cos(slope * x + phase)


def fit_sinusoid(x, y, sigma=None, slope_guess: float | None = None) -> SinusoidFit:
    """Least-squares fit of offset + amplitude cos(slope x + phase).

    Without ``slope_guess`` the starting slope comes from the dominant FFT bin,
    which assumes uniform sampling.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if slope_guess is None:
        power = np.abs(np.fft.rfft(y - y.mean()))
        power[0] = 0.0
        freqs = np.fft.rfftfreq(len(x), d=x[1] - x[0])
        slope_guess = 2 * np.pi * freqs[int(np.argmax(power))]
    amp = 0.5 * (y.max() - y.min())
    best = None
    for ph in np.linspace(-np.pi, np.pi, 8, endpoint=False):
        try:
            with warnings.catch_warnings():
                # exact (noiseless) data leave the covariance undetermined
                warnings.simplefilter("ignore", OptimizeWarning)
                popt, pcov = curve_fit(_model, x, y, p0=[y.mean(), amp, slope_guess, ph], sigma=sigma,
                                       absolute_sigma=sigma is not None, maxfev=20000)
        except RuntimeError:
            continue
        resid = float(np.sum((_model(x, *popt) - y) ** 2))
        if best is None or resid < best[0]:
            best = (resid, popt, pcov)
    if best is None:
        raise RuntimeError("sinusoid fit did not converge")
    _, popt, pcov = best
    offset, amplitude, slope, phase = popt
    if amplitude < 0:
        amplitude, phase = -amplitude, phase + np.pi
    if slope < 0:
        slope, phase = -slope, -phase
    slope_err = float(np.sqrt(max(pcov[2, 2], 0.0))) if np.all(np.isfinite(pcov)) else np.inf
    phase = float(np.mod(phase + np.pi, 2 * np.pi) - np.pi)
    period = 2 * np.pi / slope
    return SinusoidFit(float(offset), float(amplitude), float(slope), phase, slope_err, float(period),
                       float(period * slope_err / slope))
