"""Named experiments: parameter schemas and runners that return tables in memory."""

from __future__ import annotations

import io
from dataclasses import dataclass, field, replace

import numpy as np

from . import dynamics, interferometers, phase_engine, trajectories
from .config import ExperimentConfig, Param, render_config
from .em_fields import FluxTube
from .field_interaction import ChargeState, verify_lagrangian_relation
from .quadrature import ACCURATE, FAST, QuadratureConfig, observed_orders

PROFILES = {"fast": FAST, "accurate": ACCURATE}


@dataclass(frozen=True)
class ExperimentDescriptor:
    name: str
    summary: str
    relations: tuple
    outputs: tuple
    schema: dict = field(repr=False)


@dataclass
class RunOutput:
    files: dict
    summary: dict


def _tube_schema():
    return {
        "flux": Param("flux", 2 * np.pi, "total flux through the tube"),
        "radius": Param("length", 0.0, "core radius (0 = ideal line flux)"),
        "center_x": Param("length", 0.0, "tube position"),
        "center_y": Param("length", 0.0, "tube position"),
    }


def _path_schema(default_kind="circle"):
    return {
        "kind": Param("str", default_kind, "path shape", ("circle", "arc", "straight", "two-path")),
        "center_x": Param("length", 0.0, "circle/arc center"),
        "center_y": Param("length", 0.0, "circle/arc center"),
        "radius": Param("length", 1.0, "circle/arc radius"),
        "theta_start": Param("angle", 0.0, "arc start angle"),
        "theta_end": Param("angle", 2 * np.pi, "arc end angle (circle uses theta_start + 2 pi)"),
        "start_x": Param("length", 0.5, "straight path start"),
        "start_y": Param("length", -2.0, "straight path start"),
        "end_x": Param("length", 0.5, "straight path end"),
        "end_y": Param("length", 2.0, "straight path end"),
        "s1_x": Param("length", -1.0, "two-path source 1"),
        "s1_y": Param("length", -2.0, "two-path source 1"),
        "s2_x": Param("length", 1.0, "two-path source 2"),
        "s2_y": Param("length", -2.0, "two-path source 2"),
        "screen_x": Param("length", 0.0, "two-path common screen point"),
        "screen_y": Param("length", 3.0, "two-path common screen point"),
        "speed": Param("speed", 0.01, "speed along the path"),
        "samples": Param("int", 1000, "samples per path"),
    }


SCHEMAS = {
    "loopless-fringe": {
        "tube": _tube_schema(),
        "charge": {"q": Param("charge", 1.0, "particle charge")},
        "sources": {
            "s1_x": Param("length", -1.0, "source 1 position"),
            "s1_y": Param("length", -2.0, "source 1 position"),
            "s2_x": Param("length", 1.0, "source 2 position"),
            "s2_y": Param("length", -2.0, "source 2 position"),
            "v1": Param("dimensionless", np.sqrt(0.5), "one-particle amplitude of source 1 (u1 = sqrt(1 - v1^2))"),
            "v2": Param("dimensionless", np.sqrt(0.5), "one-particle amplitude of source 2"),
        },
        "screen": {
            "y": Param("length", 3.0, "screen line y coordinate"),
            "x_min": Param("length", -2.95, "first screen point"),
            "x_max": Param("length", 2.95, "last screen point"),
            "points": Param("int", 100, "number of screen points"),
            "wavenumber": Param("wavenumber", 5.0, "wavenumber of the outgoing waves"),
            "r_min": Param("length", 1e-6, "near-field clamp of the 1/r envelope"),
        },
    },
    "andreev-sweep": {
        "junction": {
            "rho1": Param("dos", 1.0, "density of states of superconductor 1"),
            "rho2": Param("dos", 1.0, "density of states of superconductor 2"),
            "rhoN": Param("dos", 1.0, "density of states of the normal region"),
            "t1": Param("energy", 0.1, "tunneling amplitude magnitude at junction 1"),
            "t2": Param("energy", 0.1, "tunneling amplitude magnitude at junction 2"),
            "gap": Param("energy", 1.0, "superconducting gap"),
            "bias": Param("voltage", 0.01, "bias voltage"),
            "tau": Param("time", 1.0, "pulse duration (recorded only)"),
            "delta_theta": Param("angle", 2 * np.pi, "geometry angle between the junctions"),
            "phi0": Param("angle", 0.0, "flux-independent phase offset"),
        },
        "sweep": {
            "flux_min": Param("flux", 0.0, "first flux value"),
            "flux_max": Param("flux", 4 * np.pi, "last flux value"),
            "points": Param("int", 201, "number of flux values"),
        },
        "protocol": {
            "repetitions": Param("int", 0, "noisy repetitions per flux value (0 = noiseless sweep)"),
            "noise_fraction": Param("dimensionless", 0.0, "noise standard deviation relative to the maximum current"),
        },
    },
    "gauge-audit": {
        "tube": _tube_schema(),
        "charge": {"q": Param("charge", 1.0, "particle charge")},
        "path": _path_schema("circle"),
        "gauges": {
            "list": Param("gauges", "azimuthal; azimuthal+chi:0.5*x; azimuthal+chi:sin(x)*cos(y)",
                          "semicolon-separated gauges"),
            "allow_string_crossings": Param("bool", False, "count Dirac-string crossings instead of failing"),
        },
    },
    "lagrangian-identity": {
        "tube": _tube_schema(),
        "charge": {"q": Param("charge", 1.0, "particle charge")},
        "path": _path_schema("straight"),
        "gauges": {
            "list": Param("gauges", "azimuthal; dirac-string@pi; azimuthal+chi:1/(1+x*x+y*y)",
                          "semicolon-separated gauges"),
        },
        "check": {
            "base_samples": Param("int", 41, "samples on the coarsest time grid"),
            "halvings": Param("int", 3, "number of time-step halvings"),
        },
    },
    "conservation-suite": {
        "ramp": {
            "flux_start": Param("flux", 0.0, "flux before the ramp"),
            "flux_end": Param("flux", 2 * np.pi, "flux after the ramp"),
            "duration": Param("time", 1.0, "ramp duration"),
            "profile": Param("str", "linear", "ramp shape", ("linear", "smoothstep")),
            "radius": Param("length", 0.0, "core radius"),
        },
        "charge": {
            "q": Param("charge", 1.0, "charge"),
            "x": Param("length", 1.0, "held position"),
            "y": Param("length", 0.0, "held position"),
            "vx": Param("speed", 0.01, "enforced velocity for the work balance"),
            "vy": Param("speed", 0.0, "enforced velocity for the work balance"),
        },
        "check": {
            "step": Param("time", 1e-4, "central-difference step for dPi/dt"),
            "samples": Param("int", 21, "interior ramp times of the momentum check"),
            "work_steps": Param("int", 2000, "trapezoid intervals of the work integral"),
            "loop_radius": Param("length", 2.0, "radius of the Faraday loop"),
            "loop_samples": Param("int", 200, "polygon vertices of the Faraday loop"),
            "loop_nodes": Param("int", 4, "Gauss-Legendre nodes per loop segment"),
        },
    },
    "trajectory": {
        "tube": _tube_schema(),
        "charge": {
            "q": Param("charge", 1.0, "charge"),
            "mass": Param("mass", 1.0, "mass"),
            "x": Param("length", -5.0, "initial position"),
            "y": Param("length", 0.5, "initial position"),
            "vx": Param("speed", 0.05, "initial velocity"),
            "vy": Param("speed", 0.0, "initial velocity"),
        },
        "integrator": {
            "dt": Param("time", 0.5, "time step"),
            "total_time": Param("time", 200.0, "integration time"),
        },
    },
}

DESCRIPTORS = {
    "loopless-fringe": ExperimentDescriptor(
        "loopless-fringe", "detection probability of the two-source device along a screen line",
        ("P(x) = |u2 v1 phi1|^2 + |u1 v2 phi2|^2 + 2|u1 v1 u2 v2 phi1 phi2| cos(phi_B + phi0)",
         "phi_B = q Phi dtheta / (2 pi hbar c)"),
        ("fringe.tsv",), SCHEMAS["loopless-fringe"]),
    "andreev-sweep": ExperimentDescriptor(
        "andreev-sweep", "Andreev interferometer current against flux, optionally through the noisy protocol",
        ("I = (pi e^2 / hbar) V [G1^2 + G2^2 + 2 G1 G2 cos(phi0 + phi_B)]", "phi_B = e Phi dtheta / (pi hbar c)",
         "G_j = 2 pi rho_j rho_N |t_j|^2"),
        ("andreev.tsv", "fit.tsv"), SCHEMAS["andreev-sweep"]),
    "gauge-audit": ExperimentDescriptor(
        "gauge-audit", "potential-theory phase of a path in several gauges against the local phase",
        ("phi = (q / hbar c) int A . dr", "phi_local = (1 / hbar) int Pi_q . dr",
         "closed loop: phi = q Phi / (hbar c)"),
        ("audit.tsv",), SCHEMAS["gauge-audit"]),
    "lagrangian-identity": ExperimentDescriptor(
        "lagrangian-identity", "residual of the local/potential Lagrangian identity under time-step halving",
        ("L^f = L + dF/dt", "L^f = rdot . Pi_q - U_q", "F = (1 / 4 pi c) int E_q . A d^3r'"),
        ("lagrangian.tsv",), SCHEMAS["lagrangian-identity"]),
    "conservation-suite": ExperimentDescriptor(
        "conservation-suite", "momentum balance, Faraday circulation and work balance during a flux ramp",
        ("Q E + dPi_Q/dt = 0", "circulation of E = -(1/c) dPhi/dt", "W_B = rdot . Pi_q, dW_B/dt = -q rdot . E"),
        ("conservation.tsv", "momentum.tsv"), SCHEMAS["conservation-suite"]),
    "trajectory": ExperimentDescriptor(
        "trajectory", "classical orbit under the Lorentz force of a static tube",
        ("m dv/dt = q (E + v x B / c)",),
        ("trajectory.tsv",), SCHEMAS["trajectory"]),
}


def list_experiments() -> list:
    return [DESCRIPTORS[k] for k in SCHEMAS]


def default_config_text(name: str) -> str:
    if name not in SCHEMAS:
        raise KeyError(name)
    return render_config(name, SCHEMAS[name])


def quadrature_for(cfg: ExperimentConfig, profile: str) -> QuadratureConfig:
    return replace(PROFILES[profile], **cfg.quadrature)


def _tube(sec) -> FluxTube:
    return FluxTube(sec["flux"], sec["radius"], (sec["center_x"], sec["center_y"]))


def _paths(sec, n=None):
    """A single path or, for kind two-path, the pair (path1, path2)."""
    n = n or sec["samples"]
    kind, v = sec["kind"], sec["speed"]
    center = (sec["center_x"], sec["center_y"])
    if kind == "circle":
        return trajectories.circle_path(center, sec["radius"], v, 1, n, sec["theta_start"])
    if kind == "arc":
        return trajectories.arc_path(center, sec["radius"], sec["theta_start"], sec["theta_end"], v, n)
    if kind == "straight":
        return trajectories.straight_path((sec["start_x"], sec["start_y"]), (sec["end_x"], sec["end_y"]), v, n)
    p1, p2, _ = trajectories.two_path_geometry((sec["s1_x"], sec["s1_y"]), (sec["s2_x"], sec["s2_y"]),
                                               (sec["screen_x"], sec["screen_y"]), (0.0, 0.0), n, v)
    return p1, p2


def _table(header, rows, delimiter="\t") -> str:
    buf = io.StringIO()
    buf.write(delimiter.join(header) + "\n")
    for row in rows:
        buf.write(delimiter.join(f"{x:.17g}" if isinstance(x, float) else str(x) for x in row) + "\n")
    return buf.getvalue()


def run_loopless_fringe(cfg: ExperimentConfig, quad: QuadratureConfig) -> RunOutput:
    src, scr = cfg.sections["sources"], cfg.sections["screen"]
    v1, v2 = src["v1"], src["v2"]
    state = interferometers.SourceState(np.sqrt(1 - v1 * v1), v1, np.sqrt(1 - v2 * v2), v2)
    xs = np.linspace(scr["x_min"], scr["x_max"], scr["points"])
    pts = np.column_stack([xs, np.full_like(xs, scr["y"])])
    data = interferometers.loopless_fringe(state, (src["s1_x"], src["s1_y"]), (src["s2_x"], src["s2_y"]),
                                           _tube(cfg.sections["tube"]), cfg.get("charge", "q"), scr["wavenumber"],
                                           pts, cfg.units, scr["r_min"])
    summary = {"max_intensity": float(data.intensity.max()), "min_intensity": float(data.intensity.min()),
               "max_abs_dP_dflux": float(np.max(np.abs(data.extra["dP_dflux"])))}
    return RunOutput({"fringe.tsv": data.to_table()}, summary)


def run_andreev_sweep(cfg: ExperimentConfig, quad: QuadratureConfig) -> RunOutput:
    j, sw, pr = cfg.sections["junction"], cfg.sections["sweep"], cfg.sections["protocol"]
    params = interferometers.JunctionParams(**j)
    fluxes = np.linspace(sw["flux_min"], sw["flux_max"], sw["points"])
    if pr["repetitions"] > 0:
        i_max = float(np.max(interferometers.andreev_current(params, fluxes, cfg.units)[0]))
        data = interferometers.measurement_protocol(params, fluxes, pr["repetitions"], pr["noise_fraction"] * i_max,
                                                    cfg.seed, cfg.units)
        y = data.extra["raw_mean"]
        sigma = data.std_error if np.all(data.std_error > 0) else None
    else:
        data = interferometers.andreev_sweep(params, fluxes, cfg.units)
        y, sigma = data.intensity, None
    expected_slope = cfg.units.e * params.delta_theta / (np.pi * cfg.units.hbar * cfg.units.c)
    fit = interferometers.fit_sinusoid(fluxes, y, sigma, slope_guess=abs(expected_slope))
    fit_rows = [("period", fit.period, fit.period_error), ("slope", fit.slope, fit.slope_error),
                ("expected_period", interferometers.flux_period(params, cfg.units), 0.0),
                ("expected_slope", abs(expected_slope), 0.0),
                ("visibility", interferometers.visibility(params.gamma1, params.gamma2), 0.0)]
    summary = {"fitted_period": fit.period, "period_error": fit.period_error, "fitted_slope": fit.slope,
               "slope_error": fit.slope_error, "expected_slope": float(abs(expected_slope)),
               "visibility": float(fit_rows[-1][1]), "warnings": list(data.warnings)}
    return RunOutput({"andreev.tsv": data.to_table(), "fit.tsv": _table(("quantity", "value", "error"), fit_rows)},
                     summary)


def run_gauge_audit(cfg: ExperimentConfig, quad: QuadratureConfig) -> RunOutput:
    tube = _tube(cfg.sections["tube"])
    g = cfg.sections["gauges"]
    paths = _paths(cfg.sections["path"])
    q = cfg.get("charge", "q")
    if isinstance(paths, tuple):
        audit = phase_engine.gauge_audit(None, g["list"], tube, q, cfg.units, g["allow_string_crossings"], paths)
    else:
        audit = phase_engine.gauge_audit(paths, g["list"], tube, q, cfg.units, g["allow_string_crossings"])
    summary = {"verdict": audit.verdict, "spread": audit.spread, "local_phase": audit.local_phase,
               "closed": audit.closed, "tolerance": audit.tolerance}
    return RunOutput({"audit.tsv": audit.to_table()}, summary)


def run_lagrangian_identity(cfg: ExperimentConfig, quad: QuadratureConfig) -> RunOutput:
    tube = _tube(cfg.sections["tube"])
    chk = cfg.sections["check"]
    rows = []
    summary = {}
    for gauge in cfg.get("gauges", "list"):
        errors = []
        for h in range(chk["halvings"] + 1):
            n = (chk["base_samples"] - 1) * 2**h + 1
            path = _paths(cfg.sections["path"], n)
            res = verify_lagrangian_relation(path, gauge, tube, cfg.get("charge", "q"), cfg.units, quad)
            dt = float(path.times[1] - path.times[0])
            errors.append(res.max_residual)
            rows.append((gauge.identifier, n, dt, res.max_residual, res.relative))
        orders = observed_orders(errors, floor=1e-14 * max(res.scale, 1e-300))
        summary[gauge.identifier] = {"finest_relative": rows[-1][-1], "orders": [float(o) for o in orders]}
    return RunOutput({"lagrangian.tsv": _table(("gauge", "samples", "dt", "max_residual", "relative"), rows)}, summary)


def run_conservation_suite(cfg: ExperimentConfig, quad: QuadratureConfig) -> RunOutput:
    r, ch, chk = cfg.sections["ramp"], cfg.sections["charge"], cfg.sections["check"]
    ramp = dynamics.FluxRamp(r["flux_start"], r["flux_end"], r["duration"], r["profile"], r["radius"])
    charge = ChargeState(ch["q"], 1.0, (ch["x"], ch["y"]), (ch["vx"], ch["vy"]))
    mom = dynamics.momentum_conservation_check(charge, ramp, chk["samples"], chk["step"], cfg.units, quad)
    mom_half = dynamics.momentum_conservation_check(charge, ramp, chk["samples"], chk["step"] / 2, cfg.units, quad)
    tube_mid = ramp.tube_at(0.5 * r["duration"])
    loop = trajectories.circle_path(tube_mid.center, chk["loop_radius"], 1.0, 1, chk["loop_samples"])
    far = dynamics.faraday_check(tube_mid, loop, cfg.units, chk["loop_nodes"])
    far_scale = abs(tube_mid.flux_rate) / cfg.units.c
    work = dynamics.work_balance_check(charge, ramp, chk["work_steps"], cfg.units, quad)
    rows = [("momentum", mom.max_residual, mom.relative), ("momentum_half_step", mom_half.max_residual,
                                                          mom_half.relative),
            ("faraday", far, far / far_scale if far_scale else far),
            ("work_balance", work.residual, work.relative)]
    summary = {name: {"residual": float(a), "relative": float(b)} for name, a, b in rows}
    return RunOutput({"conservation.tsv": _table(("check", "residual", "relative"), rows),
                      "momentum.tsv": mom.to_table()}, summary)


def run_trajectory(cfg: ExperimentConfig, quad: QuadratureConfig) -> RunOutput:
    ch, it = cfg.sections["charge"], cfg.sections["integrator"]
    charge = ChargeState(ch["q"], ch["mass"], (ch["x"], ch["y"]), (ch["vx"], ch["vy"]))
    traj = dynamics.integrate_trajectory(charge, _tube(cfg.sections["tube"]),
                                         dynamics.DynamicsConfig(it["dt"], it["total_time"]), cfg.units)
    summary = {"deflection": dynamics.deflection_angle(traj), "energy_drift": traj.metadata["energy_drift"],
               "final_position": traj.end.tolist()}
    return RunOutput({"trajectory.tsv": traj.to_table()}, summary)


RUNNERS = {
    "loopless-fringe": run_loopless_fringe,
    "andreev-sweep": run_andreev_sweep,
    "gauge-audit": run_gauge_audit,
    "lagrangian-identity": run_lagrangian_identity,
    "conservation-suite": run_conservation_suite,
    "trajectory": run_trajectory,
}
