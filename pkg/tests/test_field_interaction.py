import functools
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from lcfi.em_fields import AZIMUTHAL, DIRAC_STRING, FluxTube, GaugeSpec, gauge_transform
from lcfi.errors import DiracStringCrossing, DivergentTailError, SingularityError
from lcfi.expr import ScalarField
from lcfi.field_interaction import (ChargeState, NonRelativisticWarning, boundary_term, chi_boundary_term,
                                    field_angular_momentum, field_momentum, interaction_breakdown,
                                    interaction_energy, lagrangian_local, lagrangian_potential,
                                    string_boundary_term, verify_lagrangian_relation, work_to_establish_B)
from lcfi.quadrature import QuadratureConfig
from lcfi.trajectories import circle_path, straight_path
from lcfi.units import Units

QUAD = QuadratureConfig(rtol=1e-8)


# -- independent oracles built on scipy.integrate in tube-centred coordinates --

def quiet(fn):
    # quadpack flags the integrable log singularity at the charge; the comparisons below judge the result
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            return fn(*args, **kwargs)
    return wrapper


@quiet
def pi_q_oracle(q, tube, r, c=1.0):
    """(1/4 pi c) int E_q x B over the core, with the z integral done as 2q d/|d|^2."""
    b = tube.flux / (np.pi * tube.radius**2)
    cx, cy = tube.center

    def comp(k):
        def f(t, rho):
            dx = cx + rho * np.cos(t) - r[0]
            dy = cy + rho * np.sin(t) - r[1]
            d2 = dx * dx + dy * dy
            return rho * (dy if k == 0 else -dx) / d2
        val, _ = integrate.dblquad(f, 0.0, tube.radius, 0.0, 2 * np.pi, epsabs=1e-13, epsrel=1e-11)
        return val

    return 2 * q * b / (4 * np.pi * c) * np.array([comp(0), comp(1)])


@quiet
def string_flux_oracle(q, flux, r, angle, c=1.0):
    """(Phi/4 pi c) times the 2D charge field crossing the string half-line, integrated with quad."""
    s = np.array([np.cos(angle), np.sin(angle)])
    n = np.array([-s[1], s[0]])

    def f(l):
        d = l * s - np.asarray(r)
        return 2 * q * (d @ n) / (d @ d)

    val, _ = integrate.quad(f, 0.0, np.inf, epsabs=1e-13, epsrel=1e-12, limit=400)
    return flux / (4 * np.pi * c) * val


@quiet
def symmetric_overlap_oracle(q, tube, r, inner="theta", c=1.0):
    """(1/4 pi c) int E_q . A_sym over the plane, outer cutoff far away, in both integration orders."""
    a = tube.radius
    R = 200.0

    def a_theta(rho):
        return tube.flux * (rho / (2 * np.pi * a * a) if rho < a else 1 / (2 * np.pi * rho))

    def f(t, rho):
        dx = rho * np.cos(t) - r[0]
        dy = rho * np.sin(t) - r[1]
        # A is along theta-hat = (-sin t, cos t)
        return rho * 2 * q * (-dx * np.sin(t) + dy * np.cos(t)) / (dx * dx + dy * dy) * a_theta(rho)

    if inner == "theta":
        val, _ = integrate.dblquad(f, 0.0, R, 0.0, 2 * np.pi, epsabs=1e-11)
    else:
        val, _ = integrate.dblquad(lambda rho, t: f(t, rho), 0.0, 2 * np.pi, 0.0, R, epsabs=1e-11)
    return val / (4 * np.pi * c)


# -- field momentum --

def test_z_integral_of_coulomb_field_reduces_to_2d_kernel():
    d = 0.7
    val, _ = integrate.quad(lambda z: d / (d * d + z * z) ** 1.5, -np.inf, np.inf)
    assert val == pytest.approx(2 / d, rel=1e-12)


def test_ideal_tube_field_momentum_direction_and_magnitude():
    q, flux = 1.5, 2.0
    pi_q = field_momentum(ChargeState(q, position=(0.0, 2.0)), FluxTube(flux))
    np.testing.assert_allclose(pi_q, [-q * flux / (2 * np.pi * 2.0), 0.0], atol=1e-15)


@pytest.mark.parametrize("r", [(2.0, 0.5), (0.3, -0.2), (1.001, 0.0), (-0.9, 0.1)])
def test_finite_tube_field_momentum_matches_dblquad(r):
    tube = FluxTube(1.7, radius=1.0, center=(0.0, 0.0))
    charge = ChargeState(0.8, position=r)
    expected = pi_q_oracle(0.8, tube, np.array(r))
    got = field_momentum(charge, tube, quad=QUAD)
    np.testing.assert_allclose(got, expected, rtol=1e-6, atol=1e-9 * np.abs(expected).max())


def test_outside_charge_sees_ideal_tube_and_inside_charge_sees_enclosed_flux():
    q, flux, a = 1.0, 3.0, 0.5
    outside = ChargeState(q, position=(0.0, 1.0))
    np.testing.assert_allclose(field_momentum(outside, FluxTube(flux, radius=a), quad=QUAD),
                               field_momentum(outside, FluxTube(flux)), rtol=1e-7, atol=1e-14)
    rho = 0.2
    inside = ChargeState(q, position=(rho, 0.0))
    enclosed = flux * rho**2 / a**2
    np.testing.assert_allclose(field_momentum(inside, FluxTube(flux, radius=a), quad=QUAD),
                               [0.0, q * enclosed / (2 * np.pi * rho)], rtol=1e-7, atol=1e-12)


def test_field_momentum_falls_as_inverse_distance():
    tube = FluxTube(1.0)
    p1 = np.hypot(*field_momentum(ChargeState(1.0, position=(1.3, 0.0)), tube))
    p2 = np.hypot(*field_momentum(ChargeState(1.0, position=(2.6, 0.0)), tube))
    assert p1 / p2 == pytest.approx(2.0, rel=1e-14)


@given(q=st.floats(-5, 5), flux=st.floats(-5, 5), k=st.floats(-3, 3).filter(lambda x: abs(x) > 1e-3))
def test_field_momentum_is_linear_in_charge_and_flux(q, flux, k):
    r = (0.7, -1.1)
    base = field_momentum(ChargeState(q, position=r), FluxTube(flux))
    np.testing.assert_allclose(field_momentum(ChargeState(k * q, position=r), FluxTube(flux)), k * base,
                               rtol=1e-12, atol=1e-300)
    np.testing.assert_allclose(field_momentum(ChargeState(q, position=r), FluxTube(k * flux)), k * base,
                               rtol=1e-12, atol=1e-300)


@given(x=st.floats(-4, 4), y=st.floats(-4, 4))
def test_angular_momentum_of_field_is_position_independent(x, y):
    if np.hypot(x, y) < 1e-3:
        return
    q, flux = 0.9, 1.4
    pi_q = field_momentum(ChargeState(q, position=(x, y)), FluxTube(flux))
    lz = x * pi_q[1] - y * pi_q[0]
    assert lz == pytest.approx(field_angular_momentum(q, flux), rel=1e-12)


def test_field_momentum_scales_with_gaussian_c():
    units = Units(hbar=1.0, c=3.0, e=1.0)
    charge = ChargeState(1.0, position=(1.0, 0.0))
    np.testing.assert_allclose(field_momentum(charge, FluxTube(1.0), units) * 3.0,
                               field_momentum(charge, FluxTube(1.0)), rtol=1e-15)


def test_charge_on_tube_center_is_singular():
    with pytest.raises(SingularityError):
        field_momentum(ChargeState(1.0, position=(0.0, 0.0)), FluxTube(1.0))
    with pytest.raises(SingularityError):
        boundary_term(ChargeState(1.0, position=(0.0, 0.0)), GaugeSpec(), FluxTube(1.0))


# -- interaction energy --

def test_interaction_energy_of_static_tube_is_zero():
    assert interaction_energy(ChargeState(1.0, position=(1.0, 0.2)), FluxTube(1.0, radius=0.3)) == 0.0


@pytest.mark.parametrize("r", [(1.5, 0.4), (0.2, 0.1)])
def test_interaction_energy_of_ramped_tube_matches_dblquad(r):
    # the oracle integrates E_q . E_induced ring by ring about the tube centre
    tube = FluxTube(1.0, radius=0.6, flux_rate=0.7)
    a, rate = tube.radius, tube.flux_rate

    def f(t, rho):
        dx = rho * np.cos(t) - r[0]
        dy = rho * np.sin(t) - r[1]
        e_theta = -rate / (2 * np.pi) * (rho / a**2 if rho < a else 1 / rho)
        return rho * 2 * (-dx * np.sin(t) + dy * np.cos(t)) / (dx * dx + dy * dy) * e_theta

    expected = integrate.dblquad(f, 0.0, 50.0, 0.0, 2 * np.pi, epsabs=1e-11)[0] / (4 * np.pi)
    got = interaction_energy(ChargeState(1.0, position=r), tube, quad=QUAD)
    # both vanish; compare in absolute terms against the natural scale q Phi'/(2 pi c)
    scale = rate / (2 * np.pi)
    assert abs(got - expected) < 1e-7 * scale
    assert abs(got) < 1e-7 * scale


# -- boundary term --

@pytest.mark.parametrize("inner", ["theta", "rho"])
def test_symmetric_gauge_overlap_vanishes_in_both_orders(inner):
    tube = FluxTube(1.2, radius=0.5)
    r = np.array([1.1, 0.4])
    oracle = symmetric_overlap_oracle(1.0, tube, r, inner)
    got = boundary_term(ChargeState(1.0, position=r), GaugeSpec(), tube, quad=QUAD)
    scale = tube.flux / (2 * np.pi)
    assert abs(oracle) < 1e-8 * scale
    assert abs(got - oracle) < 1e-7 * scale


def test_ideal_symmetric_gauge_boundary_term_is_exactly_zero():
    assert boundary_term(ChargeState(2.0, position=(0.3, -1.0)), GaugeSpec(), FluxTube(5.0)) == 0.0


@pytest.mark.parametrize("angle", [np.pi, 0.4, -2.0])
@pytest.mark.parametrize("r", [(1.0, 1.0), (-2.0, 0.3), (0.1, -0.5)])
def test_string_term_matches_flux_through_half_line(angle, r):
    q, flux = 1.3, 0.9
    gauge = GaugeSpec(DIRAC_STRING, angle)
    got = string_boundary_term(ChargeState(q, position=r), gauge, FluxTube(flux))
    assert got == pytest.approx(string_flux_oracle(q, flux, r, angle), rel=1e-9, abs=1e-12)


def test_string_term_closed_form():
    q, flux = 1.0, 2 * np.pi
    gauge = GaugeSpec(DIRAC_STRING, 0.0)
    for theta_s in (0.3, np.pi / 2, 3.0, 5.9):
        r = (np.cos(theta_s), np.sin(theta_s))
        assert string_boundary_term(ChargeState(q, position=r), gauge, FluxTube(flux)) == pytest.approx(
            theta_s - np.pi, rel=1e-13)


def test_charge_on_string_is_singular():
    with pytest.raises(SingularityError):
        string_boundary_term(ChargeState(1.0, position=(-1.0, 0.0)), GaugeSpec(DIRAC_STRING, np.pi), FluxTube(1.0))


@pytest.mark.parametrize("expr", ["1/(1+x*x+y*y)", "x/((1+x*x+y*y)*(1+x*x+y*y))",
                                  "0.5/(2+(x-1)*(x-1)+y*y)"])
def test_gauge_function_term_is_minus_q_chi_over_c(expr):
    q = 1.7
    r = np.array([0.6, -0.3])
    chi = ScalarField.parse(expr)
    got = chi_boundary_term(ChargeState(q, position=r), chi, FluxTube(1.0), quad=QUAD)
    assert got == pytest.approx(-q * float(chi.value(r[None, :])[0]), rel=1e-6, abs=1e-10)


def test_growing_gauge_function_has_divergent_overlap():
    with pytest.raises(DivergentTailError):
        chi_boundary_term(ChargeState(1.0, position=(1.0, 0.0)), ScalarField.parse("0.5*x"), FluxTube(1.0))


def test_boundary_term_adds_string_and_gauge_function_parts():
    tube = FluxTube(1.1)
    charge = ChargeState(0.7, position=(0.4, 1.2))
    gauge = gauge_transform(GaugeSpec(DIRAC_STRING, -1.0), "1/(1+x*x+y*y)")
    chi_val = 1 / (1 + 0.4**2 + 1.2**2)
    expected = string_boundary_term(charge, gauge, tube) - 0.7 * chi_val
    assert boundary_term(charge, gauge, tube, quad=QUAD) == pytest.approx(expected, rel=1e-6)


# -- Lagrangians --

@given(x=st.floats(-3, 3), y=st.floats(-3, 3), vx=st.floats(-0.09, 0.09), vy=st.floats(-0.09, 0.09))
def test_local_and_symmetric_potential_lagrangians_agree_for_ideal_tube(x, y, vx, vy):
    if np.hypot(x, y) < 1e-2:
        return
    charge = ChargeState(1.2, position=(x, y), velocity=(vx, vy))
    tube = FluxTube(0.8)
    assert lagrangian_local(charge, tube) == pytest.approx(lagrangian_potential(charge, GaugeSpec(), tube),
                                                           rel=1e-12, abs=1e-15)


def test_work_to_establish_field_is_velocity_dot_momentum():
    charge = ChargeState(1.0, position=(1.0, 0.0), velocity=(0.02, 0.05))
    tube = FluxTube(2 * np.pi)
    # Pi_q = (0, 1) here
    assert work_to_establish_B(charge, tube) == pytest.approx(0.05, rel=1e-14)


def test_near_boundary_charge_matches_ideal_tube():
    a = 0.5
    charge = ChargeState(1.0, position=(1.001 * a, 0.0), velocity=(0.0, 0.03))
    finite = lagrangian_local(charge, FluxTube(1.0, radius=a), quad=QUAD)
    ideal = lagrangian_local(charge, FluxTube(1.0))
    assert finite == pytest.approx(ideal, rel=1e-6)


def test_breakdown_warns_for_fast_charge():
    charge = ChargeState(1.0, position=(1.0, 0.0), velocity=(0.5, 0.0))
    with pytest.warns(NonRelativisticWarning):
        out = interaction_breakdown(charge, FluxTube(1.0), GaugeSpec())
    assert out.warnings
    assert out.gauge_used == AZIMUTHAL


def test_breakdown_is_quiet_for_slow_charge():
    charge = ChargeState(1.0, position=(1.0, 0.0), velocity=(0.01, 0.0))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        out = interaction_breakdown(charge, FluxTube(1.0), GaugeSpec(DIRAC_STRING, np.pi))
    assert out.boundary_term == pytest.approx(string_boundary_term(charge, GaugeSpec(DIRAC_STRING, np.pi),
                                                                   FluxTube(1.0)))


def test_lagrangian_relation_holds_along_circle_in_smooth_gauge():
    traj = circle_path((0.0, 0.0), 1.5, speed=0.05, n=201)
    gauge = gauge_transform(GaugeSpec(), "1/(1+x*x+y*y)")
    check = verify_lagrangian_relation(traj, gauge, FluxTube(1.0), 1.0)
    assert check.relative < 1e-4


def test_lagrangian_relation_refuses_string_crossing():
    traj = straight_path((-2.0, -1.0), (-2.0, 1.0), speed=0.05, n=51)
    with pytest.raises(DiracStringCrossing):
        verify_lagrangian_relation(traj, GaugeSpec(DIRAC_STRING, np.pi), FluxTube(1.0), 1.0)
