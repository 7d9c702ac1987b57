import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lcfi.em_fields import (AZIMUTHAL, DIRAC_STRING, FluxTube, GaugeSpec, curl_z, flux_through_circle,
                            gauge_transform, induced_electric_field, magnetic_field, vector_potential)
from lcfi.errors import SingularityError
from lcfi.expr import ScalarField
from lcfi.phase_engine import gradient_line_integral, potential_line_integral
from lcfi.trajectories import circle_path, straight_path
from lcfi.units import Units

GAUGES = [
    GaugeSpec(AZIMUTHAL),
    GaugeSpec(DIRAC_STRING, np.pi),
    GaugeSpec(DIRAC_STRING, 0.7),
    gauge_transform(GaugeSpec(AZIMUTHAL), "sin(x)*cos(y)"),
    gauge_transform(GaugeSpec(DIRAC_STRING, -1.0), "1/(1+x*x+y*y)"),
]


def test_azimuthal_magnitude_and_direction():
    a = vector_potential(GaugeSpec(), FluxTube(2 * np.pi), np.array([0.0, 1.0]))
    np.testing.assert_allclose(a, [-1.0, 0.0], atol=1e-15)


def test_core_potential_inside_finite_tube():
    tube = FluxTube(np.pi, radius=2.0)
    a = vector_potential(GaugeSpec(), tube, np.array([1.0, 0.0]))
    # Phi rho / (2 pi a^2) = 1/8
    np.testing.assert_allclose(a, [0.0, 0.125], atol=1e-16)
    np.testing.assert_array_equal(vector_potential(GaugeSpec(), tube, np.zeros(2)), [0.0, 0.0])


def test_linear_chi_adds_constant():
    tube = FluxTube(1.3)
    p = np.array([[0.4, -2.0], [3.0, 1.0]])
    base = vector_potential(GaugeSpec(), tube, p)
    shifted = vector_potential(gauge_transform(GaugeSpec(), "3*x"), tube, p)
    np.testing.assert_allclose(shifted - base, [[3.0, 0.0], [3.0, 0.0]], atol=1e-14)


@pytest.mark.parametrize("gauge", GAUGES)
@pytest.mark.parametrize("tube", [FluxTube(2.0), FluxTube(2.0, radius=0.5)])
def test_curl_matches_b(gauge, tube):
    point = np.array([0.9, 0.8])  # off the strings and outside the core

    def field(p):
        return vector_potential(gauge, tube, p)

    errs = [abs(curl_z(field, point, h) - magnetic_field(tube, point)) for h in (1e-2, 3e-3, 1e-3)]
    assert errs[-1] < 1e-6


def test_curl_error_is_second_order():
    # the bare potentials are harmonic and difference to rounding, so a
    # non-harmonic gauge function supplies the truncation error
    gauge = gauge_transform(GaugeSpec(DIRAC_STRING, np.pi), "sin(2*x)*cos(3*y)*x")
    tube = FluxTube(2.0, radius=0.5)
    point = np.array([0.9, 0.8])
    errs = [abs(curl_z(lambda p: vector_potential(gauge, tube, p), point, h)) for h in (0.04, 0.02, 0.01)]
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(np.abs(orders - 2) < 0.1)
    assert errs[-1] < 1e-3


def test_curl_inside_core():
    tube = FluxTube(np.pi, radius=1.0)
    c = curl_z(lambda p: vector_potential(GaugeSpec(), tube, p), np.array([0.2, -0.3]), 1e-3)
    assert abs(c - 1.0) < 1e-10  # A is linear inside the core


def test_magnetic_field_examples():
    tube = FluxTube(np.pi, radius=1.0)
    assert magnetic_field(tube, np.array([0.5, 0.0])) == pytest.approx(1.0)
    assert magnetic_field(tube, np.array([2.0, 0.0])) == 0.0
    assert abs(flux_through_circle(tube, 3.0) - np.pi) < 1e-8
    assert magnetic_field(FluxTube(5.0), np.array([1e-9, 0.0])) == 0.0


@given(rho=st.floats(1.0 + 1e-12, 1e6), angle=st.floats(0, 2 * np.pi))
def test_field_strictly_local(rho, angle):
    tube = FluxTube(3.0, radius=1.0, center=(0.5, -0.5))
    p = np.array(tube.center) + rho * np.array([np.cos(angle), np.sin(angle)])
    assert magnetic_field(tube, p) == 0.0


def test_induced_field():
    units = Units(c=2.0)
    tube = FluxTube(1.0, flux_rate=2 * np.pi * units.c)
    e = induced_electric_field(tube, np.array([1.0, 0.0]), units=units)
    # magnitude 1, directed against theta-hat for an increasing flux
    np.testing.assert_allclose(e, [0.0, -1.0], atol=1e-15)
    np.testing.assert_array_equal(induced_electric_field(FluxTube(1.0), np.array([[1.0, 2.0]])), [[0.0, 0.0]])


def test_induced_field_circulation():
    tube = FluxTube(0.0, flux_rate=3.0)
    theta = np.linspace(0, 2 * np.pi, 4001)
    x, w = np.polynomial.legendre.leggauss(64)
    th = np.pi * (x + 1)
    pts = 2.0 * np.stack([np.cos(th), np.sin(th)], -1)
    tang = 2.0 * np.stack([-np.sin(th), np.cos(th)], -1)
    circ = np.pi * np.sum(w * np.einsum("ij,ij->i", induced_electric_field(tube, pts), tang))
    assert abs(circ + 3.0) < 1e-8
    assert theta.size  # sampling only sets the node count above


def test_singularities():
    with pytest.raises(SingularityError, match="center"):
        vector_potential(GaugeSpec(), FluxTube(1.0), np.array([0.0, 0.0]))
    with pytest.raises(SingularityError, match="Dirac string"):
        vector_potential(GaugeSpec(DIRAC_STRING, np.pi), FluxTube(1.0), np.array([-2.0, 0.0]))
    with pytest.raises(SingularityError):
        vector_potential(GaugeSpec(DIRAC_STRING, 0.0), FluxTube(1.0, radius=1.0), np.array([0.0, 0.0]))
    # the opposite ray is regular
    vector_potential(GaugeSpec(DIRAC_STRING, np.pi), FluxTube(1.0), np.array([2.0, 0.0]))


def test_string_gauge_vanishes_outside_core():
    a = vector_potential(GaugeSpec(DIRAC_STRING, 0.3), FluxTube(2.0, radius=0.5), np.array([[1.0, -2.0], [-3, 1]]))
    np.testing.assert_allclose(a, 0.0, atol=1e-16)


@given(chi_source=st.sampled_from(["0", "4.2", "x*y", "sin(x)+y", "1/(1+x*x+y*y)"]),
       x=st.floats(0.2, 3), y=st.floats(0.2, 3))
def test_transform_and_inverse_restore_potential(chi_source, x, y):
    tube = FluxTube(1.7, radius=0.1)
    chi = ScalarField.parse(chi_source)
    g = gauge_transform(gauge_transform(GaugeSpec(DIRAC_STRING, np.pi), chi), chi.scaled(-1.0))
    p = np.array([x, y])
    np.testing.assert_allclose(vector_potential(g, tube, p), vector_potential(GaugeSpec(DIRAC_STRING, np.pi), tube, p),
                               atol=1e-12)


def test_constant_chi_leaves_potential_unchanged():
    p = np.array([[1.0, 1.0], [-2.0, 0.5]])
    tube = FluxTube(1.0)
    np.testing.assert_array_equal(vector_potential(gauge_transform(GaugeSpec(), "7"), tube, p),
                                  vector_potential(GaugeSpec(), tube, p))


def test_composition_is_associative():
    a, b, c = "x*y", "sin(y)", "0.5*x"
    g1 = gauge_transform(gauge_transform(gauge_transform(GaugeSpec(), a), b), c)
    g2 = GaugeSpec(chi=(ScalarField.parse(a),) + gauge_transform(gauge_transform(GaugeSpec(), b), c).chi)
    p = np.array([[0.3, 1.1]])
    np.testing.assert_allclose(vector_potential(g1, FluxTube(1.0), p), vector_potential(g2, FluxTube(1.0), p),
                               rtol=1e-15)


@pytest.mark.parametrize("gauge", GAUGES)
@given(radius=st.floats(0.2, 5), cx=st.floats(-0.1, 0.1), cy=st.floats(-0.1, 0.1), core=st.sampled_from([0.0, 0.15]))
def test_stokes_loop_integral_equals_flux(gauge, radius, cx, cy, core):
    tube = FluxTube(2.3, radius=core)
    loop = circle_path((cx, cy), max(radius, 0.2 + core), n=600)
    value, err, _ = potential_line_integral(gauge, tube, loop.positions, allow_string_crossings=True)
    assert abs(value - 2.3) < 1e-8 * 2.3


def test_winding_chi_outside_loop_keeps_circulation():
    tube = FluxTube(1.0)
    loop = circle_path((0.0, 0.0), 1.0, n=800)
    outside = gauge_transform(GaugeSpec(), "5*atan2(y - 3, x - 3)")
    inside = gauge_transform(GaugeSpec(), "5*atan2(y - 0.2, x + 0.1)")
    base = potential_line_integral(GaugeSpec(), tube, loop.positions)[0]
    assert abs(potential_line_integral(outside, tube, loop.positions)[0] - base) < 1e-8
    # a winding centre enclosed by the loop adds 2 pi times the coefficient
    shift = potential_line_integral(inside, tube, loop.positions)[0] - base
    assert abs(shift - 10 * np.pi) < 1e-6


@given(chi_source=st.sampled_from(["x*y", "sin(x)*cos(y)", "1/(1+x*x+y*y)", "pow(x, 3)"]),
       sx=st.floats(-3, 3), sy=st.floats(-3, 3), ex=st.floats(-3, 3), ey=st.floats(-3, 3))
def test_gradient_theorem(chi_source, sx, sy, ex, ey):
    if np.hypot(ex - sx, ey - sy) < 1e-3:
        return
    chi = ScalarField.parse(chi_source)
    path = straight_path((sx, sy), (ex, ey), 1.0, n=200)
    value, _ = gradient_line_integral(chi, path.positions)
    expected = chi.value(path.end[None])[0] - chi.value(path.start[None])[0]
    assert abs(value - expected) < 1e-9 * max(1.0, abs(expected))
