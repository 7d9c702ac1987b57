import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lcfi.expr import ScalarField

coord = st.floats(-3, 3, allow_nan=False)

EXPRESSIONS = [
    "3*x",
    "x*y - 2*y + 1",
    "sin(x)*cos(y)",
    "1/(1+x*x+y*y)",
    "sqrt(1+x*x)",
    "pow(x, 3) - pow(y, 2)",
    "-x + +y",
    "pi*x",
]


def numeric_gradient(f, p, h=1e-6):
    ex, ey = np.array([h, 0.0]), np.array([0.0, h])
    return np.array([(f(p + ex) - f(p - ex)) / (2 * h), (f(p + ey) - f(p - ey)) / (2 * h)])


@pytest.mark.parametrize("source", EXPRESSIONS)
@given(x=coord, y=coord)
def test_gradient_matches_central_difference(source, x, y):
    chi = ScalarField.parse(source)
    p = np.array([x, y])
    fd = numeric_gradient(lambda q: float(chi.value(q[None])[0]), p)
    np.testing.assert_allclose(chi.gradient(p[None])[0], fd, rtol=1e-6, atol=1e-6)


def test_values_match_numpy():
    chi = ScalarField.parse("sin(x)*cos(y) + pow(x, 2)/sqrt(1+y*y)")
    pts = np.array([[0.3, -1.2], [2.0, 0.5]])
    x, y = pts.T
    np.testing.assert_allclose(chi.value(pts), np.sin(x) * np.cos(y) + x**2 / np.sqrt(1 + y * y), rtol=1e-15)


def test_constant_expression_broadcasts():
    chi = ScalarField.parse("2.5")
    pts = np.zeros((4, 2))
    assert chi.value(pts).shape == (4,)
    np.testing.assert_array_equal(chi.gradient(pts), np.zeros((4, 2)))


def test_atan2_is_multivalued_and_value_refused():
    chi = ScalarField.parse("5*atan2(y - 1, x + 2)")
    assert chi.multivalued
    with pytest.raises(ValueError, match="multivalued"):
        chi.value(np.array([[0.0, 0.0]]))
    g = chi.gradient(np.array([[1.0, 1.0]]))[0]
    # grad atan2(y', x') = (-y', x') / r'^2 with (x', y') = (3, 0)
    np.testing.assert_allclose(g, 5 * np.array([0.0, 3.0]) / 9.0)


@pytest.mark.parametrize("bad", ["exp(x)", "z + 1", "x ** 2", "__import__('os')", "x.real", "lambda: 1", "x +",
                                 "sin(x, y)", "[x]"])
def test_rejects_outside_grammar(bad):
    with pytest.raises(ValueError):
        ScalarField.parse(bad)


def test_scaled():
    chi = ScalarField.parse("x*y").scaled(-2.0)
    np.testing.assert_allclose(chi.value(np.array([[2.0, 3.0]])), [-12.0])
    np.testing.assert_allclose(chi.gradient(np.array([[2.0, 3.0]])), [[-6.0, -4.0]])
