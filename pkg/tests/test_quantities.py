import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tonti.complex import build_complex
from tonti.errors import DimensionMismatch, TooFewSamples
from tonti.quantities import (
    Cochain,
    Family,
    QuantityKind,
    TimeGrid,
    apply_boundary,
    apply_coboundary,
    display_name,
    time_derivative,
    time_integral,
)

CX = build_complex(
    ["A", "B", "G"],
    [("l1", "A", "G"), ("l2", "A", "G"), ("l3", "A", "B"), ("l4", "B", "G")],
    [("M1", [("l1", -1), ("l2", 1)]), ("M2", [("l2", -1), ("l3", 1), ("l4", 1)])],
)


def test_coboundary_of_potential():
    e = Cochain(QuantityKind.POTENTIAL, np.array([-0.5, 7 / 3, 0.0]))
    out = apply_coboundary(e, CX)
    assert out.kind is QuantityKind.VOLTAGE
    # drops from tail to head are the negated coboundary
    np.testing.assert_allclose(-out.values, [-0.5, -0.5, -17 / 6, 7 / 3])


def test_coboundary_of_voltage_is_mesh_sum():
    v = Cochain(QuantityKind.VOLTAGE, np.array([1.0, 2.0, 3.0, 4.0]))
    np.testing.assert_allclose(apply_coboundary(v, CX).values, [1.0, 5.0])


def test_boundary_of_mesh_current():
    i = Cochain(QuantityKind.MESH_CURRENT, np.array([-19 / 12, -17 / 12]))
    j = apply_boundary(i, CX)
    assert j.kind is QuantityKind.CURRENT
    np.testing.assert_allclose(j.values, [19 / 12, -2 / 12, -17 / 12, -17 / 12])
    np.testing.assert_allclose(apply_boundary(j, CX).values, 0, atol=1e-15)


def test_constant_potential_has_no_drop():
    e = Cochain(QuantityKind.POTENTIAL, np.full(3, 4.2))
    np.testing.assert_allclose(apply_coboundary(e, CX).values, 0)


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        apply_coboundary(Cochain(QuantityKind.POTENTIAL, np.zeros(4)), CX)
    with pytest.raises(DimensionMismatch):
        apply_coboundary(Cochain(QuantityKind.CURRENT, np.zeros(4)), CX)
    with pytest.raises(DimensionMismatch):
        apply_boundary(Cochain(QuantityKind.VOLTAGE, np.zeros(4)), CX)


def test_kinds_carry_dimension_and_family():
    assert QuantityKind.FLUX_POTENTIAL.cell_dim == 0
    assert QuantityKind.MESH_CHARGE.family is Family.DUAL
    assert QuantityKind.VOLTAGE.is_primal
    assert display_name(QuantityKind.CURRENT, "mech_translation") == "force"
    assert display_name(QuantityKind.VOLTAGE, "hydraulic") == "pressure difference"


def test_time_series_cochain():
    series = np.arange(12.0).reshape(4, 3)
    out = apply_coboundary(Cochain(QuantityKind.POTENTIAL, series), CX)
    assert out.values.shape == (4, 4)


def test_derivative_of_constant_is_zero():
    grid = TimeGrid(0.0, 0.1, 5)
    d, g = time_derivative(np.full(5, 3.0), grid)
    np.testing.assert_array_equal(d, 0)
    assert g.family is Family.DUAL and g.n_steps == 4
    assert g.t0 == pytest.approx(0.05)


def test_derivative_of_sine_matches_cosine_at_midpoints():
    grid = TimeGrid.span(0.0, 1.0, 1e-3)
    d, g = time_derivative(np.sin(grid.times), grid)
    assert np.max(np.abs(d - np.cos(g.times))) <= 1e-6


def test_too_few_samples():
    with pytest.raises(TooFewSamples):
        time_derivative(np.zeros(1), TimeGrid(0.0, 1.0, 1))


def test_derivative_recovers_integrand():
    grid = TimeGrid.span(0.0, 2.0, 1e-3)
    s = np.exp(-grid.times) * np.cos(3 * grid.times)
    integ, g1 = time_integral(s, grid)
    back, g2 = time_derivative(integ, g1)
    np.testing.assert_allclose(back, s[1:], rtol=1e-9, atol=1e-12)
    np.testing.assert_allclose(g2.times, grid.times[1:])
    assert g2.family is Family.PRIMAL


@settings(max_examples=50, deadline=None)
@given(
    st.lists(st.floats(-1e3, 1e3), min_size=3, max_size=3),
    st.lists(st.floats(-1e3, 1e3), min_size=3, max_size=3),
    st.floats(-10, 10),
    st.floats(-10, 10),
)
def test_coboundary_linearity(x, y, a, b):
    x, y = np.array(x), np.array(y)

    def d(v):
        return apply_coboundary(Cochain(QuantityKind.POTENTIAL, v), CX).values

    lhs = d(a * x + b * y)
    rhs = a * d(x) + b * d(y)
    np.testing.assert_allclose(lhs, rhs, atol=1e-9 * (1 + np.abs(rhs).max()))


def test_grid_span():
    g = TimeGrid.span(0.0, 2.0, 1e-4)
    assert g.n_steps == 20001
    assert g.t_end == pytest.approx(2.0)
    with pytest.raises(ValueError):
        TimeGrid(0.0, 0.0, 3)
