import math

import numpy as np
import pytest

from horolab.observables import (cell_indicator, const, eisenstein, eisenstein_series,
                                 eisenstein_truncation_error, height_window,
                                 parse_observable, product_observable)

from test_modular import random_gamma

CATALOG = [
    "const", "height:1:inf:0", "height:2:inf:0", "height:2:3:0", "height:1.5:4:0.3",
    "height:1:2:0.5", "cell:0:0.5:2:inf", "cell:-0.5:0:1:1.5", "cell:-0.2:0.3:0.9:1.2",
    "cell:-0.5:0.5:0:inf",
]


def _moved_points(seed, n=300):
    rng = np.random.default_rng(seed)
    z = rng.uniform(-0.5, 0.5, n) + 1j * rng.uniform(0.9, 4, n)
    w = np.empty_like(z)
    for k in range(n):
        g = random_gamma(rng, 10).to_float()
        w[k] = (g[0, 0] * z[k] + g[0, 1]) / (g[1, 0] * z[k] + g[1, 1])
    return z, w


@pytest.mark.parametrize("spec", CATALOG)
def test_catalog_is_gamma_invariant(spec):
    f = parse_observable(spec)
    z, w = _moved_points(31)
    fz, fw = f(z), f(w)
    # sharp indicators may legitimately flip for points within rounding of an edge
    assert np.mean(np.abs(fz - fw) <= 1e-8) >= 0.99


def test_eisenstein_invariance_within_truncation():
    E = eisenstein(2, 200)
    z, w = _moved_points(32, 30)
    assert np.all(np.abs(E(z) - E(w)) <= 1e-8 + E.truncation_error)


@pytest.mark.parametrize("spec", CATALOG)
def test_reference_matches_quadrature(spec):
    f = parse_observable(spec)
    assert f.reference_integral == pytest.approx(f.quad().value, abs=1e-6)


@pytest.mark.parametrize("a,b,expected", [
    (2, math.inf, 3 / (2 * math.pi)),
    (1, math.inf, 3 / math.pi),
    (2, 3, 1 / (2 * math.pi)),
])
def test_height_window_closed_forms(a, b, expected):
    f = height_window(a, b)
    assert f.reference_integral == pytest.approx(expected, abs=1e-15)
    assert f.quad().value == pytest.approx(expected, abs=1e-6)


def test_height_window_errors():
    with pytest.raises(ValueError):
        height_window(0.9)
    with pytest.raises(ValueError):
        height_window(3, 2)
    with pytest.raises(ValueError):
        height_window(2, 3, -1)


def test_smoothed_window_is_continuous_and_close():
    f = height_window(2, 3, 0.25)
    y = np.linspace(1, 4, 20001)
    v = f.on_F(1j * y)
    assert np.max(np.abs(np.diff(v))) < 1e-3
    assert v[np.argmin(np.abs(y - 2.5))] == 1.0


@pytest.mark.parametrize("cell,expected", [
    ((-0.5, 0.5, 0, math.inf), 1.0),
    ((-0.5, 0.5, 2, math.inf), 3 / (2 * math.pi)),
    ((0, 0.5, 2, math.inf), 3 / (4 * math.pi)),
])
def test_cell_references(cell, expected):
    assert cell_indicator(*cell).reference_integral == pytest.approx(expected, abs=1e-6)


@pytest.mark.parametrize("cell", [(0.6, 0.9, 1, 2), (-0.5, 0.5, 0.1, 0.5), (0, 0.1, 2, 1)])
def test_cell_must_meet_F(cell):
    with pytest.raises(ValueError):
        cell_indicator(*cell)


def test_eisenstein_discrepancy_shrinks_with_cutoff():
    z = np.array([0.1 + 0.9j, -0.3 + 1.2j])
    w = (2 * z + 1) / (5 * z + 3)
    gaps = [np.max(np.abs(eisenstein_series(z, 2, c) - eisenstein_series(w, 2, c)))
            for c in (50, 100, 200)]
    assert gaps[0] > gaps[1] > gaps[2]


def test_eisenstein_constant_term_in_cusp():
    # high in the cusp E(z, 2) ~ y**2 + phi(2) / y with phi(2) = (pi/2) zeta(3)/zeta(4)
    Y = 40.0
    z = np.array([0.3 + 1j * Y])
    zeta3, zeta4 = 1.2020569031595942, math.pi**4 / 90
    second = (eisenstein_series(z, 2, 400)[0] - Y**2) * Y
    assert second == pytest.approx(math.pi / 2 * zeta3 / zeta4, rel=0.01)


def test_eisenstein_truncation_estimate_is_conservative():
    z = np.array([0.5 + 1j * math.sqrt(3) / 2, 0.1 + 1.1j, 2j])
    actual = np.abs(eisenstein_series(z, 2, 800) - eisenstein_series(z, 2, 100))
    assert np.all(actual <= eisenstein_truncation_error(z, 2, 100))


def test_eisenstein_errors():
    with pytest.raises(ValueError):
        eisenstein(1.2, 100)
    with pytest.raises(ValueError):
        eisenstein(2, 5)
    assert eisenstein(2, 10).quad().tail_violated


def test_product_references():
    one = const()
    h = height_window(2)
    assert product_observable(one, one).reference_integral == 1.0
    assert product_observable(h, one).reference_integral == pytest.approx(3 / (2 * math.pi))
    assert product_observable(h, h).reference_integral == pytest.approx((3 / (2 * math.pi))**2)
    assert product_observable(h, eisenstein(2, 50)).reference_integral is None
    with pytest.raises(ValueError):
        product_observable(product_observable(h, h), h)


def test_product_evaluates_factorwise():
    phi = parse_observable("prod(height:2:inf:0,cell:0:0.5:1:inf)")
    z1 = np.array([0.1 + 3j, 0.1 + 1.5j, 5.2 + 3j])
    z2 = np.array([0.2 + 1.1j, 0.2 + 1.1j, -0.2 + 1.1j])
    assert list(phi(z1, z2)) == [1.0, 0.0, 0.0]


@pytest.mark.parametrize("spec", CATALOG + [
    "eis:2:200", "prod(height:2:inf:0,height:2:inf:0)", "prod(cell:0:0.5:2:inf,const)"])
def test_spec_names_round_trip(spec):
    assert parse_observable(spec).name == spec


@pytest.mark.parametrize("bad", ["nope", "height:x", "cell:0:1", "prod(const)", "eis"])
def test_bad_specs(bad):
    with pytest.raises(ValueError):
        parse_observable(bad)
