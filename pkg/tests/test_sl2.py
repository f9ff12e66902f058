import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from horolab.sl2 import (ExactMatrix, GroupElement, Slope, UHPoint, S,
                         conjugation_identity_check, exact_eq, exact_inv, exact_mul,
                         make_a, make_delta, make_u, mobius)

I2 = ExactMatrix.identity()


def test_make_a_u_basic():
    assert make_a(1).allclose(GroupElement.identity(), 0)
    assert make_u(0).allclose(GroupElement.identity(), 0)
    a4 = make_a(4)
    assert (a4.a, a4.b, a4.c, a4.d) == (2.0, 0.0, 0.0, 0.5)
    assert make_u(3.5).b == 3.5


@pytest.mark.parametrize("t", [0, -1, -0.5])
def test_make_a_rejects_nonpositive(t):
    with pytest.raises(ValueError):
        make_a(t)


def test_make_delta():
    d = make_delta(3)
    assert exact_eq(d, ExactMatrix(3, 0, 0, 3))
    z = UHPoint(0.2, 1.7)
    assert abs(complex(mobius(make_delta(2.5), z)) - complex(z)) < 1e-15
    with pytest.raises(ValueError):
        make_delta(0)


def test_mobius_examples():
    z = UHPoint(0.3, 2.2)
    assert complex(mobius(GroupElement.identity(), z)) == complex(z)
    w = mobius(S, UHPoint(0, 1))
    assert abs(complex(w) - 1j) < 1e-15
    T, x = 37.0, 0.41
    w = mobius(make_a(1 / T) @ make_u(x), UHPoint(0, 1))
    assert abs(complex(w) - (x + 1j) / T) < 1e-15


def test_uhpoint_rejects_lower_half_plane():
    with pytest.raises(ValueError):
        UHPoint(0.0, 0.0)


@pytest.mark.parametrize("y,x,xy", [(2, 3, 6), (1, 0.77, 0.77), (1 / 3, -5, -5 / 3)])
def test_conjugation_identity(y, x, xy):
    assert conjugation_identity_check(y, x)
    ay = make_a(y)
    prod = ay @ make_u(x) @ ay.inverse()
    assert prod.allclose(make_u(xy), 1e-12)


def test_conjugation_identity_random():
    rng = np.random.default_rng(3)
    ys = np.exp(rng.uniform(-5, 5, 10_000))
    xs = rng.uniform(-50, 50, 10_000)
    assert all(conjugation_identity_check(y, x) for y, x in zip(ys, xs))


def test_exact_examples():
    assert exact_eq(exact_inv(I2), I2)
    assert exact_eq(exact_mul(ExactMatrix(1, 1, 0, 1), ExactMatrix(1, -1, 0, 1)), I2)
    inv = exact_inv(ExactMatrix(2, 0, 0, 3))
    assert inv.entries == (Fraction(1, 2), 0, 0, Fraction(1, 3))
    assert isinstance(inv.b, int)


def test_exact_rejects_singular():
    with pytest.raises(ValueError):
        ExactMatrix(1, 2, 2, 4)


entry = st.integers(-10**6, 10**6).map(Fraction) | st.fractions(max_denominator=10**6)


@given(entry, entry, entry, entry)
def test_exact_inverse_is_exact(a, b, c, d):
    if a * d - b * c == 0:
        return
    m = ExactMatrix(a, b, c, d)
    assert exact_eq(exact_inv(m) @ m, I2)
    assert exact_eq(m @ exact_inv(m), I2)


def test_exact_big_integers_no_overflow():
    big = 10**40
    m = ExactMatrix(big + 1, big, 1, 1)
    assert m.det == 1
    assert exact_eq(m @ m.inverse(), I2)


def _random_sl2r(rng):
    a, b, c = rng.normal(size=3)
    while abs(a) < 1e-3:
        a = rng.normal()
    return GroupElement(a, b, c, (1 + b * c) / a)


@given(st.floats(-3, 3), st.floats(0.05, 5), st.integers(0, 2**32 - 1))
@settings(max_examples=300)
def test_mobius_is_an_action(x, y, seed):
    rng = np.random.default_rng(seed)
    g, h = _random_sl2r(rng), _random_sl2r(rng)
    z = UHPoint(x, y)
    lhs = complex(mobius(g @ h, z))
    rhs = complex(mobius(g, mobius(h, z)))
    assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs))


def test_determinant_stays_one_over_long_products():
    rng = np.random.default_rng(7)
    pool = [make_a(t) for t in np.exp(rng.uniform(-0.2, 0.2, 50))]
    pool += [make_u(x) for x in rng.uniform(-1, 1, 50)]
    pool += [GroupElement.from_exact(S)]
    idx = rng.integers(0, len(pool), 10**6)
    g = GroupElement.identity()
    worst = 0.0
    for k in idx:
        g = g @ pool[k]
        worst = max(worst, abs(g.det - 1))
        # evaluating ad - bc itself loses ~eps * |g|**2, so keep |g| moderate
        if abs(g.a) + abs(g.b) + abs(g.c) + abs(g.d) > 50:
            g = GroupElement.identity()
    assert worst <= 1e-12


def test_slope_rational_and_irrational():
    s = Slope.rational(2, 3)
    assert s.is_rational and s.in_commensurator
    assert str(s) == "rational 2/3"
    with pytest.raises(ValueError):
        Slope.rational(2, 4)
    with pytest.raises(ValueError):
        Slope.rational(0, 1)
    r = Slope.irrational("1.41421356237309504880")
    assert not r.is_rational
    assert str(r) == "irrational 1.41421356237309504880"
    assert Slope.parse(str(r)) == r
    assert Slope.parse("rational 5/7") == Slope.rational(5, 7)
    with pytest.raises(ValueError):
        Slope.irrational("-1")
    assert abs(float(Slope.sqrt(2)) - math.sqrt(2)) < 1e-16
