"""2x2 matrices over Q and R, and the Moebius action on the upper half-plane.

Exact matrices keep their entries as Python ints whenever they are integral
and fall back to :class:`fractions.Fraction` otherwise, so the integer
matrices that dominate coset enumeration never pay for rational arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal, getcontext
from fractions import Fraction
from numbers import Rational

import numpy as np

DET_TOL = 1e-12


def _norm(v):
    if isinstance(v, bool):
        raise TypeError("boolean matrix entry")
    if isinstance(v, int):
        return v
    if isinstance(v, Rational):
        v = Fraction(v)
        return v.numerator if v.denominator == 1 else v
    if isinstance(v, float):
        if not math.isfinite(v):
            raise ValueError("non-finite matrix entry")
        return _norm(Fraction(v))
    if isinstance(v, str):
        return _norm(Fraction(v))
    raise TypeError(f"cannot use {type(v).__name__} as an exact entry")


@dataclass(frozen=True, init=False)
class ExactMatrix:
    """Invertible 2x2 matrix ``[[a, b], [c, d]]`` with exact rational entries."""

    a: int | Fraction
    b: int | Fraction
    c: int | Fraction
    d: int | Fraction

    def __init__(self, a, b, c, d):
        a, b, c, d = _norm(a), _norm(b), _norm(c), _norm(d)
        if a * d - b * c == 0:
            raise ValueError("singular matrix")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d", d)

    @classmethod
    def from_rows(cls, rows) -> ExactMatrix:
        (a, b), (c, d) = rows
        return cls(a, b, c, d)

    @classmethod
    def identity(cls) -> ExactMatrix:
        return cls(1, 0, 0, 1)

    @property
    def det(self):
        return _norm(self.a * self.d - self.b * self.c)

    @property
    def entries(self) -> tuple:
        return (self.a, self.b, self.c, self.d)

    def is_integral(self) -> bool:
        return all(isinstance(v, int) for v in self.entries)

    def in_sl2z(self) -> bool:
        return self.is_integral() and self.det == 1

    def __matmul__(self, other: ExactMatrix) -> ExactMatrix:
        return exact_mul(self, other)

    def inverse(self) -> ExactMatrix:
        return exact_inv(self)

    def to_float(self) -> np.ndarray:
        return np.array([[float(self.a), float(self.b)], [float(self.c), float(self.d)]])

    def rows(self) -> list[list]:
        return [[self.a, self.b], [self.c, self.d]]

    def __str__(self) -> str:
        return "[[{},{}],[{},{}]]".format(*self.entries)


def exact_mul(m1: ExactMatrix, m2: ExactMatrix) -> ExactMatrix:
    return ExactMatrix(
        m1.a * m2.a + m1.b * m2.c,
        m1.a * m2.b + m1.b * m2.d,
        m1.c * m2.a + m1.d * m2.c,
        m1.c * m2.b + m1.d * m2.d,
    )


def exact_inv(m: ExactMatrix) -> ExactMatrix:
    det = m.a * m.d - m.b * m.c
    if det == 0:
        raise ValueError("singular matrix")
    if det == 1:
        return ExactMatrix(m.d, -m.b, -m.c, m.a)
    det = Fraction(det)
    return ExactMatrix(m.d / det, -m.b / det, -m.c / det, m.a / det)


def exact_eq(m1: ExactMatrix, m2: ExactMatrix) -> bool:
    return m1.entries == m2.entries


S = ExactMatrix(0, -1, 1, 0)
T = ExactMatrix(1, 1, 0, 1)
T_INV = ExactMatrix(1, -1, 0, 1)


@dataclass(frozen=True, init=False)
class GroupElement:
    """Element of SL(2, R) in double precision.

    The constructor divides by the square root of the determinant, so any
    matrix with positive determinant is accepted and lands on SL(2, R).
    """

    a: float
    b: float
    c: float
    d: float

    def __init__(self, a, b, c, d):
        a, b, c, d = float(a), float(b), float(c), float(d)
        det = a * d - b * c
        if not det > 0:
            raise ValueError(f"determinant must be positive, got {det!r}")
        if det != 1.0:
            r = math.sqrt(det)
            a, b, c, d = a / r, b / r, c / r, d / r
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d", d)

    @classmethod
    def identity(cls) -> GroupElement:
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def from_exact(cls, m: ExactMatrix) -> GroupElement:
        return cls(*(float(v) for v in m.entries))

    @property
    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    def __matmul__(self, other: GroupElement) -> GroupElement:
        return GroupElement(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inverse(self) -> GroupElement:
        return GroupElement(self.d, -self.b, -self.c, self.a)

    def to_array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    def allclose(self, other: GroupElement, tol: float = 1e-12) -> bool:
        return all(abs(u - v) <= tol for u, v in zip(
            (self.a, self.b, self.c, self.d), (other.a, other.b, other.c, other.d)))


@dataclass(frozen=True)
class UHPoint:
    x: float
    y: float

    def __post_init__(self):
        if not self.y > 0:
            raise ValueError(f"point must lie in the upper half-plane, got y={self.y!r}")

    @classmethod
    def from_complex(cls, z: complex) -> UHPoint:
        return cls(float(z.real), float(z.imag))

    def __complex__(self) -> complex:
        return complex(self.x, self.y)


def make_a(t: float) -> GroupElement:
    """Geodesic flow element ``diag(sqrt t, 1/sqrt t)``; acts by ``z -> t z``."""
    if not t > 0:
        raise ValueError(f"a_t needs t > 0, got {t!r}")
    r = math.sqrt(t)
    return GroupElement(r, 0.0, 0.0, 1.0 / r)


def make_u(x: float) -> GroupElement:
    return GroupElement(1.0, x, 0.0, 1.0)


def make_delta(x) -> ExactMatrix | np.ndarray:
    """Scalar matrix ``x * identity``.

    Exact input gives an :class:`ExactMatrix`; a float gives a plain array,
    since a scalar matrix with ``x**2 != 1`` is not in SL(2, R).  Either way
    it acts trivially on the half-plane.
    """
    if x == 0:
        raise ValueError("delta_x needs x != 0")
    if isinstance(x, (int, Rational)):
        return ExactMatrix(x, 0, 0, x)
    return np.array([[float(x), 0.0], [0.0, float(x)]])


def _coeffs(g):
    if isinstance(g, GroupElement):
        return g.a, g.b, g.c, g.d
    if isinstance(g, ExactMatrix):
        return tuple(float(v) for v in g.entries)
    arr = np.asarray(g, dtype=float)
    return arr[0, 0], arr[0, 1], arr[1, 0], arr[1, 1]


def mobius(g, z: UHPoint) -> UHPoint:
    """``(a z + b) / (c z + d)``.  Matrices of positive determinant only."""
    a, b, c, d = _coeffs(g)
    if not a * d - b * c > 0:
        raise ValueError("Moebius action on H needs positive determinant")
    w = complex(z)
    return UHPoint.from_complex((a * w + b) / (c * w + d))


def mobius_array(g, z: np.ndarray) -> np.ndarray:
    """Vectorized Moebius action on a complex array."""
    a, b, c, d = _coeffs(g)
    return (a * z + b) / (c * z + d)


def conjugation_identity_check(y: float, x: float, tol: float = 1e-12) -> bool:
    """Whether ``a_y u_x a_y^-1`` equals ``u_{xy}`` entrywise within ``tol``."""
    ay = make_a(y)
    lhs = ay @ make_u(x) @ ay.inverse()
    rhs = make_u(x * y)
    scale = max(1.0, abs(x * y))
    return lhs.allclose(rhs, tol * scale)


@dataclass(frozen=True)
class Slope:
    """The slope ``y`` of the second horocycle.

    ``Slope.rational(p, q)`` stores a reduced fraction; ``Slope.irrational``
    stores a decimal value with a tag.  Rationality is never inferred from a
    float: the tag decides which limit theory applies.
    """

    p: int | None = None
    q: int | None = None
    value: Decimal | None = None

    @classmethod
    def rational(cls, p: int, q: int = 1) -> Slope:
        p, q = int(p), int(q)
        if p < 1 or q < 1:
            raise ValueError("rational slope needs positive p and q")
        if math.gcd(p, q) != 1:
            raise ValueError(f"p/q must be reduced, got {p}/{q}")
        return cls(p=p, q=q)

    @classmethod
    def irrational(cls, value) -> Slope:
        if isinstance(value, float):
            value = repr(value)
        v = Decimal(value)
        if not v > 0:
            raise ValueError("slope must be positive")
        return cls(value=v)

    @classmethod
    def sqrt(cls, n: int, digits: int = 30) -> Slope:
        getcontext().prec = max(getcontext().prec, digits)
        return cls.irrational(Decimal(n).sqrt())

    @property
    def is_rational(self) -> bool:
        return self.p is not None

    # a_y lies in the commensurator of SL(2, Z) exactly for rational y
    in_commensurator = is_rational

    def as_longdouble(self) -> np.longdouble:
        if self.is_rational:
            return np.longdouble(self.p) / np.longdouble(self.q)
        return np.longdouble(str(self.value))

    def __float__(self) -> float:
        return self.p / self.q if self.is_rational else float(self.value)

    def __str__(self) -> str:
        if self.is_rational:
            return f"rational {self.p}/{self.q}"
        return f"irrational {self.value}"

    @classmethod
    def parse(cls, text: str) -> Slope:
        kind, _, val = text.strip().partition(" ")
        val = val.strip()
        if kind == "rational":
            p, _, q = val.partition("/")
            return cls.rational(int(p), int(q or 1))
        if kind == "irrational":
            return cls.irrational(val)
        raise ValueError(f"bad slope {text!r}")
