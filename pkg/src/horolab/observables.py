"""SL(2,Z)-invariant test functions on X and product test functions on X x X.

Every observable reduces its argument into F before evaluating, so
invariance is structural.  Catalog entries round-trip through short string
specs such as ``height:2:inf:0``, ``cell:0:0.5:2:inf``, ``eis:2:200``,
``const`` and ``prod(A,B)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np

from .modular import MEASURE_CONST, quad_F, reduce_array


def _fmt(v: float) -> str:
    if math.isinf(v):
        return "inf"
    return repr(float(v)) if v != int(v) else str(int(v))


@dataclass(eq=False)
class Observable:
    """A named test function.

    ``on_F`` evaluates on points already reduced into F (one complex array
    per slot); calling the observable reduces first.  ``reference`` is either
    a number or a zero-argument callable computing it on demand.
    """

    name: str
    arity: int
    on_F: Callable
    reference: float | Callable | None = None
    reference_note: str = ""
    tail_exponent: float = 0.0
    x_breaks: tuple = ()
    y_breaks: tuple = ()
    truncation_error: float = 0.0
    factors: tuple = field(default=(), repr=False)

    def __call__(self, *zs):
        if len(zs) != self.arity:
            raise TypeError(f"{self.name} takes {self.arity} point arrays")
        return self.on_F(*(reduce_array(z) for z in zs))

    @cached_property
    def reference_integral(self) -> float | None:
        if callable(self.reference):
            return self.reference()
        return self.reference

    def quad(self):
        if self.arity != 1:
            raise ValueError("quadrature is for one-surface observables")
        return quad_F(self.on_F, self.x_breaks, self.y_breaks, self.tail_exponent)


def const(value: float = 1.0) -> Observable:
    v = float(value)
    name = "const" if v == 1.0 else f"const:{_fmt(v)}"
    return Observable(name, 1, lambda z: np.full(np.shape(z), v), v, "normalization")


def height_window(a: float, b: float = math.inf, smoothing: float = 0.0) -> Observable:
    """Indicator of ``a <= invariant height <= b``.

    With ``smoothing > 0`` the edges become linear ramps of that width placed
    outside ``[a, b]``, which makes the function continuous.
    """
    a, b, s = float(a), float(b), float(smoothing)
    if a < 1:
        raise ValueError("height window needs a >= 1 (closed form lives in the cusp)")
    if not b > a:
        raise ValueError("height window needs a < b")
    if s < 0:
        raise ValueError("smoothing must be non-negative")

    if s == 0:
        def on_F(z):
            y = np.imag(z)
            return ((y >= a) & (y <= b)).astype(float)
        ref = MEASURE_CONST * (1.0 / a - (0.0 if math.isinf(b) else 1.0 / b))
        note = "(3/pi)(1/a - 1/b)"
        ybreaks = (a,) if math.isinf(b) else (a, b)
    else:
        def on_F(z):
            y = np.imag(z)
            up = (y - (a - s)) / s
            down = ((b + s) - y) / s if not math.isinf(b) else np.inf
            return np.clip(np.minimum(up, down), 0.0, 1.0)
        lo = a - s
        ybreaks = (lo, a) if math.isinf(b) else (lo, a, b, b + s)
        if lo >= 1:
            ref = (math.log(a / lo) + lo / a - 1.0) / s + 1.0 / a
            if not math.isinf(b):
                ref += -1.0 / b + (s / b - math.log((b + s) / b)) / s
            ref *= MEASURE_CONST
            note = "closed form, trapezoid in the cusp"
        else:
            ref = None
            note = "quadrature"
    obs = Observable(f"height:{_fmt(a)}:{_fmt(b)}:{_fmt(s)}", 1, on_F, ref, note,
                     y_breaks=ybreaks)
    if ref is None:
        obs.reference = lambda: obs.quad().value
    return obs


def cell_indicator(x_lo: float, x_hi: float, y_lo: float, y_hi: float) -> Observable:
    """Indicator that the reduced point falls in a rectangle (intersected with F)."""
    x_lo, x_hi, y_lo, y_hi = map(float, (x_lo, x_hi, y_lo, y_hi))
    xl, xh = max(x_lo, -0.5), min(x_hi, 0.5)
    if not (xl < xh and y_lo < y_hi):
        raise ValueError("cell does not meet F")
    edge = max(abs(xl), abs(xh))
    if not y_hi > math.sqrt(1 - edge * edge):
        raise ValueError("cell does not meet F")

    def on_F(z):
        x, y = np.real(z), np.imag(z)
        return ((x >= x_lo) & (x <= x_hi) & (y >= y_lo) & (y <= y_hi)).astype(float)

    obs = Observable(f"cell:{_fmt(x_lo)}:{_fmt(x_hi)}:{_fmt(y_lo)}:{_fmt(y_hi)}", 1, on_F,
                     None, "quadrature",
                     x_breaks=(x_lo, x_hi),
                     y_breaks=tuple(v for v in (y_lo, y_hi) if math.isfinite(v)))
    obs.reference = lambda: obs.quad().value
    return obs


_PAIR_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def coprime_pairs(cutoff: int):
    """One representative of each ``±(c, d)`` with gcd 1 and ``max(|c|,|d|) <= cutoff``."""
    if cutoff not in _PAIR_CACHE:
        c, d = np.meshgrid(np.arange(0, cutoff + 1), np.arange(-cutoff, cutoff + 1),
                           indexing="ij")
        c, d = c.ravel(), d.ravel()
        keep = (np.gcd(c, d) == 1) & ((c > 0) | (d == 1))
        _PAIR_CACHE[cutoff] = (c[keep].astype(float), d[keep].astype(float))
    return _PAIR_CACHE[cutoff]


def eisenstein_series(z, s: float, cutoff: int) -> np.ndarray:
    """Truncated ``E(z, s) = (1/2) sum_{gcd(c,d)=1} y^s / |cz + d|^{2s}``.

    No reduction is applied, so invariance holds only up to truncation.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    c, d = coprime_pairs(cutoff)
    out = np.empty(z.shape, dtype=float)
    flat = z.ravel()
    res = out.reshape(-1)
    chunk = max(1, 4_000_000 // c.size)
    for i in range(0, flat.size, chunk):
        zc = flat[i:i + chunk]
        x, y = zc.real[:, None], zc.imag[:, None]
        q = (c * x + d) ** 2 + (c * y) ** 2
        res[i:i + chunk] = (y[:, 0] ** s) * np.sum(q ** (-s), axis=1)
    return out


def eisenstein_truncation_error(z, s: float, cutoff: int) -> np.ndarray:
    """Rough size of the omitted tail ``max(|c|,|d|) > cutoff``.

    Counts about ``(24/pi^2) k`` primitive half-pairs on the sup-norm shell
    ``k`` and bounds ``|cz + d| >= r k`` with ``r`` the minimum on the unit shell.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    t = np.linspace(-1, 1, 201)
    shell_c = np.concatenate([t, t, np.ones_like(t), -np.ones_like(t)])
    shell_d = np.concatenate([np.ones_like(t), -np.ones_like(t), t, t])
    x, y = z.real[..., None], z.imag[..., None]
    r2 = ((shell_c * x + shell_d) ** 2 + (shell_c * y) ** 2).min(axis=-1)
    return (24 / math.pi**2) * z.imag**s * r2 ** (-s) * cutoff ** (2 - 2 * s) / (2 * s - 2)


def eisenstein(s: float = 2.0, cutoff: int = 200) -> Observable:
    s = float(s)
    cutoff = int(cutoff)
    if s < 1.5:
        raise ValueError("need s >= 1.5 for the direct lattice sum")
    if cutoff < 10:
        raise ValueError("cutoff must be at least 10")
    # worst case over F is at the corner rho, largest at the cusp end handled by y^s
    err = float(eisenstein_truncation_error(np.array([0.5 + 1j * math.sqrt(3) / 2]), s,
                                            cutoff)[0])
    return Observable(f"eis:{_fmt(s)}:{cutoff}", 1,
                      lambda z: eisenstein_series(z, s, cutoff), None,
                      "not integrable (grows like y^s)", tail_exponent=s,
                      truncation_error=err)


def product_observable(f1: Observable, f2: Observable) -> Observable:
    """``phi(z1, z2) = f1(z1) f2(z2)`` with reference integral for the product measure."""
    if f1.arity != 1 or f2.arity != 1:
        raise ValueError("product needs two one-surface observables")

    def ref():
        r1, r2 = f1.reference_integral, f2.reference_integral
        return None if r1 is None or r2 is None else r1 * r2

    return Observable(f"prod({f1.name},{f2.name})", 2,
                      lambda z1, z2: f1.on_F(z1) * f2.on_F(z2), ref,
                      "product of the factor integrals", factors=(f1, f2))


def _num(tok: str) -> float:
    return math.inf if tok in ("inf", "+inf") else float(tok)


def parse_observable(spec: str) -> Observable:
    spec = spec.strip()
    if spec.startswith("prod(") and spec.endswith(")"):
        body = spec[5:-1]
        depth = 0
        for i, ch in enumerate(body):
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
            elif ch == "," and depth == 0:
                return product_observable(parse_observable(body[:i]),
                                          parse_observable(body[i + 1:]))
        raise ValueError(f"prod needs two arguments: {spec!r}")
    head, *args = spec.split(":")
    try:
        if head == "const":
            return const(*map(float, args))
        if head == "height":
            return height_window(*map(_num, args))
        if head == "cell":
            if len(args) != 4:
                raise ValueError("cell needs four numbers")
            return cell_indicator(*map(_num, args))
        if head == "eis":
            return eisenstein(float(args[0]), int(args[1]) if len(args) > 1 else 200)
    except (TypeError, IndexError) as exc:
        raise ValueError(f"bad observable spec {spec!r}: {exc}") from None
    raise ValueError(f"unknown observable {spec!r}")
