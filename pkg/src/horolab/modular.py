"""The modular surface SL(2,Z)\\H: reduction, invariant measure, sampling, quadrature.

The normalized measure on the standard fundamental domain
``F = {|Re z| <= 1/2, |z| >= 1}`` is ``(3/pi) dx dy / y**2`` (total mass 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .sl2 import ExactMatrix, UHPoint

MAX_ITER = 10**5
# inversion threshold; points this close inside the unit circle count as on it
_INSIDE_EPS = 1e-14
# boundary tie tolerance for the tie-breaking rule
_TIE = 1e-12
BOUNDARY_TOL = 1e-9
MEASURE_CONST = 3.0 / math.pi


class ReductionError(RuntimeError):
    pass


@dataclass(frozen=True)
class ReducedPoint:
    z: UHPoint
    witness: ExactMatrix


def in_F(z, tol: float = BOUNDARY_TOL):
    z = np.asarray(z)
    return (np.abs(z.real) <= 0.5 + tol) & (np.abs(z) >= 1.0 - tol)


def reduce(z: UHPoint | complex) -> ReducedPoint:
    """Gauss reduction of a single point with an exact witness in SL(2, Z).

    Translate by the nearest integer, invert if inside the unit circle, and
    repeat.  Ties: ``Re z = 1/2`` is sent to ``-1/2`` and unit-circle points
    with ``Re z > 0`` to their mirror image.  Witness entries are Python ints,
    so there is no overflow however deep the input sits.
    """
    if not isinstance(z, UHPoint):
        z = UHPoint.from_complex(complex(z))
    x, y = z.x, z.y
    a, b, c, d = 1, 0, 0, 1
    for _ in range(MAX_ITER):
        n = round(x)
        if n:
            x -= n
            a, b = a - n * c, b - n * d
        r2 = x * x + y * y
        if r2 < 1.0 - _INSIDE_EPS:
            x, y = -x / r2, y / r2
            a, b, c, d = -c, -d, a, b
            continue
        break
    else:
        raise ReductionError(
            f"reduction of {z} did not terminate after {MAX_ITER} steps (y too close to 0?)")
    if abs(x * x + y * y - 1.0) <= _TIE and x > 0:
        r2 = x * x + y * y
        x, y = -x / r2, y / r2
        a, b, c, d = -c, -d, a, b
    if x >= 0.5 - _TIE:
        x -= 1.0
        a, b = a - c, b - d
    return ReducedPoint(UHPoint(x, y), ExactMatrix(a, b, c, d))


def reduce_array(z, return_witness: bool = False, max_iter: int = MAX_ITER):
    """Vectorized reduction into F.

    Same moves and tie rule as :func:`reduce`.  With ``return_witness`` the
    int64 entries ``(a, b, c, d)`` of the reducing matrices are returned too;
    a :class:`ReductionError` is raised if they would overflow.
    """
    z = np.asarray(z, dtype=complex)
    shape = z.shape
    x = z.real.ravel().copy()
    y = z.imag.ravel().copy()
    if np.any(~(y > 0)):
        raise ValueError("all points must lie in the upper half-plane")
    if return_witness:
        A = np.ones(x.size, dtype=np.int64)
        B = np.zeros(x.size, dtype=np.int64)
        C = np.zeros(x.size, dtype=np.int64)
        D = np.ones(x.size, dtype=np.int64)
    idx = np.arange(x.size)
    for _ in range(max_iter):
        if idx.size == 0:
            break
        xa = x[idx]
        ya = y[idx]
        n = np.round(xa)
        xa -= n
        r2 = xa * xa + ya * ya
        inv = r2 < 1.0 - _INSIDE_EPS
        xa[inv] = -xa[inv] / r2[inv]
        ya[inv] = ya[inv] / r2[inv]
        x[idx] = xa
        y[idx] = ya
        if return_witness:
            if np.any(np.abs(n) > 2.0**52):
                raise ReductionError("witness translation exceeds int64 range")
            ni = n.astype(np.int64)
            Ca, Da = C[idx], D[idx]
            Aa = A[idx] - ni * Ca
            Ba = B[idx] - ni * Da
            if max(np.abs(Aa).max(initial=0), np.abs(Ba).max(initial=0)) > 2**62:
                raise ReductionError("witness entries overflow int64")
            A[idx] = np.where(inv, -Ca, Aa)
            B[idx] = np.where(inv, -Da, Ba)
            C[idx] = np.where(inv, Aa, Ca)
            D[idx] = np.where(inv, Ba, Da)
        idx = idx[inv]
    else:
        if idx.size:
            raise ReductionError(
                f"{idx.size} points did not reduce within {max_iter} steps (y too close to 0?)")

    r2 = x * x + y * y
    tie = (np.abs(r2 - 1.0) <= _TIE) & (x > 0)
    if np.any(tie):
        x[tie] = -x[tie] / r2[tie]
        y[tie] = y[tie] / r2[tie]
        if return_witness:
            A[tie], B[tie], C[tie], D[tie] = -C[tie], -D[tie], A[tie], B[tie]
    half = x >= 0.5 - _TIE
    if np.any(half):
        x[half] -= 1.0
        if return_witness:
            A[half] -= C[half]
            B[half] -= D[half]
    out = (x + 1j * y).reshape(shape)
    if return_witness:
        return out, tuple(v.reshape(shape) for v in (A, B, C, D))
    return out


def invariant_height(z) -> float:
    """Largest imaginary part over the SL(2,Z)-orbit of ``z``."""
    return reduce(z).z.y


def height_array(z) -> np.ndarray:
    return reduce_array(z).imag


def sample_F(rng: np.random.Generator, size=None):
    """Exact inverse-CDF draws from the normalized measure on F.

    The x-marginal has density ``(3/pi) / sqrt(1 - x**2)``, i.e. ``x = sin(theta)``
    with ``theta`` uniform on ``[-pi/6, pi/6]``; given x, ``y = sqrt(1 - x**2) / u``
    with ``u`` uniform on ``(0, 1]``.  Returns a complex scalar or array.
    """
    theta = rng.uniform(-math.pi / 6, math.pi / 6, size)
    u = 1.0 - rng.random(size)
    x = np.sin(theta)
    y = np.sqrt(1.0 - x * x) / u
    return x + 1j * y


@dataclass(frozen=True)
class QuadResult:
    value: float
    error: float
    tail_violated: bool = False

    def __float__(self):
        return self.value


def _gl_panels(lo, hi, panels, nodes, weights):
    edges = np.linspace(lo, hi, panels + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    pts = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    wts = (half[:, None] * weights[None, :]).ravel()
    return pts, wts


def _quad_nodes(x_breaks, y_breaks, panels, order=12):
    nodes, weights = np.polynomial.legendre.leggauss(order)
    xb = {-0.5, 0.5}
    for b in x_breaks:
        if -0.5 < b < 0.5:
            xb.add(float(b))
    for b in y_breaks:
        if math.sqrt(3) / 2 < b < 1:
            s = math.sqrt(1 - b * b)
            xb.update((-s, s))
    xb = sorted(xb)
    yb = sorted(float(b) for b in y_breaks if math.isfinite(b) and b > 0)
    tb = sorted({0.0, 0.5} | {1.0 / b for b in yb if b > 2})

    tails_t, tails_w = [], []
    for lo, hi in zip(tb[:-1], tb[1:]):
        p, w = _gl_panels(lo, hi, panels, nodes, weights)
        tails_t.append(p)
        tails_w.append(w)
    tail_t = np.concatenate(tails_t)
    tail_w = np.concatenate(tails_w)

    gy = 0.5 * (nodes + 1.0)
    gw = 0.5 * weights
    zs, ws = [], []
    for lo, hi in zip(xb[:-1], xb[1:]):
        px, wx = _gl_panels(lo, hi, panels, nodes, weights)
        y0 = np.sqrt(1 - px * px)
        cuts = [y0] + [np.maximum(y0, b) for b in yb if b < 2] + [np.full_like(px, 2.0)]
        for ylo, yhi in zip(cuts[:-1], cuts[1:]):
            # panels of equal width on [ylo, yhi] for every x column at once
            edges = ylo[:, None] + (yhi - ylo)[:, None] * np.linspace(0, 1, panels + 1)[None, :]
            h = edges[:, 1:] - edges[:, :-1]
            py = (edges[:, :-1, None] + h[:, :, None] * gy).reshape(px.size, -1)
            wy = (h[:, :, None] * gw).reshape(px.size, -1)
            zs.append((px[:, None] + 1j * py).ravel())
            ws.append((wx[:, None] * wy / (py * py)).ravel())
        # cusp part y >= 2 via t = 1/y: dy / y**2 = dt
        zs.append((px[:, None] + 1j / tail_t[None, :]).ravel())
        ws.append((wx[:, None] * tail_w[None, :]).ravel())
    return np.concatenate(zs), np.concatenate(ws)


def quad_F(f, x_breaks=(), y_breaks=(), tail_exponent: float = 0.0,
           target: float = 1e-7, max_panels: int = 64) -> QuadResult:
    """Integrate ``f`` over F against the normalized measure.

    ``f`` takes a complex array of points of F and returns real values.  It
    must be smooth between the lines ``Re z = x_breaks`` and ``Im z = y_breaks``
    and grow at most like ``y**tail_exponent`` in the cusp.  Composite
    Gauss-Legendre panels are doubled until two successive estimates agree to
    ``target``; the cusp ``y >= 2`` is mapped to the finite interval ``t = 1/y``.
    A declared ``tail_exponent >= 1`` (non-integrable cusp) sets ``tail_violated``.
    """
    panels = 2
    z, w = _quad_nodes(x_breaks, y_breaks, panels)
    prev = MEASURE_CONST * float(np.dot(w, f(z)))
    if tail_exponent >= 1.0:
        # refinement cannot converge on a divergent cusp integral
        return QuadResult(prev, math.inf, True)
    err = math.inf
    while panels < max_panels:
        panels *= 2
        z, w = _quad_nodes(x_breaks, y_breaks, panels)
        val = MEASURE_CONST * float(np.dot(w, f(z)))
        err = abs(val - prev)
        prev = val
        if err < target:
            break
    return QuadResult(prev, err)
