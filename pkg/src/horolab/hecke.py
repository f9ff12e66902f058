"""Hecke double cosets for SL(2, Z), computed in exact integer arithmetic.

For coprime ``p, q`` the slope element ``a_{p/q}`` is, up to the scalar
``sqrt(pq)``, the integer matrix ``diag(p, q)``.  Conjugating
``[[a, b], [c, d]]`` by it gives ``[[a, b p/q], [c q/p, d]]``, so

    Gamma_{p/q} = Gamma  ∩  a_{p/q}^-1 Gamma a_{p/q}  =  {q | b, p | c},

a congruence subgroup of index ``psi(pq)``.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .sl2 import ExactMatrix, UHPoint


class EnumerationError(RuntimeError):
    pass


def factorize(n: int) -> dict[int, int]:
    if n < 1:
        raise ValueError("n must be positive")
    out: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def psi(n: int) -> int:
    """Dedekind psi: ``n * prod_{l | n} (1 + 1/l)``."""
    out = n
    for ell in factorize(n):
        out = out // ell * (ell + 1)
    return out


def sigma(n: int, k: int = 1):
    return sum(d**k for d in range(1, n + 1) if n % d == 0)


def is_squarefree(n: int) -> bool:
    return all(e == 1 for e in factorize(n).values())


def _check_pq(p: int, q: int):
    if p < 1 or q < 1 or math.gcd(p, q) != 1:
        raise ValueError(f"need coprime positive p, q; got ({p}, {q})")


def _check_unimodular(g: ExactMatrix):
    if not g.in_sl2z():
        raise ValueError(f"{g} is not in SL(2, Z)")


def conjugate_by_slope(g: ExactMatrix, p: int, q: int) -> ExactMatrix:
    """``a_{p/q} g a_{p/q}^-1``, computed exactly as ``diag(p,q) g diag(p,q)^-1``."""
    alpha = ExactMatrix(p, 0, 0, q)
    return alpha @ g @ alpha.inverse()


def gamma_y_member_exact(g: ExactMatrix, p: int, q: int) -> bool:
    _check_unimodular(g)
    return conjugate_by_slope(g, p, q).is_integral()


def gamma_y_member(g: ExactMatrix, p: int, q: int) -> bool:
    """Membership in ``Gamma_{p/q}`` via the congruences ``q | b`` and ``p | c``."""
    _check_unimodular(g)
    _check_pq(p, q)
    return g.b % q == 0 and g.c % p == 0


def left_gamma_equivalent(A: ExactMatrix, B: ExactMatrix) -> bool:
    """Whether ``A = gamma B`` for some ``gamma`` in SL(2, Z)."""
    if A.det != B.det:
        return False
    return (A @ B.inverse()).in_sl2z()


def hermite_form(A: ExactMatrix) -> ExactMatrix:
    """The upper triangular ``[[a, b], [0, d]]``, ``0 <= b < d``, in ``SL(2,Z) A``."""
    if not A.is_integral() or A.det <= 0:
        raise ValueError("need an integer matrix of positive determinant")
    a, b, c, d = A.entries
    g, x, y = _xgcd(a, c)
    # [[x, y], [-c/g, a/g]] has det 1 and kills the lower-left entry
    top = (g, x * b + y * d)
    low = (-c // g) * b + (a // g) * d
    n = top[1] % low
    return ExactMatrix(top[0], n, 0, low)


def _xgcd(a: int, b: int):
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        k, r = divmod(a, b)
        a, b = b, r
        x0, x1 = x1, x0 - k * x1
        y0, y1 = y1, y0 - k * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


@dataclass(frozen=True)
class HeckeSet:
    """Left coset representatives of the double coset ``T(l, m)``."""

    l: int
    m: int
    reps: tuple[ExactMatrix, ...]

    def __len__(self):
        return len(self.reps)


@lru_cache(maxsize=None)
def coset_reps_T(l: int, m: int) -> HeckeSet:
    """All ``[[a, b], [0, d]]`` with ``ad = lm``, ``0 <= b < d``, ``gcd(a, b, d) = l``."""
    if l < 1 or m < 1 or m % l:
        raise ValueError(f"T(l, m) needs l | m; got ({l}, {m})")
    n = l * m
    reps = []
    for a in range(1, n + 1):
        if n % a:
            continue
        d = n // a
        for b in range(d):
            if math.gcd(math.gcd(a, b), d) == l:
                reps.append(ExactMatrix(a, b, 0, d))
    return HeckeSet(l, m, tuple(reps))


def coset_reps_Tn(n: int) -> list[HeckeSet]:
    """The pieces ``T(l, n/l)`` with ``l**2 | n`` making up ``T(n)``."""
    if n < 1:
        raise ValueError("n must be positive")
    return [coset_reps_T(l, n // l) for l in range(1, math.isqrt(n) + 1)
            if n % (l * l) == 0]


def all_reps_Tn(n: int) -> list[ExactMatrix]:
    return [r for piece in coset_reps_Tn(n) for r in piece.reps]


@dataclass(frozen=True)
class CosetSystem:
    """Right coset representatives ``h_m`` of ``Gamma_{p/q}`` in ``Gamma``."""

    p: int
    q: int
    reps: tuple[ExactMatrix, ...]

    @property
    def M(self) -> int:
        return len(self.reps)

    @property
    def psi(self) -> int:
        return psi(self.p * self.q)

    @property
    def paper_index(self) -> int:
        """``(p+1)(q+1)``, which equals the true index when p and q are prime."""
        return (self.p + 1) * (self.q + 1)

    @property
    def index_agrees(self) -> bool:
        return self.M == self.paper_index

    def float_matrices(self) -> np.ndarray:
        """Shape ``(M, 2, 2)`` array of ``a_{p/q} h_m`` in double precision."""
        r = math.sqrt(self.p / self.q)
        a = np.diag([r, 1.0 / r])
        return np.array([a @ h.to_float() for h in self.reps])


@lru_cache(maxsize=None)
def _units(n: int) -> tuple[int, ...]:
    return tuple(u for u in range(1, n + 1) if math.gcd(u, n) == 1)


def _p1_key(u: int, v: int, n: int) -> tuple[int, int]:
    if n == 1:
        return (0, 0)
    return min(((k * u) % n, (k * v) % n) for k in _units(n))


def _coset_key(h, p, q):
    a, b, c, d = h
    return _p1_key(a, b, q), _p1_key(c, d, p)


_GENS = ((0, -1, 1, 0), (1, 1, 0, 1), (1, -1, 0, 1))


def _mul(x, y):
    a, b, c, d = x
    e, f, g, h = y
    return (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)


def _member(x, p, q):
    return x[1] % q == 0 and x[2] % p == 0


@lru_cache(maxsize=None)
def enumerate_gamma_cosets(p: int, q: int) -> CosetSystem:
    """Breadth-first search for ``Gamma = ⊔ Gamma_{p/q} h_m``.

    Right multiplication by S, T, T^-1 walks the coset graph.  The projective
    rows ``(a:b) mod q`` and ``(c:d) mod p`` bucket candidates; every merge is
    then confirmed by the exact test ``h h_j^-1 in Gamma_{p/q}``.
    """
    _check_pq(p, q)
    limit = 10 * psi(p * q)
    start = (1, 0, 0, 1)
    reps = [start]
    buckets = {_coset_key(start, p, q): [0]}
    queue = deque([start])
    while queue:
        h = queue.popleft()
        for g in _GENS:
            h2 = _mul(h, g)
            key = _coset_key(h2, p, q)
            bucket = buckets.setdefault(key, [])
            for j in bucket:
                a, b, c, d = reps[j]
                if _member(_mul(h2, (d, -b, -c, a)), p, q):
                    break
            else:
                bucket.append(len(reps))
                reps.append(h2)
                queue.append(h2)
                if len(reps) > limit:
                    raise EnumerationError(
                        f"coset search for ({p}, {q}) exceeded {limit} states; "
                        "membership test is inconsistent")
    return CosetSystem(p, q, tuple(ExactMatrix(*h) for h in reps))


@dataclass(frozen=True)
class DoubleCosetReport:
    p: int
    q: int
    applicable: bool
    holds: bool | None
    n_cosets: int
    n_reps: int

    def __bool__(self):
        return bool(self.holds)


def double_coset_check(p: int, q: int) -> DoubleCosetReport:
    """Check ``Gamma a_{p/q} Gamma = delta_{sqrt(pq)}^-1 T(pq)`` as sets of left cosets.

    The matrices ``diag(p, q) h_m`` must match the representatives of ``T(pq)``
    one-to-one under left SL(2,Z)-equivalence.  When ``pq`` is not squarefree
    ``T(pq)`` has more than one piece and the report is marked not applicable;
    the bijection with the single piece ``T(1, pq)`` is still checked.
    """
    _check_pq(p, q)
    n = p * q
    applicable = is_squarefree(n)
    system = enumerate_gamma_cosets(p, q)
    target = list(coset_reps_T(1, n).reps) if not applicable else all_reps_Tn(n)
    index = {r.entries: i for i, r in enumerate(target)}
    alpha = ExactMatrix(p, 0, 0, q)
    hit = [0] * len(target)
    ok = True
    for h in system.reps:
        A = alpha @ h
        H = hermite_form(A)
        i = index.get(H.entries)
        if i is None or not left_gamma_equivalent(A, target[i]):
            ok = False
            continue
        hit[i] += 1
    ok = ok and all(c == 1 for c in hit)
    return DoubleCosetReport(p, q, applicable, ok if applicable else None,
                             system.M, len(target))


def _as_complex(z):
    if isinstance(z, UHPoint):
        return complex(z)
    return complex(z)


def apply_double_coset(f, p: int, q: int, z) -> float:
    """``sum_m f(a_{p/q} h_m z)`` for ``f`` acting on complex arrays."""
    mats = enumerate_gamma_cosets(p, q).float_matrices()
    w = _as_complex(z)
    pts = (mats[:, 0, 0] * w + mats[:, 0, 1]) / (mats[:, 1, 0] * w + mats[:, 1, 1])
    return float(np.sum(f(pts)))


def hecke_apply(f, n: int, z) -> float:
    """``T_n f(z) = n^{-1/2} sum f((a z + b) / d)`` over the representatives of ``T(n)``."""
    w = _as_complex(z)
    reps = all_reps_Tn(n)
    pts = np.array([(int(r.a) * w + int(r.b)) / int(r.d) for r in reps])
    return float(np.sum(f(pts))) / math.sqrt(n)


def eisenstein_eigenvalue(s: float, n: int) -> float:
    """``n^{1/2 - s} sigma_{2s-1}(n)``: eigenvalue of ``T_n`` on ``E(., s)``."""
    return n ** (0.5 - s) * sum(d ** (2 * s - 1) for d in range(1, n + 1) if n % d == 0)
