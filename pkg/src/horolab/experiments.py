"""Measurement engine: horocycle averages, rational-slope limits, Hecke checks.

Points on the pair of expanding horocycles are ``z1 = x + i/T`` and
``z2 = x y + i/T``, i.e. ``g i`` and ``a_y g a_y^-1 i`` for ``g = u_x a_{1/T}``.

For rational ``y = p/q`` the pair ``(g, a g a^-1)`` lives on a closed orbit and
its limit is the average over ``Gamma_{p/q}\\G``.  Unfolding over the cosets
``h_m`` and substituting ``g -> g a`` turns that into

    (1/M) sum_m  E[ phi(g_w k a i, a h_m w) ],

with ``w`` drawn from the invariant measure on F, ``g_w = u_{Re w} a_{Im w}``
and ``k`` a uniformly random rotation about ``i``.  The first slot is the
point at distance ``|log(p/q)|`` from ``w`` in a random direction.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .hecke import (enumerate_gamma_cosets, is_squarefree, apply_double_coset,
                    sigma, psi)
from .modular import reduce_array, sample_F
from .observables import Observable, parse_observable
from .sl2 import Slope

SAMPLING_MODES = ("grid", "uniform-random", "low-discrepancy")
CHUNK = 1 << 16
MC_CHUNK = 1 << 17
Z_THRESHOLD = 3.0


@dataclass(frozen=True)
class ExperimentConfig:
    slope: Slope
    interval: tuple[float, float] = (0.0, 1.0)
    T_schedule: tuple[float, ...] = (100.0, 1000.0, 10000.0)
    sample_count: int = 100_000
    sampling: str = "grid"
    observable: str = "prod(height:2:inf:0,height:2:inf:0)"
    seed: int = 0
    limit_samples: int = 1_000_000

    def __post_init__(self):
        lo, hi = self.interval
        if not lo < hi:
            raise ValueError("interval needs x_lo < x_hi")
        ts = self.T_schedule
        if not ts or any(t <= 1 for t in ts):
            raise ValueError("every T must exceed 1")
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("T schedule must be strictly increasing")
        if self.sample_count < 100:
            raise ValueError("need at least 100 samples per T")
        if self.sampling not in SAMPLING_MODES:
            raise ValueError(f"sampling must be one of {SAMPLING_MODES}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.limit_samples < 100:
            raise ValueError("need at least 100 limit samples")
        obs = parse_observable(self.observable)
        if obs.arity != 2:
            raise ValueError("horocycle runs need a two-surface observable")

    def parsed_observable(self) -> Observable:
        return parse_observable(self.observable)


@dataclass(frozen=True)
class TRecord:
    T: float
    estimate: float
    stderr: float
    N: int
    interval_length: float

    @property
    def integral(self) -> float:
        """Unnormalized line integral over I."""
        return self.interval_length * self.estimate


@dataclass
class RunResult:
    config: ExperimentConfig
    records: list[TRecord]
    product_limit: float | None = None
    rational_limit: tuple[float, float] | None = None
    eigenform_limit: float | None = None
    counters: dict = field(default_factory=dict)

    def z_product(self, rec: TRecord) -> float | None:
        if self.product_limit is None:
            return None
        return (rec.estimate - self.product_limit) / rec.stderr

    def z_rational(self, rec: TRecord) -> float | None:
        if self.rational_limit is None:
            return None
        value, se = self.rational_limit
        return (rec.estimate - value) / math.hypot(rec.stderr, se)


def _stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def _stderr(values_std: float, n: int, mean: float) -> float:
    return max(values_std / math.sqrt(n), np.finfo(float).eps * max(1.0, abs(mean)))


def sample_interval(cfg: ExperimentConfig, unit: int) -> np.ndarray:
    """x-values in I for schedule entry ``unit``.

    ``grid`` is an equispaced rule whose common offset inside each cell comes
    from the seed (0.5 would be the plain midpoint rule).
    """
    lo, hi = cfg.interval
    n = cfg.sample_count
    rng = _stream(cfg.seed, unit)
    if cfg.sampling == "grid":
        shift = rng.random()
        return lo + (hi - lo) * (np.arange(n) + shift) / n
    if cfg.sampling == "uniform-random":
        return rng.uniform(lo, hi, n)
    from scipy.stats import qmc
    u = qmc.Halton(d=1, scramble=True, seed=rng).random(n)[:, 0]
    return lo + (hi - lo) * u


def horocycle_points(x: np.ndarray, T: float, slope: Slope):
    """``(x + i/T, x y + i/T)``; the product ``x y`` is formed in extended precision
    and reduced mod 1 before rounding to double."""
    x = np.asarray(x, dtype=float)
    if slope.is_rational:
        xy = np.asarray(x, dtype=np.longdouble) * slope.p / slope.q
    else:
        xy = np.asarray(x, dtype=np.longdouble) * slope.as_longdouble()
    xy = (xy - np.round(xy)).astype(float)
    h = 1.0 / T
    return x + 1j * h, xy + 1j * h


def _horocycle_unit(cfg: ExperimentConfig, phi: Observable, unit: int) -> TRecord:
    T = cfg.T_schedule[unit]
    x = sample_interval(cfg, unit)
    s1 = s2 = 0.0
    for i in range(0, x.size, CHUNK):
        z1, z2 = horocycle_points(x[i:i + CHUNK], T, cfg.slope)
        v = phi(z1, z2)
        s1 += float(np.sum(v))
        s2 += float(np.sum(v * v))
    n = x.size
    mean = s1 / n
    var = max(s2 / n - mean * mean, 0.0) * n / (n - 1)
    lo, hi = cfg.interval
    return TRecord(float(T), mean, _stderr(math.sqrt(var), n, mean), n, hi - lo)


def horocycle_run(cfg: ExperimentConfig, threads: int = 1,
                  with_limits: bool = True) -> RunResult:
    """Average the two-surface observable along the horocycle pair for each T.

    Schedule entries are independent units with their own seeded streams, so
    the result does not depend on ``threads``.  With ``with_limits`` the
    product-measure prediction, and for rational slopes the Monte Carlo limit
    and (when the second factor is constant) the closed-form limit, are attached.
    """
    phi = cfg.parsed_observable()
    units = range(len(cfg.T_schedule))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(lambda u: _horocycle_unit(cfg, phi, u), units))
    else:
        records = [_horocycle_unit(cfg, phi, u) for u in units]
    result = RunResult(cfg, records,
                       counters={"horocycle_samples": sum(r.N for r in records)})
    if not with_limits:
        return result
    result.product_limit = phi.reference_integral
    if cfg.slope.is_rational:
        p, q = cfg.slope.p, cfg.slope.q
        result.rational_limit = rational_limit_mc(phi, p, q, cfg.limit_samples,
                                                  cfg.seed, threads=threads)
        result.counters["limit_samples"] = cfg.limit_samples
        result.counters["cosets"] = enumerate_gamma_cosets(p, q).M
        result.eigenform_limit = eigenform_limit_closed(phi, p, q)
    return result


def _rotate_about_i(theta: np.ndarray, v: complex) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return (c * v + s) / (-s * v + c)


def _frame_samples(rng: np.random.Generator, n: int, p: int, q: int):
    """``w`` from the invariant measure and the partner point ``g_w k a_{p/q} i``."""
    w = sample_F(rng, n)
    theta = rng.uniform(0.0, math.pi, n)
    v = _rotate_about_i(theta, 1j * p / q)
    return w, w.real + w.imag * v


def _limit_chunk(phi: Observable, p: int, q: int, mats: np.ndarray,
                 seed: int, index: int, n: int):
    rng = _stream(seed, 1 << 20, index)
    w, z1 = _frame_samples(rng, n, p, q)
    z1r = reduce_array(z1)
    if index == 0:
        # the first slot is evaluated on reduced points; spot-check invariance
        k = min(n, 64)
        moved = -1.0 / (z1[:k] + 3.0)
        f_ref = phi.on_F(z1r[:k], z1r[:k])
        f_mov = phi.on_F(reduce_array(moved), reduce_array(moved))
        if not np.allclose(f_ref, f_mov, atol=1e-8, rtol=1e-6):
            raise AssertionError(f"{phi.name} is not SL(2,Z)-invariant in the first slot")
    acc = np.zeros(n)
    for m in mats:
        z2 = (m[0, 0] * w + m[0, 1]) / (m[1, 0] * w + m[1, 1])
        acc += phi.on_F(z1r, reduce_array(z2))
    acc /= len(mats)
    return float(np.sum(acc)), float(np.sum(acc * acc))


def _merge_mc(parts, n):
    s1 = sum(a for a, _ in parts)
    s2 = sum(b for _, b in parts)
    mean = s1 / n
    var = max(s2 / n - mean * mean, 0.0) * n / (n - 1)
    return mean, _stderr(math.sqrt(var), n, mean)


def _chunks(n: int):
    return [(i, min(MC_CHUNK, n - i * MC_CHUNK)) for i in range((n + MC_CHUNK - 1) // MC_CHUNK)]


def rational_limit_mc(phi: Observable, p: int, q: int, N: int, seed: int,
                      threads: int = 1) -> tuple[float, float]:
    """Monte Carlo value and standard error of the rational-slope limit.

    Estimates ``(1/mu(Gamma_{p/q}\\G)) int phi(g, a_{p/q} g a_{p/q}^-1) dmu(g)``
    with ``mu(Gamma\\G) = 1``.  Each of the ``N`` frame samples contributes the
    average over all ``M`` cosets, and the standard error is taken over
    those per-sample averages.
    """
    if phi.arity != 2:
        raise ValueError("need a two-surface observable")
    mats = enumerate_gamma_cosets(p, q).float_matrices()
    jobs = _chunks(N)

    def run(job):
        return _limit_chunk(phi, p, q, mats, seed, *job)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, jobs))
    else:
        parts = [run(j) for j in jobs]
    return _merge_mc(parts, N)


def eigenform_limit_mc(f1: Observable, f2: Observable, p: int, q: int, eigenvalue: float,
                       N: int, seed: int) -> tuple[float, float]:
    """``sqrt(pq) lambda / M * int f1(g) f2(g a_{p/q}^-1) dmu`` by Monte Carlo.

    After ``g -> g a`` the integrand is ``f1`` at the partner point times ``f2(w)``.
    """
    M = enumerate_gamma_cosets(p, q).M
    factor = math.sqrt(p * q) * eigenvalue / M
    parts = []
    for index, n in _chunks(N):
        rng = _stream(seed, 1 << 20, index)
        w, z1 = _frame_samples(rng, n, p, q)
        v = factor * f1(z1) * f2(w)
        parts.append((float(np.sum(v)), float(np.sum(v * v))))
    return _merge_mc(parts, N)


def eigenform_limit_closed(phi: Observable, p: int, q: int) -> float | None:
    """Closed form of the limit when the second factor is a constant.

    A constant ``c`` has eigenvalue ``sigma(n)/sqrt(n)`` for ``T_n``; the
    limit formula then reads ``sigma(pq)/M * c * int f1``, which is
    ``c * int f1`` exactly when ``pq`` is squarefree.
    """
    if not phi.factors or not is_squarefree(p * q):
        return None
    f1, f2 = phi.factors
    if not f2.name.startswith("const") or f1.reference_integral is None:
        return None
    n = p * q
    return sigma(n) / psi(n) * f2.reference_integral * f1.reference_integral


@dataclass(frozen=True)
class HeckeReport:
    p: int
    q: int
    applicable: bool
    eigenvalue: float | None = None
    ratios: tuple[float, ...] = ()
    max_deviation: float | None = None

    def summary(self) -> str:
        if not self.applicable:
            return f"({self.p},{self.q}): not applicable (pq not squarefree)"
        return (f"({self.p},{self.q}): lambda(pq) = {self.eigenvalue:.12g}, "
                f"max relative deviation {self.max_deviation:.3g}")


def verify_hecke_pointwise(f2: Observable, p: int, q: int, base_points) -> HeckeReport:
    """Check ``sum_m f2(a h_m z) = sqrt(pq) lambda(pq) f2(z)`` at the base points.

    ``lambda`` is the median of the observed ratios; the report carries the
    largest relative deviation from it.
    """
    if not is_squarefree(p * q):
        return HeckeReport(p, q, False)
    root = math.sqrt(p * q)
    ratios = []
    for z in base_points:
        fz = float(f2(np.array([complex(z)]))[0])
        ratios.append(apply_double_coset(f2, p, q, z) / (root * fz))
    lam = float(np.median(ratios))
    dev = max(abs(r - lam) for r in ratios) / abs(lam)
    return HeckeReport(p, q, True, lam, tuple(ratios), dev)


def correspondence_distances(x: np.ndarray, T: float, p: int, q: int) -> np.ndarray:
    """Distance of each reduced horocycle pair from the Hecke correspondence.

    With ``gamma`` reducing ``z1`` and ``w = x + i q/(p T)`` (so ``z2 = (p/q) w``),
    the reduced ``z2`` must coincide with one of the reduced
    ``a_{p/q} h_m gamma w``.  Returns the minimum over ``m`` for each sample.
    """
    slope = Slope.rational(p, q)
    z1, z2 = horocycle_points(x, T, slope)
    _, (A, B, C, D) = reduce_array(z1, return_witness=True)
    w = x + 1j * q / (p * T)
    gw = (A * w + B) / (C * w + D)
    target = reduce_array(z2)
    best = np.full(x.shape, np.inf)
    for m in enumerate_gamma_cosets(p, q).float_matrices():
        cand = reduce_array((m[0, 0] * gw + m[0, 1]) / (m[1, 0] * gw + m[1, 1]))
        best = np.minimum(best, boundary_distance(cand, target))
    return best


def boundary_distance(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Euclidean distance between points of F, allowing for the side identifications."""
    d = np.abs(u - v)
    for moved in (u + 1, u - 1, -1.0 / u, -1.0 / u + 1, -1.0 / u - 1, -1.0 / (u + 1),
                  -1.0 / (u - 1)):
        d = np.minimum(d, np.abs(moved - v))
    return d


VERDICT_EQUID = "CONSISTENT-WITH-EQUIDISTRIBUTION"
VERDICT_RATIONAL = "CONSISTENT-WITH-RATIONAL-LIMIT"
VERDICT_INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True)
class CompareReport:
    lines: tuple[str, ...]
    verdict: str
    z_product: float | None
    z_rational: float | None

    def __str__(self):
        return "\n".join(self.lines + (f"verdict: {self.verdict}",))


def _fz(v):
    return "n/a" if v is None else f"{v:+.3f}"


def compare_report(run: RunResult) -> CompareReport:
    """Per-T comparison table and a verdict based on the largest T (3 sigma)."""
    lines = [f"slope {run.config.slope}; observable {run.config.observable}",
             f"product prediction: {run.product_limit}"]
    if run.rational_limit is not None:
        lines.append("rational-limit prediction: {:.10g} +- {:.3g}".format(*run.rational_limit))
    if run.eigenform_limit is not None:
        lines.append(f"eigenform closed form: {run.eigenform_limit:.10g}")
    lines.append("T  estimate  stderr  z_product  z_rational")
    for rec in run.records:
        lines.append(f"{rec.T:.6g}  {rec.estimate:.10g}  {rec.stderr:.3g}  "
                     f"{_fz(run.z_product(rec))}  {_fz(run.z_rational(rec))}")
    last = run.records[-1]
    zp, zr = run.z_product(last), run.z_rational(last)
    ok_p = zp is not None and abs(zp) <= Z_THRESHOLD
    ok_r = zr is not None and abs(zr) <= Z_THRESHOLD
    if ok_r:
        verdict = VERDICT_RATIONAL
    elif ok_p:
        verdict = VERDICT_EQUID
    else:
        verdict = VERDICT_INCONCLUSIVE
    return CompareReport(tuple(lines), verdict, zp, zr)
