import math

import numpy as np
import pytest

from horolab.experiments import (VERDICT_EQUID, VERDICT_INCONCLUSIVE, VERDICT_RATIONAL,
                                 ExperimentConfig, RunResult, TRecord, boundary_distance,
                                 compare_report, correspondence_distances,
                                 eigenform_limit_closed, eigenform_limit_mc,
                                 horocycle_points, horocycle_run, rational_limit_mc,
                                 sample_interval, verify_hecke_pointwise)
from horolab.hecke import eisenstein_eigenvalue
from horolab.modular import reduce_array
from horolab.observables import eisenstein, parse_observable, product_observable
from horolab.sl2 import Slope

HH = "prod(height:2:inf:0,height:2:inf:0)"
PRODUCT = (3 / (2 * math.pi)) ** 2


def cfg(**kw):
    base = dict(slope=Slope.sqrt(2), T_schedule=(10.0, 100.0), sample_count=2000,
                observable=HH, seed=3, limit_samples=2000)
    base.update(kw)
    return ExperimentConfig(**base)


@pytest.mark.parametrize("kw", [
    dict(interval=(1.0, 0.0)), dict(T_schedule=(100.0, 10.0)), dict(T_schedule=(1.0,)),
    dict(T_schedule=()), dict(sample_count=10), dict(sampling="sobol"), dict(seed=-1),
    dict(observable="height:2:inf:0"), dict(observable="bogus"),
])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        cfg(**kw)


@pytest.mark.parametrize("mode", ["grid", "uniform-random", "low-discrepancy"])
def test_sample_interval_modes(mode):
    c = cfg(sampling=mode, interval=(-1.0, 2.0))
    x = sample_interval(c, 0)
    assert x.size == 2000 and x.min() >= -1 and x.max() < 2
    assert np.array_equal(x, sample_interval(c, 0))
    assert not np.array_equal(x, sample_interval(c, 1))
    # every mode fills the interval evenly enough for a mean test
    assert abs(x.mean() - 0.5) < 0.1


def test_grid_is_equispaced():
    x = sample_interval(cfg(), 0)
    assert np.allclose(np.diff(x), 1 / 2000, atol=1e-15)


def test_horocycle_points_match_group_action():
    # z1 = u_x a_{1/T} i, z2 = a_y u_x a_{1/T} a_y^-1 i
    x = np.array([0.1, 0.37, 0.9])
    T, y = 50.0, 2 / 3
    z1, z2 = horocycle_points(x, T, Slope.rational(2, 3))
    assert np.allclose(z1, x + 1j / T)
    expected = y * (x + 1j / (T * y))
    assert np.allclose(reduce_array(z2), reduce_array(expected), atol=1e-12)


def test_xy_product_is_reduced_mod_one_accurately():
    x = np.array([123456.789])
    _, z2 = horocycle_points(x, 10.0, Slope.rational(2, 3))
    exact = (123456789 * 2 / 3000) % 1
    exact = exact - round(exact)
    assert abs(z2.real[0] - exact) < 1e-10


def test_constant_observable_is_exactly_one():
    run = horocycle_run(cfg(observable="prod(const,const)"))
    assert all(r.estimate == 1.0 for r in run.records)
    assert all(r.stderr > 0 for r in run.records)


def test_run_is_deterministic_and_thread_independent():
    c = cfg(slope=Slope.rational(2, 3))
    a = horocycle_run(c)
    b = horocycle_run(c, threads=3)
    assert a.records == b.records
    assert a.rational_limit == b.rational_limit
    d = horocycle_run(cfg(slope=Slope.rational(2, 3), seed=4))
    assert d.rational_limit != a.rational_limit


def test_record_integral():
    r = TRecord(10.0, 0.25, 0.01, 100, 4.0)
    assert r.integral == 1.0


def test_identity_slope_has_diagonal_limit():
    # y = 1: both points coincide, so the limit is int f(z)^2 = int f
    run = horocycle_run(cfg(slope=Slope.rational(1, 1), T_schedule=(1000.0,),
                            sample_count=20000, limit_samples=20000))
    value, se = run.rational_limit
    assert value == pytest.approx(3 / (2 * math.pi), abs=4 * se)
    rec = run.records[-1]
    assert abs(rec.estimate - value) < 4 * math.hypot(rec.stderr, se)


def test_rational_limit_with_constant_factor_is_the_integral():
    phi = parse_observable("prod(height:1.5:inf:0,const)")
    value, se = rational_limit_mc(phi, 2, 3, 50_000, seed=9)
    assert abs(value - 2 / math.pi) < 4 * se


def test_rational_limit_thread_independent():
    phi = parse_observable(HH)
    n = 300_000  # spans several chunks
    assert rational_limit_mc(phi, 2, 3, n, 5) == rational_limit_mc(phi, 2, 3, n, 5, threads=2)


def test_rational_limit_rejects_one_surface_observables():
    with pytest.raises(ValueError):
        rational_limit_mc(parse_observable("const"), 2, 3, 1000, 0)


def test_eigenform_formula_matches_rational_limit():
    # for a Hecke eigenform f2 the coset average collapses to a single term
    f1 = parse_observable("height:1:3:0")
    E = eisenstein(2, 60)
    lam = eisenstein_eigenvalue(2, 6)
    closed, se_c = eigenform_limit_mc(f1, E, 2, 3, lam, 4000, seed=2)
    mc, _ = rational_limit_mc(product_observable(f1, E), 2, 3, 4000, seed=2)
    # both use the same frame samples, so only the lattice-sum truncation separates them
    assert closed == pytest.approx(mc, rel=1e-4)
    assert se_c < 0.1 * abs(closed)


def test_eigenform_closed_form_constant_second_factor():
    phi = parse_observable("prod(height:2:inf:0,const)")
    assert eigenform_limit_closed(phi, 2, 3) == pytest.approx(3 / (2 * math.pi))
    assert eigenform_limit_closed(phi, 4, 1) is None
    assert eigenform_limit_closed(parse_observable(HH), 2, 3) is None


def test_hecke_pointwise_constant_and_eisenstein():
    rep = verify_hecke_pointwise(parse_observable("const"), 2, 3, [1j, 0.2 + 1.5j])
    assert rep.applicable
    assert rep.eigenvalue == pytest.approx(12 / math.sqrt(6), rel=1e-14)
    assert rep.max_deviation < 1e-14
    rep = verify_hecke_pointwise(eisenstein(2, 200), 2, 3, [1j, 1 + 1.3j, -0.3 + 2j])
    assert rep.max_deviation < 1e-3
    assert "lambda" in rep.summary()


def test_hecke_pointwise_not_applicable():
    rep = verify_hecke_pointwise(parse_observable("const"), 4, 1, [1j])
    assert not rep.applicable and rep.eigenvalue is None
    assert "not applicable" in rep.summary()


def test_correspondence_confinement():
    x = np.random.default_rng(4).uniform(0, 1, 5000)
    d = correspondence_distances(x, 1e3, 2, 3)
    assert np.all(d < 1e-6)


def test_confinement_detects_wrong_slope():
    # pairs built with slope 2/3 are not on the correspondence for 3/5
    x = np.random.default_rng(5).uniform(0, 1, 500)
    from horolab.experiments import enumerate_gamma_cosets
    z1, z2 = horocycle_points(x, 1e3, Slope.rational(3, 5))
    _, (A, B, C, D) = reduce_array(z1, return_witness=True)
    w = x + 1j * 3 / (2 * 1e3)
    gw = (A * w + B) / (C * w + D)
    best = np.full(x.shape, np.inf)
    for m in enumerate_gamma_cosets(2, 3).float_matrices():
        cand = reduce_array((m[0, 0] * gw + m[0, 1]) / (m[1, 0] * gw + m[1, 1]))
        best = np.minimum(best, boundary_distance(cand, reduce_array(z2)))
    assert np.mean(best > 1e-3) > 0.9


def test_boundary_distance_identifies_sides():
    u = np.array([-0.5 + 2j, complex(math.cos(1.2), math.sin(1.2))])
    v = np.array([0.5 + 2j, -1 / u[1]])
    assert np.all(boundary_distance(u, v) < 1e-12)


def _fake_run(estimate, stderr, product, rational):
    c = cfg(slope=Slope.rational(2, 3))
    return RunResult(c, [TRecord(1e4, estimate, stderr, 100, 1.0)], product, rational)


@pytest.mark.parametrize("est,verdict", [
    (0.2700, VERDICT_RATIONAL), (0.2280, VERDICT_EQUID), (0.30, VERDICT_INCONCLUSIVE)])
def test_compare_report_verdicts(est, verdict):
    rep = compare_report(_fake_run(est, 0.001, PRODUCT, (0.2708, 0.0003)))
    assert rep.verdict == verdict
    assert str(rep).endswith(f"verdict: {verdict}")


def test_compare_report_irrational():
    run = horocycle_run(cfg(observable="prod(const,const)"))
    rep = compare_report(run)
    assert rep.verdict == VERDICT_EQUID and rep.z_rational is None
