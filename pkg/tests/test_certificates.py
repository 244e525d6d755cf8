import math
from fractions import Fraction as Q

import numpy as np
import pytest

from momentum_lab.algorithm import AlgorithmParams, Method, PoleError, make_state_space, transfer_g
from momentum_lab.certificates import (
    Multiplier,
    _g_and_derivative,
    certify,
    closed_loop_char_poly,
    fdi_raw,
    fdi_reduced,
    fdi_reduced_max,
    fdi_sweep,
    fdi_value,
    jury_rho_disk,
    loop_transform_stable,
    rootlocus_residuals,
    spectral_radius,
    worst_case_rate,
)
from momentum_lab.polynomial import build_p, rho_c2m
from momentum_lab.schedules import c2m_parameters, schedule


def custom(alpha, beta, eta, m=1.0, L=9.0):
    return AlgorithmParams(alpha, beta, eta, m, L)


def test_char_poly_examples():
    hb = custom(0.25, 0.25, 0)
    assert closed_loop_char_poly(hb, 1) == (-1.0, 0.25)
    assert closed_loop_char_poly(hb, 9) == (1.0, 0.25)
    np.testing.assert_allclose(np.roots([1, -1, 0.25]), [0.5, 0.5], atol=1e-7)
    gd = custom(0.5, 0, 0, L=3)
    assert closed_loop_char_poly(gd, 1) == (-0.5, 0.0)


def test_char_poly_matches_eigenvalues():
    rng = np.random.default_rng(3)
    for _ in range(100):
        p = AlgorithmParams(rng.uniform(0.01, 2), rng.uniform(-0.9, 0.99), rng.uniform(-1, 2),
                            1.0, rng.uniform(1, 50))
        q = rng.uniform(p.m, p.L)
        a1, a0 = closed_loop_char_poly(p, q)
        roots = np.sort_complex(np.roots([1, a1, a0]))
        eigs = np.sort_complex(np.linalg.eigvals(make_state_space(p).closed_loop(q)))
        np.testing.assert_allclose(roots, eigs, atol=1e-10)
        assert spectral_radius(p, q) == pytest.approx(max(abs(eigs)), abs=1e-10)


def test_jury_examples():
    assert jury_rho_disk(c2m_parameters(1, 100, 0.86), 0.86).passed
    assert not jury_rho_disk(c2m_parameters(1, 100, 0.80), 0.80).passed
    hb = schedule("hb", 1, 9).params
    res = jury_rho_disk(hb, 0.5)
    assert res.passed
    assert res.min_margin == 0.0
    with pytest.raises(ValueError):
        jury_rho_disk(hb, 1.0)


def test_jury_soundness_random():
    rng = np.random.default_rng(4)
    checked = 0
    for _ in range(3000):
        p = AlgorithmParams(rng.uniform(0.001, 1), rng.uniform(-0.5, 0.99), rng.uniform(-0.5, 1.5),
                            1.0, rng.uniform(1, 100))
        rho = rng.uniform(0.05, 0.999)
        res = jury_rho_disk(p, rho)
        if abs(res.min_margin) < 1e-8:
            continue  # too close to the boundary for a float comparison
        radius = max(spectral_radius(p, p.m), spectral_radius(p, p.L))
        assert res.passed == (radius <= rho + 1e-12)
        if res.passed:
            qs = rng.uniform(p.m, p.L, 100)
            assert np.all(spectral_radius(p, qs) <= rho + 1e-12)
        checked += 1
    assert checked > 2000


def test_worst_case_rate_examples():
    rate, q = worst_case_rate(schedule("gd", 1, 3).params)
    assert rate == pytest.approx(0.5, abs=1e-12) and q in (1.0, 3.0)
    rate, q = worst_case_rate(schedule("hb", 1, 9).params)
    assert rate == pytest.approx(0.5, abs=1e-9) and 1 <= q <= 9
    for L, rho in [(100, 0.855), (1e4, None)]:
        p = c2m_parameters(1, L, rho) if rho else schedule("c2m", 1, L).params
        rate, q = worst_case_rate(p)
        assert rate == pytest.approx(p.rho, abs=1e-6)
        assert p.m <= q <= p.L


def test_worst_case_rate_beats_dense_grid():
    rng = np.random.default_rng(5)
    for _ in range(30):
        p = AlgorithmParams(rng.uniform(0.001, 0.5), rng.uniform(0, 0.95), rng.uniform(0, 1),
                            1.0, rng.uniform(2, 200))
        rate, q = worst_case_rate(p)
        dense = spectral_radius(p, np.linspace(p.m, p.L, 200_001)).max()
        assert rate >= dense - 1e-12
        assert rate == pytest.approx(float(spectral_radius(p, q)), abs=0)


def test_rootlocus_examples():
    assert max(map(abs, rootlocus_residuals(c2m_parameters(1, 100, 0.86), 0.86))) < 1e-9
    assert max(map(abs, rootlocus_residuals(schedule("c2m", 1, 4).params, 1 / 3))) < 1e-12
    r1, r2, r3 = rootlocus_residuals(schedule("gd", 1, 3).params, 0.5)
    assert r2 == pytest.approx(0, abs=1e-15)
    assert abs(r3) > 0.1
    with pytest.raises(PoleError):
        rootlocus_residuals(custom(0.1, 0.5, 0), 0.5)


def test_rootlocus_derivative_matches_finite_difference():
    p = c2m_parameters(1, 50, 0.8)
    h = 1e-6
    for z in (0.3, -0.4, 0.95):
        fd = (transfer_g(p, z + h) - transfer_g(p, z - h)).real / (2 * h)
        assert _g_and_derivative(p, z)[1] == pytest.approx(fd, rel=1e-6)


@pytest.mark.parametrize("L", [18.0, 100.0, 1e4])
def test_double_root_witness(L):
    p = schedule("c2m", 1.0, L).params
    a1, a0 = closed_loop_char_poly(p, p.m)
    assert abs(a1 * a1 - 4 * a0) < 1e-9
    assert p.rho ** 2 + a1 * p.rho + a0 == pytest.approx(0, abs=1e-9)
    a1, a0 = closed_loop_char_poly(p, p.L)
    assert p.rho ** 2 - a1 * p.rho + a0 == pytest.approx(0, abs=1e-9)


def test_multiplier():
    mult = Multiplier(1, 10)
    assert mult.impulse_response == {1: 1.0}
    assert sum(mult.impulse_response.values()) <= 1
    for z in np.exp(1j * np.linspace(0.1, 3, 7)):
        M = mult.matrix(z)
        np.testing.assert_allclose(M, M.conj().T, atol=1e-14)
    with pytest.raises(NotImplementedError):
        Multiplier(1, 10, "other")


def test_fdi_value_equals_raw_times_positive_factor():
    rng = np.random.default_rng(6)
    for _ in range(20):
        p = AlgorithmParams(rng.uniform(0.001, 1), rng.uniform(-0.9, 0.95), rng.uniform(-1, 1),
                            1.0, rng.uniform(1, 100))
        mult = Multiplier(p.m, p.L)
        for z in np.exp(1j * rng.uniform(0.01, 2 * math.pi - 0.01, 20)):
            want = fdi_raw(p, mult, z) * abs(z - p.beta) ** 2
            assert fdi_value(p, mult, z) == pytest.approx(want, rel=1e-9, abs=1e-12)


def test_fdi_finite_at_one_and_conjugate_symmetric():
    p = c2m_parameters(1, 100, 0.86)
    mult = Multiplier(1, 100)
    v1 = fdi_value(p, mult, 1.0)
    assert math.isfinite(v1)
    near = fdi_value(p, mult, np.exp(1e-7j))
    assert v1 == pytest.approx(near, rel=1e-9)
    assert np.sign(v1) == np.sign(fdi_reduced(100, 0.86, 1.0))
    assert fdi_value(p, mult, 1j) < 0
    zs = np.exp(1j * np.linspace(0, math.pi, 257))
    np.testing.assert_array_equal(fdi_value(p, mult, zs), fdi_value(p, mult, zs.conj()))


def test_fdi_reduced_exact_values():
    # exact rational evaluation of the quadratic at kappa=100, rho=0.86
    k, r = Q(100), Q(86, 100)
    assert fdi_reduced(k, r, Q(0)) == Q(-103249344, 10**8)
    assert fdi_reduced(k, r, Q(-1)) == Q(-85244544, 10**8)
    assert fdi_reduced(100, 0.86, 0.0) == pytest.approx(-1.03249344, abs=1e-12)


@pytest.mark.parametrize("L, rho", [(100, 0.86), (100, 0.855), (18, None), (1e4, None), (1e3, None)])
def test_cleared_form_is_reduced_form_over_one_plus_rho(L, rho):
    p = c2m_parameters(1.0, L, rho) if rho else schedule("c2m", 1.0, L).params
    mult = Multiplier(p.m, p.L)
    xs = np.linspace(-1, 1, 1024)
    zs = xs + 1j * np.sqrt(1 - xs**2)
    cleared = fdi_value(p, mult, zs)
    reduced = fdi_reduced(p.kappa, p.rho, xs)
    np.testing.assert_allclose(cleared, reduced / (1 + p.rho), rtol=1e-8, atol=1e-9 * L)
    assert np.all(np.sign(cleared) == np.sign(reduced))


def test_vertex_sign_matches_p():
    kappa = 100
    rho = rho_c2m(kappa) + 1e-9
    vmax, xv = fdi_reduced_max(kappa, rho)
    assert vmax < 0 and -1 <= xv <= 1
    denom = 4 * rho * (kappa * (1 - rho) ** 2 - (1 + rho))
    assert np.sign(vmax) == np.sign(float(build_p(kappa)(rho)) / denom)


def test_loop_transform_examples():
    assert loop_transform_stable(c2m_parameters(1, 100, 0.86))
    gd = schedule("gd", 1, 3).params
    assert spectral_radius(gd, 2.0) == 0
    assert loop_transform_stable(gd)
    assert not loop_transform_stable(AlgorithmParams(0.0, 0.3, 0.0, 1, 3))


@pytest.mark.parametrize("L", [18.0, 100.0, 1e3, 1e4])
def test_certify_c2m(L):
    rep = certify(schedule("c2m", 1.0, L).params)
    assert rep.passed, rep
    assert rep.jury_pass and rep.fdi_pass and rep.fdi_max < 0 and rep.fdi_vertex_max < 0
    assert rep.rootlocus_pass and rep.loop_transform_stable
    assert rep.worst_case_rate == pytest.approx(rep.rho, abs=1e-6)
    assert rep.m <= rep.q_at_worst <= rep.L


def test_certify_hb_regime():
    rep = certify(schedule("c2m", 1, 4).params)
    assert rep.passed and rep.fdi_vertex_max is None
    assert rep.worst_case_rate == pytest.approx(1 / 3, abs=1e-6)


@pytest.mark.parametrize("L", [100.0, 1000.0])
def test_certify_hb_fails_fdi(L):
    rep = certify(schedule("hb", 1, L).params)
    assert rep.jury_pass
    assert not rep.fdi_pass and rep.fdi_max > 0
    assert not rep.passed


@pytest.mark.parametrize("method", ["gd", "tm"])
def test_certify_minimax_methods(method):
    rep = certify(schedule(method, 1, 100).params)
    assert rep.passed
    assert rep.to_dict()["passed"] is True


def test_certify_requires_rate():
    with pytest.raises(ValueError):
        certify(custom(0.1, 0.2, 0.0))
    assert fdi_sweep(schedule("gd", 1, 10).params) < 0
    assert Method.C2M.value == certify(schedule("c2m", 1, 50).params).method
