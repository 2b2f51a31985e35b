import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fock_zeros.lattice import SquareLattice
from fock_zeros.logspace import LogComplex, relative_difference, weighted_mag
from fock_zeros.sigma import (G4_UNIT, SelfTestError, SigmaEvaluator, TruncationTooSmall,
                              eisenstein_unit, plan_truncation)

from conftest import ALPHAS


def _cell_samples(lat, count, seed):
    rng = np.random.default_rng(seed)
    h = lat.half_width
    z = rng.uniform(-h, h, count) + 1j * rng.uniform(-h, h, count)
    return z[np.abs(z) > 1e-3 * lat.omega1]


def test_g4_against_direct_sum():
    m, n = np.meshgrid(np.arange(-400, 401), np.arange(-400, 401))
    w = (m + 1j * n).ravel()
    w = w[w != 0]
    direct = np.sum(1.0 / w**4).real
    # the truncated sum misses roughly 2 pi / (2 * 400^2) of its tail
    assert direct == pytest.approx(G4_UNIT, rel=1e-5)
    assert eisenstein_unit()[4] == pytest.approx(G4_UNIT, rel=1e-14)


def test_square_lattice_sums_vanish_off_multiples_of_four():
    g = eisenstein_unit()
    assert g[6] == 0.0
    assert g[10] == 0.0
    m, n = np.meshgrid(np.arange(-60, 61), np.arange(-60, 61))
    w = (m + 1j * n).ravel()
    w = w[w != 0]
    assert np.sum(w**-8).real == pytest.approx(g[8], rel=1e-10)


@pytest.mark.parametrize("alpha", ALPHAS)
def test_routes_agree_in_fundamental_cell(sigmas, alpha):
    s = sigmas[alpha]
    z = _cell_samples(s.lattice, 100, seed=7)
    prod = s.eval_product(z)
    red = s.eval_reduced(z)
    theta = s.eval_theta(z)
    assert np.max(relative_difference(prod, red)) < 1e-8
    assert np.max(relative_difference(prod, theta)) < 1e-8
    assert np.max(relative_difference(red, theta)) < 1e-8


def test_routes_agree_far_out(sigma_pi):
    rng = np.random.default_rng(3)
    z = 9.0 * np.sqrt(rng.uniform(0, 1, 60)) * np.exp(2j * np.pi * rng.uniform(0, 1, 60))
    prod = weighted_mag(sigma_pi.eval_product(z), z, math.pi)
    red = weighted_mag(sigma_pi.eval_reduced(z), z, math.pi)
    theta = weighted_mag(sigma_pi.eval_theta(z), z, math.pi)
    assert np.max(np.abs(prod - red)) < 1e-8
    assert np.max(np.abs(theta - red)) < 1e-8


@pytest.mark.parametrize("route", ["eval_product", "eval_reduced", "eval_theta"])
def test_sigma_over_z_tends_to_one(sigma_pi, route):
    for ang in np.linspace(0, 2 * np.pi, 8, endpoint=False):
        z = 1e-3 * np.exp(1j * ang)
        v = getattr(sigma_pi, route)(z)
        assert abs(v.to_complex() / z - 1) < 1e-6


@pytest.mark.parametrize("alpha", ALPHAS)
@pytest.mark.parametrize("route", ["reduced", "product"])
def test_weighted_modulus_periodic(sigmas, alpha, route):
    s = sigmas[alpha]
    w = s.omega1
    rng = np.random.default_rng(11)
    z = 6 * w * np.sqrt(rng.uniform(0, 1, 200)) * np.exp(2j * np.pi * rng.uniform(0, 1, 200))
    ev = s.eval_reduced if route == "reduced" else lambda x: s.eval_product(x, auto=True)
    base = weighted_mag(ev(z), z, alpha)
    for period in (w, 1j * w):
        shifted = weighted_mag(ev(z + period), z + period, alpha)
        assert np.max(np.abs(shifted - base)) < 1e-8


def test_quasi_periodicity_with_phase(sigma_pi):
    """sigma(z + w) = eps * sigma(z) * exp(eta(w) (z + w/2)), eps = (-1)^(m+n+mn)."""
    lat = sigma_pi.lattice
    z = np.array([0.3 + 0.1j, -0.2 + 0.45j, 1.7 - 0.4j])
    for m, n in [(1, 0), (0, 1), (1, 1), (2, -1), (-3, 2)]:
        w = lat.point((m, n))
        eta = math.pi * w.conjugate()
        eps = (-1) ** (m + n + m * n)
        lhs = sigma_pi.eval_product(z + w, auto=True)
        rhs = sigma_pi.eval_product(z, auto=True) * LogComplex.from_log(np.log(eps + 0j) + eta * (z + w / 2))
        assert np.max(relative_difference(lhs, rhs)) < 1e-8


@given(st.complex_numbers(max_magnitude=5.0, allow_nan=False, allow_infinity=False))
def test_odd_and_quarter_turn_symmetry(sigma_pi, z):
    v = sigma_pi.eval_reduced(z)
    assert relative_difference(sigma_pi.eval_reduced(-z), -v) < 1e-9
    assert relative_difference(sigma_pi.eval_reduced(1j * z), v * 1j) < 1e-9


@given(st.complex_numbers(min_magnitude=0.01, max_magnitude=3.0, allow_nan=False, allow_infinity=False),
       st.floats(0.3, 8.0))
def test_scaling_covariance(z, alpha):
    s_a = SigmaEvaluator(SquareLattice(alpha))
    s_1 = SigmaEvaluator(SquareLattice(1.0))
    lhs = s_a.eval_reduced(z)
    rhs = s_1.eval_reduced(math.sqrt(alpha) * z) / math.sqrt(alpha)
    assert relative_difference(lhs, rhs) < 1e-9


def test_zero_set_is_the_lattice(sigma_pi):
    lat = sigma_pi.lattice
    idx = [(0, 0), (1, 0), (-2, 3), (4, 4)]
    pts = np.array([lat.point(i) for i in idx])
    for ev in (sigma_pi.eval_reduced, sigma_pi.eval_product):
        assert np.all(np.isneginf(ev(pts).logmag))
    # simple zeros: |sigma(w + d)| / |d| settles to |sigma'(w)|
    d = 1e-7
    for i, w in zip(idx, pts):
        near = sigma_pi.eval_reduced(w + d)
        deriv = math.exp(near.logmag) / d
        slope = math.exp(sigma_pi.eval_reduced(w + 2 * d).logmag) / (2 * d)
        assert deriv == pytest.approx(slope, rel=1e-5)
    # off the lattice sigma does not vanish
    z = _cell_samples(lat, 200, seed=5) + lat.point((2, 1))
    assert np.all(np.isfinite(sigma_pi.eval_reduced(z).logmag))


def test_fixed_ring_too_small_raises():
    s = SigmaEvaluator(SquareLattice(math.pi), truncation_ring=2, self_test=False)
    with pytest.raises(TruncationTooSmall):
        s.eval_product(20 + 3j)
    with pytest.raises(TruncationTooSmall):
        plan_truncation(50.0, 1e-14, max_ring=3)


def test_fixed_ring_converges_to_auto():
    lat = SquareLattice(math.pi)
    z = np.array([0.4 + 0.2j, 1.3 - 2.1j])
    ref = SigmaEvaluator(lat).eval_reduced(z)
    for ring in (20, 80):
        got = SigmaEvaluator(lat, truncation_ring=ring).eval_product(z)
        assert np.max(relative_difference(got, ref)) < 1e-9


def test_self_test_catches_corrupt_eta():
    with pytest.raises(SelfTestError):
        SigmaEvaluator(SquareLattice(math.pi), eta_scale=1.001)
    SigmaEvaluator(SquareLattice(math.pi), eta_scale=1.001, self_test=False)


def test_large_argument_no_overflow(sigma_pi):
    z = 300.3 + 200.1j
    v = sigma_pi.eval_reduced(z)
    assert np.isfinite(v.logmag)
    wm = weighted_mag(v, z, math.pi)
    assert wm < 0.5
    z0, _ = sigma_pi.lattice.reduce(z)
    assert wm == pytest.approx(weighted_mag(sigma_pi.eval_reduced(z0), z0, math.pi), abs=1e-7)


@pytest.mark.parametrize("alpha,z,ring,tol", [
    (math.pi, 0.5 + 0j, 40, 1e-9),
    (math.pi, 3.2 + 2.7j, 80, 1e-8),
    (2 * math.pi, 0.31 - 0.17j, 60, 1e-9),
])
def test_fixed_window_product_examples(alpha, z, ring, tol):
    s = SigmaEvaluator(SquareLattice(alpha), truncation_ring=ring)
    prod = s.eval_product(z)
    assert relative_difference(prod, s.eval_theta(z)) < tol
    assert relative_difference(s.eval_reduced(z), prod) < tol


def test_theta_derivative_at_origin(sigma_pi):
    errs = []
    for h in (1e-2, 5e-3):
        d = (sigma_pi.eval_theta(h).to_complex() - sigma_pi.eval_theta(-h).to_complex()) / (2 * h)
        errs.append(abs(d - 1))
    assert errs[0] < 1e-6
    assert errs[1] <= errs[0]


def test_theta_zero_set(sigma_pi):
    lat = sigma_pi.lattice
    pts = np.array([lat.point(i) for i in [(0, 0), (1, 0), (0, -1), (2, 3), (-4, 1)]])
    assert np.all(weighted_mag(sigma_pi.eval_theta(pts), pts, math.pi) < -30)


def test_cell_maximum_translates(sigma_pi):
    lat = sigma_pi.lattice
    t = np.linspace(-lat.half_width, lat.half_width, 41)
    grid = (t[:, None] + 1j * t[None, :]).ravel()
    base = np.max(weighted_mag(sigma_pi.eval_reduced(grid), grid, math.pi))
    for idx in [(1, 0), (3, -2), (-5, 4)]:
        z = grid + lat.point(idx)
        assert np.max(weighted_mag(sigma_pi.eval_reduced(z), z, math.pi)) == pytest.approx(base, abs=1e-10)


def test_odd_symmetry_tight(sigma_pi):
    z = np.array([0.2 + 0.1j, 1.3 - 2.2j, -3.7 + 0.4j])
    a, b = sigma_pi.eval_reduced(z), sigma_pi.eval_reduced(-z)
    assert np.max(np.abs(a.logmag - b.logmag)) < 1e-10
    assert np.max(np.abs(np.angle(np.exp(1j * (b.arg - a.arg - math.pi))))) < 1e-10
