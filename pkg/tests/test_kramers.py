import cmath
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from conftest import bistable_params
from kerrswitch import kramers as K
from kerrswitch.errors import NoBistability, PotentialSingularity
from kerrswitch.model import ModelParams
from kerrswitch.semiclassical import fixed_points

rng = np.random.default_rng(7)


def eq24(G, d, eta):
    """Dissipative-limit rate written out independently."""
    s = math.sqrt(G**2 - d**2)
    return (2 / math.pi) * abs(d) / G * s * math.exp(-2 * s / eta + 2 * d * math.atan(s / d) / eta)


def continued_exponent(params, alpha, n=20001):
    """Phi(alpha, alpha*) - Phi(0, 0) with the logarithm followed continuously along the segment."""
    k = params.kappa2
    t = np.linspace(0, 1, n)
    z = (t * alpha) ** 2 - params.G / k
    arg = np.unwrap(np.angle(z))
    w = 1 + 1j * params.Delta / k
    f = 2 * (w * (np.log(np.abs(z)) + 1j * arg)).real - 2 * np.abs(t * alpha) ** 2
    return f[-1] - f[0]


def fd_hessian(params, a, b, h=2e-3):
    # Richardson-extrapolated central differences
    return (4 * _fd_hessian(params, a, b, h / 2) - _fd_hessian(params, a, b, h)) / 3


def _fd_hessian(params, a, b, h):
    f = lambda x, y: K.potential(params, x, y)
    haa = (f(a + h, b) - 2 * f(a, b) + f(a - h, b)) / h**2
    hbb = (f(a, b + h) - 2 * f(a, b) + f(a, b - h)) / h**2
    hab = (f(a + h, b + h) - f(a + h, b - h) - f(a - h, b + h) + f(a - h, b - h)) / (4 * h * h)
    return np.array([[haa, hab], [hab, hbb]])


# potential and extrema

def test_potential_at_origin_dissipative():
    assert K.potential(ModelParams(6, 0, 1, 0), 0, 0) == pytest.approx(math.log(36), abs=1e-14)


def test_potential_singularity():
    p = ModelParams(4, 0, 1, 0)
    with pytest.raises(PotentialSingularity):
        K.potential(p, 2.0, 0)


@given(bistable_params(), st.complex_numbers(max_magnitude=3), st.complex_numbers(max_magnitude=3))
def test_potential_even(params, a, b):
    assume(abs(a * a - params.G / params.kappa2) > 1e-3 and abs(b * b - params.G / params.kappa2.conjugate()) > 1e-3)
    assume(abs((a * a - params.G / params.kappa2).imag) > 1e-9 and abs((b.conjugate() ** 2 - params.G / params.kappa2).imag) > 1e-9)
    assert K.potential(params, a, b) == pytest.approx(K.potential(params, -a, -b), abs=1e-9)


@given(bistable_params())
def test_gradient_vanishes_at_classical_point(params):
    a = K.extrema(params).alpha_cl
    b = a.conjugate()
    h = 1e-5
    da = (K.potential(params, a + h, b) - K.potential(params, a - h, b)) / (2 * h)
    db = (K.potential(params, a, b + h) - K.potential(params, a, b - h)) / (2 * h)
    assert abs(da) < 1e-8 * max(1, abs(a)) ** 2 * 10
    assert abs(db) < 1e-8 * max(1, abs(a)) ** 2 * 10


def test_extrema_dissipative_resonant():
    e = K.extrema(ModelParams(6, 0, 1, 0))
    assert abs(e.alpha_cl) ** 2 == pytest.approx(7)
    assert e.theta_cl == pytest.approx(0)


def test_extrema_phase_example():
    e = K.extrema(ModelParams(6, 3, 1, 0))
    assert cmath.exp(2j * e.theta_cl) == pytest.approx(complex(math.sqrt(27), 3) / 6)


@given(bistable_params())
def test_extrema_identities(params):
    e = K.extrema(params)
    k2 = params.kappa2_modulus**2
    assert abs(e.alpha_cl) ** 2 - e.alpha_q_sq == pytest.approx(2 + 2 * params.Delta * params.U / k2, abs=1e-9)
    assert abs(cmath.exp(2j * e.theta_cl) * cmath.exp(2j * e.theta_q)) == pytest.approx(1, abs=1e-12)
    assert abs(e.alpha_cl) ** 2 == pytest.approx(fixed_points(params).n0 + 1, rel=1e-12)
    assert e.quantum_pair_exists == (e.alpha_q is not None)


def test_extrema_without_bistability():
    with pytest.raises(NoBistability):
        K.extrema(ModelParams(6, 7, 1, 0))


# Hessians

def test_hessian_at_origin():
    p = ModelParams(6, 2, 0.8, 0.6)
    k = p.kappa2
    expected = [[-2j * (p.Delta - 1j * k) / p.G, -2], [-2, 2j * (p.Delta + 1j * k.conjugate()) / p.G]]
    assert np.allclose(K.hessian(p, 0, 0), expected)


def test_hessian_matches_finite_differences():
    n = 0
    while n < 50:
        G = rng.uniform(2, 10)
        params = ModelParams.from_polar(G, rng.uniform(0.05, 0.9) * G, rng.uniform(0.3, 1.5), rng.uniform(0, 1.4))
        a = complex(*rng.uniform(-2.5, 2.5, 2))
        b = complex(*rng.uniform(-2.5, 2.5, 2))
        c = params.G / params.kappa2
        if min(abs(a * a - c), abs(b * b - c.conjugate())) < 0.5:
            continue
        if min(abs((a * a - c).imag), abs((b.conjugate() ** 2 - c).imag)) < 1e-2:
            continue  # keep the stencil off the logarithm branch cut
        exact = K.hessian(params, a, b)
        approx = fd_hessian(params, a, b)
        assert np.abs(exact - approx).max() <= 1e-6 * np.abs(exact).max()
        n += 1


@given(bistable_params(max_delta_frac=0.9, min_delta_frac=0.05))
def test_hessian_closed_forms(params):
    assume(params.G**2 - (params.Delta + params.U) ** 2 > 0)
    det0, det_cl = K.determinants(params)
    assert det0 == pytest.approx(np.linalg.det(K.hessian(params, 0, 0)).real, rel=1e-8, abs=1e-12)
    a = K.extrema(params).alpha_cl
    numeric_cl = np.linalg.det(K.hessian(params, a, a.conjugate()))
    assert abs(numeric_cl.imag) < 1e-8 * abs(numeric_cl)
    assert det_cl == pytest.approx(numeric_cl.real, rel=1e-8)
    lam = K.saddle_eigenvalue(params)
    assert np.abs(np.linalg.eigvals(K.hessian(params, 0, 0)) - lam).min() < 1e-10
    assert lam < 0


def test_saddle_eigenvalue_example():
    assert K.saddle_eigenvalue(ModelParams(6, 3, 1, 0)) == pytest.approx(-2 * (math.sqrt(27) + 1) / 6)
    assert K.saddle_eigenvalue(ModelParams(6, 3, 1, 0)) == pytest.approx(-2.0654, abs=1e-4)


# full Eyring-Kramers rate

@settings(max_examples=100)
@given(bistable_params(min_delta_frac=0.02))
def test_exponent_matches_direct_potential(params):
    _, b = K.rate_full(params) if params.G > abs(params.Delta + params.U) + 1e-3 and \
        params.G**2 - (params.Delta + params.U) ** 2 - params.eta**2 > 0 else (None, None)
    phi0, parts = K.potential_parts(params)
    a = K.extrema(params).alpha_cl
    direct = K.potential(params, a, a.conjugate()) - K.potential(params, 0, 0)
    assert abs(direct.imag) < 1e-8
    assert sum(parts) - phi0 == pytest.approx(direct.real, abs=1e-8)
    if b is not None:
        assert b.exponent == pytest.approx(direct.real, abs=1e-8)


@settings(max_examples=40)
@given(bistable_params(min_delta_frac=-0.9, max_delta_frac=0.9))
def test_exponent_follows_continued_potential_for_either_sign(params):
    assume(abs(params.Delta) > 1e-3)
    phi0, parts = K.potential_parts(params)
    a = K.extrema(params).alpha_cl
    assert sum(parts) - phi0 == pytest.approx(continued_exponent(params, a), abs=1e-6)


@pytest.mark.parametrize("d", [0.5, 1.0, 3.0, 5.0])
def test_dissipative_exponent_even_in_detuning(d):
    a = K.rate_full(ModelParams(6, d, 1, 0))[0].log_value
    b = K.rate_full(ModelParams(6, -d, 1, 0))[0].log_value
    assert a == pytest.approx(b, rel=1e-12)


def test_full_rate_tends_to_barrier_rate_for_weak_nonlinearity():
    ratios = [K.rate_full(ModelParams.from_polar(6, 3, k, 0.3))[1] for k in (1.0, 0.5, 0.25, 0.1, 0.05)]
    r = [b.rate_full / b.rate_barrier for b in ratios]
    assert all(abs(x - 1) > abs(y - 1) for x, y in zip(r, r[1:]))
    assert r[-1] == pytest.approx(1, abs=0.02)


def test_full_rate_at_reference_point():
    rate, b = K.rate_full(ModelParams(6, 3, 1, 0))
    assert b.lambda1_saddle == pytest.approx(-2.0654, abs=1e-4)
    assert b.rate_full / b.rate_barrier == pytest.approx(1.3048, abs=1e-3)
    assert rate.value == pytest.approx(b.rate_full)


@settings(max_examples=100)
@given(bistable_params(min_delta_frac=0.3, max_delta_frac=0.9))
def test_full_and_barrier_agree_for_weak_nonlinearity(params):
    weak = params.replace(eta=params.eta * 0.05, U=params.U * 0.05)
    assume(abs(weak.Delta) > 10 * weak.kappa2_modulus and weak.G - abs(weak.Delta) > 10 * weak.kappa2_modulus)
    rate, b = K.rate_full(weak)
    assume(b.rate_barrier > 1e-300)
    assert b.rate_full / b.rate_barrier == pytest.approx(1, rel=0.2)


def test_exponent_approaches_barrier_form():
    diffs = []
    for k in (1.0, 0.5, 0.25, 0.1, 0.05):
        p = ModelParams.from_polar(6, 3, k, 0.3)
        b = K.rate_full(p)[1]
        diffs.append(abs(b.exponent - (-b.delta_phi + 2 * math.log(3 / 6))))
    assert all(x > y for x, y in zip(diffs, diffs[1:]))
    assert diffs[-1] < 1e-2


# barrier rate

def test_barrier_reduces_to_dissipative_form():
    for _ in range(20):
        G = rng.uniform(2, 10)
        d = rng.uniform(0.1, 0.95) * G * rng.choice([-1, 1])
        eta = rng.uniform(0.2, 2)
        r = K.rate_barrier(ModelParams(G, d, eta, 0))
        assert r.log_value == pytest.approx(math.log(eq24(G, d, eta)), rel=1e-10, abs=1e-10)


def test_barrier_reference_value():
    r = K.rate_barrier(ModelParams(6, 3, 1, 0))
    assert r.value == pytest.approx(0.0271, rel=5e-3)
    assert r.valid


def test_barrier_height_nonnegative_up_to_quarter_turn():
    for theta in np.linspace(0, math.pi / 4, 9):
        for d in np.linspace(0.05, 5.9, 60):
            assert K.barrier_height(ModelParams.from_polar(6, float(d), 1, float(theta))) >= 0


def test_barrier_rate_monotone_without_kerr():
    vals = [K.rate_barrier(ModelParams(6, float(d), 1, 0)).log_value for d in np.linspace(1, 5.4, 200)]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_barrier_rate_turns_over_next_to_critical_point():
    # the vanishing prefactor wins over the shrinking barrier close to Delta = G
    ds = np.linspace(5.0, 5.95, 96)
    vals = np.array([K.rate_barrier(ModelParams(6, float(d), 1, 0)).log_value for d in ds])
    peak = ds[np.argmax(vals)]
    assert 5.3 < peak < 5.7


def test_barrier_validity_flags():
    assert not K.rate_barrier(ModelParams(6, 0.5, 1, 0)).valid
    assert K.rate_barrier(ModelParams(6, 0.0, 1, 0)).value == 0


# small detuning, critical point, Arrhenius

def test_small_detuning_examples():
    assert K.rate_small_detuning(ModelParams(6, 0, 1, 0)).value == 0
    assert K.rate_small_detuning(ModelParams(6, 0.05, 1, 0)).value == pytest.approx(6.14e-8, rel=1e-3)


@given(st.floats(0, math.pi / 2 - 1e-6))
def test_small_detuning_depends_on_modulus_only(theta):
    a = K.rate_small_detuning(ModelParams.from_polar(6, 0.05, 1, theta)).log_value
    assert a == pytest.approx(K.rate_small_detuning(ModelParams(6, 0.05, 1, 0)).log_value, rel=1e-12)


def test_near_critical_prefactor_vanishes():
    vals = [K.rate_near_critical(ModelParams(6, 6 - eps, 1, 0)).value for eps in (1e-2, 1e-4, 1e-6)]
    assert vals[0] > vals[1] > vals[2]
    assert vals[2] == pytest.approx(2 / math.pi * math.sqrt(12e-6), rel=1e-3)


def test_near_critical_matches_barrier():
    p = ModelParams(6, 5.9, 1, 0)
    assert K.rate_near_critical(p).value == pytest.approx(K.rate_barrier(p).value, rel=0.1)


@pytest.mark.parametrize("offset,tol", [(1e-2, 0.15), (1e-3, 0.05)])
def test_near_critical_over_barrier_tends_to_one(offset, tol):
    p = ModelParams(6, 6 * (1 - offset), 1, 0)
    assert K.rate_near_critical(p).value / K.rate_barrier(p).value == pytest.approx(1, abs=tol)


def test_near_critical_flags_kerr():
    assert not K.rate_near_critical(ModelParams(6, 5.9, 1, 0.2)).valid


@given(st.floats(2, 10), st.floats(0.05, 0.99), st.floats(0.2, 2))
def test_arrhenius_pieces(G, frac, eta):
    d = G * frac
    ep = K.wigner_effective_potential(ModelParams(G, d, eta, 0))
    assert ep.omega0 == pytest.approx(math.sqrt(2 * G) * math.sqrt(G - d), rel=1e-12)
    assert ep.barrier_over_T == pytest.approx(4 * math.sqrt(2) * (G - d) ** 1.5 / (3 * eta * math.sqrt(G)), rel=1e-10)
    eq25 = K.rate_near_critical(ModelParams(G, d, eta, 0)).value
    # the closed-form critical rate carries four times the Arrhenius prefactor
    assert eq25 == pytest.approx(4 * K.arrhenius_rate(ModelParams(G, d, eta, 0)), rel=1e-10)


@given(st.floats(2, 10), st.floats(0.05, 0.99), st.floats(0.2, 2))
def test_effective_potential_minima(G, frac, eta):
    p = ModelParams(G, G * frac, eta, 0)
    ep = K.wigner_effective_potential(p)
    x0 = ep.x0
    dV = (p.Delta - G) * x0 + eta**2 * x0**5 / (8 * G)
    assert abs(dV) < 1e-10 * max(1, abs(p.Delta - G) * x0)
    assert ep.m == pytest.approx(1 / (2 * G)) and ep.T_eff == pytest.approx(G / 2)
    xs = np.linspace(-2 * x0, 2 * x0, 11)
    V = K.wigner_effective_potential(p, xs).V
    assert np.allclose(V, V[::-1])


def test_effective_potential_above_critical():
    ep = K.wigner_effective_potential(ModelParams(6, 7, 1, 0))
    assert math.isnan(ep.x0)


# critical ratio and large-Kerr minimum

def test_critical_ratio_value():
    assert K.critical_ratio(6) == pytest.approx(1.6, rel=0.05)


def test_critical_ratio_asymptote():
    assert K.critical_ratio(100) == pytest.approx(K.critical_ratio_asymptote(100), rel=0.1)
    assert K.critical_ratio(100) < K.critical_ratio(10) < K.critical_ratio(6)


def test_critical_ratio_from_barrier_slope():
    slope_root = K.critical_ratio_from_slope(6)
    assert slope_root == pytest.approx(K.critical_ratio(6), rel=0.25)
    assert K.barrier_slope(6, 1, slope_root * 0.9) < 0 < K.barrier_slope(6, 1, slope_root * 1.1)


def test_large_kerr_minimum():
    r = K.rate_min_large_kerr(ModelParams(6, 0, 0.01, 1))
    assert r.value == pytest.approx(12 / math.pi * math.exp(-24), rel=1e-12)
    assert r.metadata["Delta_opt"] == pytest.approx(6 + math.hypot(0.01, 1))


def test_large_kerr_exponent_twice_small_detuning():
    p = ModelParams(6, 0.01, 1e-6, 1)
    big = -(K.rate_min_large_kerr(p).log_value - math.log(12 / math.pi))
    small = -(K.rate_small_detuning(p).log_value - math.log(4 * 0.01**2 / p.kappa2_modulus))
    assert big / small == pytest.approx(2, rel=1e-5)


def test_large_kerr_minimum_increases_with_kerr():
    vals = [K.rate_min_large_kerr(ModelParams(6, 0, 0.01, u)).log_value for u in (0.5, 1, 2, 4)]
    assert all(b > a for a, b in zip(vals, vals[1:]))
