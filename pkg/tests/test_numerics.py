import math

import numpy as np
import pytest

import oracles
from xpmodels.errors import DomainError, IntegrationError
from xpmodels.numerics import (
    HINTS, Quadrature, RootBracket, bessel_k, bessel_k_log, elliptic_KE, find_root,
    integrate, log_integral, ode_integrate, refine_brackets, scan_brackets,
)


# --- quadrature --------------------------------------------------------------

@pytest.mark.parametrize("f, mf, a, b", [
    (np.sin, lambda x: oracles.mp.sin(x), 0.0, 3.0),
    (lambda x: np.exp(-x * x), lambda x: oracles.mp.exp(-x * x), -2.0, 5.0),
    (lambda x: 1.0 / (1.0 + 25 * x * x), lambda x: 1 / (1 + 25 * x * x), -1.0, 1.0),
])
def test_integrate_smooth(f, mf, a, b):
    val, err = integrate(f, a, b)
    ref = oracles.de_quad(mf, a, b)
    assert abs(val - ref) <= 1e-10 * max(1, abs(ref))
    assert err >= 0


def test_integrate_kink_without_breakpoint():
    # tanh-sinh needs the kink as a breakpoint; the adaptive rule does not
    ref = oracles.de_quad(lambda x: abs(x - 0.3), 0, 0.3) + oracles.de_quad(lambda x: abs(x - 0.3), 0.3, 1)
    val, _ = integrate(lambda x: np.abs(x - 0.3), 0.0, 1.0)
    assert ref == pytest.approx(0.29, abs=1e-15)
    assert val == pytest.approx(ref, abs=1e-12)


def test_inverse_sqrt_hints():
    # int_0^1 cos(x)/sqrt(x) and its mirror image
    ref = oracles.de_quad(lambda x: oracles.mp.cos(x) / oracles.mp.sqrt(x), 0, 1)
    left, _ = integrate(lambda x: np.cos(x) / np.sqrt(x), 0.0, 1.0, hint="inverse-sqrt-left")
    right, _ = integrate(lambda x: np.cos(1 - x) / np.sqrt(1 - x), 0.0, 1.0,
                         hint="inverse-sqrt-right")
    assert left == pytest.approx(ref, abs=1e-11)
    assert right == pytest.approx(ref, abs=1e-11)


def test_infinite_interval_both_maps():
    ref = oracles.de_quad(lambda x: oracles.mp.exp(-x) / (1 + x), 1, oracles.mp.inf)
    f = lambda x: np.exp(-x) / (1 + x)
    rational, _ = integrate(f, 1.0, math.inf)
    tail, _ = integrate(f, 1.0, math.inf, hint="exponential-tail")
    assert rational == pytest.approx(ref, abs=1e-12)
    assert tail == pytest.approx(ref, abs=1e-12)


def test_complex_integrand():
    val, _ = integrate(lambda x: np.exp(1j * x), 0.0, math.pi)
    assert val == pytest.approx(2j, abs=1e-12)


def test_breakpoints_help_jumps():
    f = lambda x: np.where(x < 0.4, 1.0, 3.0)
    val, _ = integrate(f, 0.0, 1.0, points=[0.4])
    assert val == pytest.approx(0.4 + 1.8, abs=1e-12)


def test_quadrature_rejects_bad_input():
    with pytest.raises(DomainError):
        Quadrature(abs_tol=0)
    with pytest.raises(DomainError):
        integrate(np.sin, 0.0, 1.0, hint="bogus")
    with pytest.raises(DomainError):
        integrate(np.sin, 0.0, 1.0, hint="exponential-tail")
    assert "none" in HINTS


# --- Bessel K ----------------------------------------------------------------

def test_bessel_half_order_closed_form():
    assert bessel_k(0.5, 1.0) == pytest.approx(math.sqrt(math.pi / 2) * math.exp(-1), rel=1e-13, abs=0)


@pytest.mark.parametrize("nu", [0.0, 0.3, 2.5, 0.5 - 3j, 0.5 - 25j, -0.5 - 60j, 1.5 + 100j, 0.5 - 200j])
@pytest.mark.parametrize("z", [0.3, 2 * math.pi, 12.0])
def test_bessel_k_matches_mpmath(nu, z):
    mant, scale = bessel_k_log(complex(nu), z)
    ref = oracles.mp.besselk(oracles.mp.mpc(complex(nu).real, complex(nu).imag), z)
    got = oracles.mp.mpc(mant) * oracles.mp.exp(scale)
    assert float(abs(got - ref) / abs(ref)) < 1e-11


def test_bessel_symmetries():
    nu, z = 0.7 - 4.2j, 1.3
    k = bessel_k(nu, z)
    assert bessel_k(-nu, z) == pytest.approx(k, rel=1e-13)
    assert bessel_k(nu.conjugate(), z) == pytest.approx(k.conjugate(), rel=1e-13)


def test_bessel_large_order_decay():
    # |K_{1/2 + i t/2}(2 pi)| ~ sqrt(pi / 2pi) e^{-pi t / 4} times a slowly varying factor;
    # the log-scale route must survive where the plain value underflows.
    t = 60.0
    mant, scale = bessel_k_log(0.5 + 0.5j * t, 2 * math.pi)
    ref = oracles.mp.besselk(oracles.mp.mpc(0.5, t / 2), 2 * math.pi)
    assert abs(mant) * math.exp(scale) == pytest.approx(float(abs(ref)), rel=1e-10)
    mant, scale = bessel_k_log(0.5 - 1000j, 1.0)
    assert np.isfinite(mant) and scale < -1000


def test_bessel_rejects_nonpositive_argument():
    with pytest.raises(DomainError):
        bessel_k(0.5, 0.0)


# --- elliptic and Li ---------------------------------------------------------

@pytest.mark.parametrize("m", [0.0, 1e-8, 0.1, 0.5, 0.9, 0.999999])
def test_elliptic_against_mpmath(m):
    K, E = elliptic_KE(m)
    Kr, Er = oracles.ellip_KE(m)
    assert K == pytest.approx(Kr, rel=1e-14, abs=0)
    assert E == pytest.approx(Er, rel=1e-14, abs=0)


@pytest.mark.parametrize("m", [0.2, 0.5, 0.77])
def test_legendre_relation(m):
    K, E = elliptic_KE(m)
    Kp, Ep = elliptic_KE(1 - m)
    assert E * Kp + Ep * K - K * Kp == pytest.approx(math.pi / 2, abs=1e-14)


def test_elliptic_edges():
    assert elliptic_KE(1.0) == (math.inf, 1.0)
    with pytest.raises(DomainError):
        elliptic_KE(1.5)


@pytest.mark.parametrize("x", [2.0, 2.5, 10.0, 1e3, 1e8])
def test_log_integral(x):
    assert log_integral(x) == pytest.approx(oracles.offset_li(x), rel=1e-12, abs=0)


def test_log_integral_domain():
    with pytest.raises(DomainError):
        log_integral(1.5)


# --- roots -------------------------------------------------------------------

def test_scan_finds_sine_zeros():
    brackets = scan_brackets(np.sin, 1.0, 7.0, lambda e: 0.1)
    roots = [find_root(np.sin, b, tol=1e-13) for b in brackets]
    assert np.allclose(roots, [math.pi, 2 * math.pi], atol=1e-12)


def test_scan_is_invariant_under_grid_phase():
    ref = [math.pi, 2 * math.pi]
    for shift in (0.0, 0.013, 0.041):
        brackets = scan_brackets(np.sin, 1.0 + shift, 7.0, lambda e: 0.07)
        roots = refine_brackets(lambda x: np.sin(x), brackets, tol=1e-13)
        assert np.allclose(roots, ref, atol=1e-11)


def test_bracket_requires_sign_change():
    with pytest.raises(DomainError):
        RootBracket.from_function(np.cos, -1.0, 1.0)
    with pytest.raises(DomainError):
        find_root(np.sin, (1.0, 1.0))


def test_find_root_stays_in_bracket():
    f = lambda x: x ** 3 - 2.0
    r = find_root(f, (0.0, 3.0), tol=1e-12)
    assert r == pytest.approx(2 ** (1 / 3), abs=1e-12)


# --- ODE ---------------------------------------------------------------------

def test_ode_exponential():
    path = ode_integrate(lambda t, y: y, [1.0], 0.0, 2.0, tol=1e-12)
    t, y = path.final
    assert t == 2.0
    assert y[0] == pytest.approx(math.exp(2), rel=1e-10)


def test_ode_backward_and_complex():
    path = ode_integrate(lambda t, y: 1j * y, [1.0 + 0j], 1.0, 0.0, tol=1e-12)
    assert path.final[1][0] == pytest.approx(np.exp(-1j), abs=1e-10)


def test_ode_blowup_reports_last_point():
    with pytest.raises(IntegrationError) as info:
        ode_integrate(lambda t, y: y * y, [1.0], 0.0, 2.0)
    assert info.value.last_t == pytest.approx(1.0, abs=1e-6)
