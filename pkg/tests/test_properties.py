"""Property-based checks of the invariants listed for each module."""
import math

import numpy as np
import pytest
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st

from xpmodels.dynamics import hamiltonian, momentum_branches, period, turning_points
from xpmodels.io import model_from_dict, model_to_dict, read_csv, write_csv
from xpmodels.models import make_model, scalar_curvature, to_symmetric_gauge
from xpmodels.numerics import bessel_k, elliptic_KE, find_root, integrate, scan_brackets
from xpmodels.quantum import (
    SpectrumResult, bound_state, constant_model_scattering, impose_boundary_condition,
    modelI_secular, omega12,
)
from xpmodels.quantum.results import Extension
from xpmodels.riemann import Identification, compare_spectrum, smooth_zero_count
from xpmodels.semiclassics import abel_invert_xp, count_closed, count_closed_derivative, count_states

FAST = settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
SLOW = settings(max_examples=12, deadline=None, suppress_health_check=[HealthCheck.too_slow])

pos = st.floats(0.2, 5.0)


# --- numerics -------------------------------------------------------------------------------

@FAST
@given(a=st.floats(-3, 3), span=st.floats(0.1, 5), k=st.floats(0.1, 4))
def test_quadrature_meets_its_tolerance(a, span, k):
    b = a + span
    val, _ = integrate(lambda x: np.cos(k * x), a, b)
    exact = (math.sin(k * b) - math.sin(k * a)) / k
    assert abs(val - exact) <= max(1e-12, 1e-10 * abs(exact))


@FAST
@given(re=st.floats(-3, 3), im=st.floats(-80, 80), z=st.floats(0.1, 20))
def test_bessel_order_symmetries(re, im, z):
    nu = complex(re, im)
    k = bessel_k(nu, z)
    assume(abs(k) > 0)
    assert abs(bessel_k(-nu, z) - k) <= 1e-12 * abs(k)
    assert abs(bessel_k(nu.conjugate(), z) - k.conjugate()) <= 1e-14 * abs(k)


@FAST
@given(m=st.floats(0.01, 0.99))
def test_legendre_relation(m):
    K, E = elliptic_KE(m)
    Kp, Ep = elliptic_KE(1 - m)
    assert abs(E * Kp + Ep * K - K * Kp - math.pi / 2) <= 1e-10


@FAST
@given(shift=st.floats(0.0, 1.0), step=st.floats(0.05, 0.3))
def test_root_set_independent_of_grid_phase(shift, step):
    f = lambda x: math.sin(x) * (x - 2.5)  # noqa: E731
    lo = 0.5 + shift * step
    roots = [find_root(f, b, tol=1e-12) for b in scan_brackets(f, lo, 10.0, lambda e: step)]
    assert np.allclose(roots, [2.5, math.pi, 2 * math.pi, 3 * math.pi], atol=1e-11)


# --- models ----------------------------------------------------------------------------------

generic_models = st.one_of(
    st.builds(lambda lx, lp: make_model("linear", {"lx": lx, "lp": lp}), pos, pos),
    st.builds(lambda lx, lp: make_model("berry-keating", {"lx": lx, "lp": lp}), pos, pos),
    st.builds(lambda lx, lp: make_model("model-III", {"lx": lx, "lp": lp}), pos, pos),
)


@FAST
@given(m=generic_models)
def test_gauge_map_invariants(m):
    x = np.linspace(m.lower + 0.05, m.lower + 10, 100)
    gmap, img = to_symmetric_gauge(m)
    assert np.allclose(img.w(gmap(x)), m.w(x), rtol=1e-10, atol=0)
    assert np.all(np.diff(gmap(x)) > 0)
    g2, img2 = to_symmetric_gauge(img)
    assert np.allclose(img2.w(g2(gmap(x))), img.w(gmap(x)), rtol=1e-12, atol=0)


@SLOW
@given(m=generic_models)
def test_curvature_is_a_scalar(m):
    gmap, img = to_symmetric_gauge(m)
    x = np.linspace(m.lower + 0.3, m.lower + 6, 15)
    assert np.allclose(scalar_curvature(m, x), scalar_curvature(img, gmap(x)), rtol=1e-8, atol=1e-8)


@FAST
@given(A=pos, a=st.floats(0.1, 4.0), h=st.floats(0.1, 2.0))
def test_power_curvature_law(A, a, h):
    m = make_model("power", {"A": A, "exponent": a, "h": h})
    x = np.linspace(h + 0.01, h + 20, 50)
    assert np.allclose(scalar_curvature(m, x) * x * x, -2 * a * (a - 1), rtol=0, atol=1e-10)


# --- dynamics ------------------------------------------------------------------------------

@FAST
@given(h=pos, x_off=st.floats(0.01, 5), ratio=st.floats(1.0, 10.0), sign=st.sampled_from([-1, 1]))
def test_branches_product_and_energy(h, x_off, ratio, sign):
    m = make_model("berry-keating", {"h": h})
    x = x_off + 0.01
    E = sign * 2 * float(m.w(x)) * ratio
    pp, pm = momentum_branches(m, x, E)
    assert pp * pm == pytest.approx(1.0, rel=1e-12)
    assert hamiltonian(m, x, pp) == pytest.approx(E, rel=1e-12)
    assert hamiltonian(m, x, pm) == pytest.approx(E, rel=1e-12)


@FAST
@given(h=pos, p=st.floats(0.01, 0.99))
def test_bounce_preserves_energy(h, p):
    m = make_model("linear", {"h": h})
    assert hamiltonian(m, h, 1 / p) == pytest.approx(hamiltonian(m, h, p), rel=1e-14)


@SLOW
@given(ratio=st.floats(1.05, 30.0), which=st.sampled_from(["linear", "berry-keating", "cosh", "power"]))
def test_period_count_duality(ratio, which):
    m = {"linear": make_model("linear", {"h": 2 * math.pi}),
         "berry-keating": make_model("berry-keating", {"h": 1.0}),
         "cosh": make_model("cosh", {"w0": 1.0, "mu": 0.5}),
         "power": make_model("power", {"A": 1.0, "exponent": 2.0, "h": 1.0})}[which]
    E = 2 * float(m.w(turning_points(m, 1e9).x_m if which == "berry-keating" else m.lower)) * ratio \
        if which != "berry-keating" else 4.0 * ratio
    d = 1e-4 * E
    fd = (count_states(m, E + d) - count_states(m, E - d)) / (2 * d)
    assert 2 * math.pi * fd == pytest.approx(period(m, E), rel=1e-5)


# --- semiclassics --------------------------------------------------------------------------

@FAST
@given(lx=pos, lp=pos, ratio=st.floats(1.01, 40))
def test_count_gauge_invariance(lx, lp, ratio):
    m = make_model("model-III", {"lx": lx, "lp": lp})
    img = make_model("linear", {"alpha": 1.0, "h": lx * lp})
    E = 2 * lx * lp * ratio
    assert count_states(m, E) == pytest.approx(count_states(img, E), abs=1e-8)


@SLOW
@given(gamma=st.floats(-0.5, 0.5), w0=st.floats(0.5, 5.0))
def test_linear_term_is_invisible(gamma, w0):
    p = {"h": w0}
    n = lambda E: count_closed("linear", E, p)  # noqa: E731
    dn = lambda E: count_closed_derivative("linear", E, p)  # noqa: E731
    w = np.geomspace(1.2 * w0, 10 * w0, 6)
    a = abel_invert_xp(n, w, w0, w0, dn=dn)
    b = abel_invert_xp(lambda E: n(E) + gamma * E, w, w0, w0, dn=lambda E: dn(E) + gamma)
    assert np.max(np.abs(a.x - b.x)) <= 1e-8
    assert a.monotone


# --- quantum -------------------------------------------------------------------------------

@FAST
@given(E=st.floats(0.01, 150.0), theta=st.sampled_from([0.0, math.pi]))
def test_secular_parity(E, theta):
    # even at theta = 0, odd at theta = pi; either way the roots come in +/- pairs
    sign = 1.0 if theta == 0.0 else -1.0
    assert modelI_secular(-E, 2 * math.pi, theta) == pytest.approx(
        sign * modelI_secular(E, 2 * math.pi, theta), rel=1e-12, abs=1e-300)


@FAST
@given(theta=st.floats(-1.5, 1.5), lp=pos)
def test_bound_state_formulas(theta, lp):
    bs = bound_state(lp, theta)
    assert bs.E0 == pytest.approx(2 * lp * math.sin(theta), abs=1e-12)
    assert bs.mean_x == pytest.approx(1 / (2 * lp * math.cos(theta)), rel=1e-12)


@FAST
@given(u=st.floats(0.01, 4.0), eta=st.sampled_from([-1, 1]), theta=st.floats(-1.5, 1.5))
def test_scattering_normalisation(u, eta, theta):
    s = constant_model_scattering(eta * 2 * math.cosh(u), 1.0, theta)
    assert s.normalisation() == pytest.approx(1 / (2 * math.pi), abs=1e-12)


@SLOW
@given(k=st.lists(st.floats(0.5, 3.0), min_size=4, max_size=4), theta=st.floats(0, 2 * math.pi),
       hbar=st.floats(0.3, 3.0))
def test_symmetry_defect_vanishes(k, theta, hbar):
    m = make_model("linear", {"alpha": 1.0, "h": 1.0}, hbar)

    def trial(a, b):
        f = lambda x: np.exp(-a * (x - 1.0)) * (1 + 0.5j * (x - 1.0))  # noqa: E731
        g = lambda x: np.exp(-b * (x - 1.0)) + 0j  # noqa: E731
        return impose_boundary_condition(m, theta, f, g)

    psi1, psi2 = trial(k[0], k[1] + 0.1), trial(k[2], k[3] + 0.2)
    assert abs(omega12(m, psi1, psi2)) <= 1e-10


# --- riemann -------------------------------------------------------------------------------

@FAST
@given(t=st.floats(10.0, 1e4))
def test_smooth_count_derivative(t):
    d = 1e-4 * t
    fd = (smooth_zero_count(t + d) - smooth_zero_count(t - d)) / (2 * d)
    assert fd == pytest.approx(math.log(t / (2 * math.pi)) / (2 * math.pi), abs=1e-8)


@FAST
@given(lam=st.floats(0.1, 10.0), alpha=st.floats(0.5, 3.0))
def test_compare_rescaling(lam, alpha):
    E = np.array([101.3, 104.9, 108.2, 111.7, 115.0])
    base = SpectrumResult(Extension(0.0), alpha * E, np.zeros(5), 1.0)
    scaled = SpectrumResult(Extension(0.0), lam * alpha * E, np.zeros(5), lam)
    a = compare_spectrum(base, ident=Identification(alpha=alpha))
    b = compare_spectrum(scaled, ident=Identification(alpha=alpha, hbar=lam))
    assert np.array_equal(a.n, b.n)
    assert np.allclose(a.t, b.t, rtol=1e-12, atol=0)
    assert np.allclose(a.offset, b.offset, rtol=0, atol=1e-12)


# --- io ------------------------------------------------------------------------------------

@FAST
@given(rows=st.lists(st.tuples(st.floats(allow_nan=False), st.floats(allow_nan=False)),
                     min_size=1, max_size=20))
def test_csv_lossless(rows):
    _, _, arr = read_csv(write_csv(rows, ["a", "b"]))
    assert np.array_equal(arr, np.array(rows, dtype=float))


@FAST
@given(lx=pos, lp=pos, hbar=st.floats(0.1, 3.0))
def test_model_record_round_trip(lx, lp, hbar):
    m = make_model("model-III", {"lx": lx, "lp": lp}, hbar)
    back = model_from_dict(model_to_dict(m))
    assert dict(back.params) == dict(m.params) and back.hbar == m.hbar
