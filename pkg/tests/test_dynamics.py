import math

import numpy as np
import pytest

import oracles
from xpmodels.dynamics import (
    flat_chart_coordinates, geodesic_residual, hamiltonian, identity_chart_coordinates,
    integrate_orbit, lightcone_worldline, momentum_branches, period, period_closed_linear,
    segment_t0, signed_area, synthetic_path, turning_points, worldline_chain,
)
from xpmodels.errors import ClassicallyForbiddenError, DomainError, NoOrbitError, UsageError
from xpmodels.models import make_model
from xpmodels.semiclassics import count_states

mp = oracles.mp
TWO_PI = 2 * math.pi


@pytest.fixture(scope="module")
def model_I():
    return make_model("linear", {"alpha": 1.0, "h": TWO_PI})


@pytest.fixture(scope="module")
def orbit_I(model_I):
    return integrate_orbit(model_I, 20.0, periods=3)


# --- momentum and turning points --------------------------------------------------

def test_branches_w_one():
    m = make_model("constant", {"c": 1.0})
    pp, pm = momentum_branches(m, 3.0, 5.0)
    assert pp == pytest.approx((5 + math.sqrt(21)) / 2, rel=1e-15)
    assert pm == pytest.approx((5 - math.sqrt(21)) / 2, rel=1e-15)


def test_branches_at_threshold_and_forbidden():
    m = make_model("linear", {"h": 1.0})
    assert momentum_branches(m, 2.0, 4.0) == (1.0, 1.0)
    with pytest.raises(ClassicallyForbiddenError):
        momentum_branches(m, 2.0, 3.9)


def test_branch_product_is_one(rng):
    m = make_model("berry-keating", {"h": 1.0})
    for x in rng.uniform(0.2, 5.0, 20):
        E = 2 * float(m.w(x)) * rng.uniform(1.0, 4.0) * rng.choice([-1, 1])
        pp, pm = momentum_branches(m, x, E)
        assert pp * pm == pytest.approx(1.0, rel=1e-13)
        assert hamiltonian(m, x, pp) == pytest.approx(E, rel=1e-13)


def test_turning_points_linear(model_I):
    tp = turning_points(model_I, 8 * math.pi)
    assert tp.pinned and tp.x_m == TWO_PI
    assert tp.x_M == pytest.approx(4 * math.pi, rel=1e-14)
    tp = turning_points(model_I, 4 * math.pi)
    assert tp.x_m == tp.x_M == pytest.approx(TWO_PI)


def test_turning_points_berry_keating_product():
    h = 1.3
    m = make_model("berry-keating", {"h": h})
    for E in (5.3, 9.0, 40.0):
        tp = turning_points(m, E)
        assert not tp.pinned
        assert tp.x_m * tp.x_M == pytest.approx(h * h, rel=1e-12)
        assert 2 * m.w(tp.x_m) == pytest.approx(E, rel=1e-13)


def test_turning_points_errors(model_I):
    with pytest.raises(NoOrbitError):
        turning_points(model_I, 10.0)
    with pytest.raises(NoOrbitError):
        turning_points(make_model("constant", {"c": 1.0}), 5.0)


# --- period ---------------------------------------------------------------------------

def test_period_closed_linear_value(model_I):
    assert period(model_I, 8 * math.pi) == pytest.approx(math.acosh(2), rel=1e-12)
    assert period_closed_linear(model_I, 8 * math.pi) == pytest.approx(1.3169578969248166, rel=1e-15)


def test_period_vanishes_at_threshold(model_I):
    assert period(model_I, 4 * math.pi) == 0.0
    assert period(model_I, 4 * math.pi * (1 + 1e-12)) < 1e-5


@pytest.mark.parametrize("E", [13.0, 30.0, 250.0])
def test_period_against_oracles(model_I, E):
    assert period(model_I, E) == pytest.approx(math.acosh(E / (2 * TWO_PI)), rel=1e-10)
    bk = make_model("berry-keating", {"h": 1.0})
    d = mp.sqrt(mp.mpf(E) ** 2 / 16 - 1)
    ref = oracles.period_quad(lambda x: x + 1 / x, mp.mpf(E) / 4 - d, mp.mpf(E) / 4 + d, E)
    assert period(bk, E) == pytest.approx(ref, rel=1e-10)


def test_cosh_period_is_energy_independent():
    m = make_model("cosh", {"w0": 1.0, "mu": 0.5})
    ref = oracles.period_quad(lambda x: mp.cosh(x), 0, mp.acosh(mp.mpf(7) / 2), 7)
    T = [period(m, E) for E in (2.5, 7.0, 50.0)]
    assert T[1] == pytest.approx(ref, rel=1e-10)
    assert np.allclose(T, math.pi / 2, rtol=1e-10)


def test_period_is_time_reversal_even(model_I):
    assert period(model_I, -20.0) == period(model_I, 20.0)


# --- orbit integration ----------------------------------------------------------------

def test_energy_conservation(orbit_I, model_I):
    assert orbit_I.energy_error(model_I) <= 1e-8


def test_bounce_count_and_periodicity(orbit_I):
    T = orbit_I.period
    assert len(orbit_I.bounce_times) == 3
    assert np.allclose(orbit_I.bounce_times, T * np.arange(1, 4), rtol=1e-8)
    xM = 10.0
    for t in np.linspace(0.01, 2 * T - 0.01, 9):
        assert abs(orbit_I.at(t + T)[0] - orbit_I.at(t)[0]) <= 1e-5 * xM


def test_orbit_matches_closed_form(orbit_I, model_I):
    E = orbit_I.energy
    for s in np.unique(orbit_I.segment):
        idx = np.flatnonzero(orbit_I.segment == s)
        t, x, p = orbit_I.t[idx], orbit_I.x[idx], orbit_I.p[idx]
        mid = idx.size // 2
        t0 = segment_t0(model_I, E, t[mid], p[mid])
        u = t - t0
        assert np.allclose(x ** 2, E * np.exp(2 * u) - np.exp(4 * u), rtol=1e-6)
        assert np.allclose(p ** 2, E * np.exp(-2 * u) - 1, rtol=1e-6, atol=1e-9)


def test_sign_of_p_fixed_and_time_reversal(model_I):
    tr = integrate_orbit(model_I, -20.0)
    assert tr.eta == -1 and np.all(tr.p < 0)
    assert tr.period == pytest.approx(period(model_I, 20.0))
    assert np.all(hamiltonian(model_I, tr.x, tr.p) < 0)


def test_bounce_preserves_energy(model_I):
    p = 0.4
    x = model_I.lower
    assert hamiltonian(model_I, x, 1 / p) == pytest.approx(hamiltonian(model_I, x, p), rel=1e-15)


def test_signed_area_orientation(model_I):
    for E in (20.0, -20.0):
        tr = integrate_orbit(model_I, E)
        area = signed_area(model_I, tr)
        assert np.sign(area) == np.sign(E)
        assert abs(area) == pytest.approx(TWO_PI * count_states(model_I, abs(E)), rel=1e-7)


def test_berry_keating_orbit_is_closed():
    m = make_model("berry-keating", {"h": 1.0})
    tr = integrate_orbit(m, 10.0, periods=2)
    assert tr.bounce_times.size == 0
    assert tr.energy_error(m) <= 1e-8
    x0, p0 = tr.at(0.0)
    x1, p1 = tr.at(tr.period)
    assert x1 == pytest.approx(x0, abs=1e-6) and p1 == pytest.approx(p0, abs=1e-6)


def test_constant_model_is_open():
    m = make_model("constant", {"c": 1.0})
    tr = integrate_orbit(m, 5.0)
    assert tr.open and tr.bounce_times.size == 1
    after = tr.segment == 1
    assert np.all(np.diff(tr.x[after]) > 0)
    # outgoing speed c (1 - p_slow^2) on the slow branch
    p_slow = momentum_branches(m, 1.0, 5.0)[1]
    tb = tr.bounce_times[0]
    assert tr.x[-1] == pytest.approx((tr.t[-1] - tb) * (1 - p_slow ** 2), rel=1e-8)


def test_orbit_rejections(model_I):
    with pytest.raises(NoOrbitError):
        integrate_orbit(model_I, 0.0)
    with pytest.raises(DomainError):
        integrate_orbit(model_I, 20.0, samples_per_period=50)


# --- light cone -----------------------------------------------------------------------

def test_worldline_endpoints_on_hyperbola(model_I):
    seg = lightcone_worldline(model_I, 20.0, 0.3)
    for xp, xm in (seg.start, seg.end):
        assert xp * xm == pytest.approx(1.0, rel=1e-14)
        assert seg.residual(xp, xm) == pytest.approx(0.0, abs=1e-14)


def test_worldline_chain_recovers_period(model_I):
    E = 20.0
    chain = worldline_chain(lightcone_worldline(model_I, E, 0.0), 4)
    for a, b in zip(chain, chain[1:]):
        assert b.q == pytest.approx(math.exp(2 * a.epsilon) * a.q, rel=1e-14)
        assert b.start[0] == pytest.approx(a.end[0], rel=1e-13)
    T = 0.5 * math.log(chain[1].q / chain[0].q)
    assert T == pytest.approx(period_closed_linear(model_I, E), rel=1e-13)


def test_worldline_errors(model_I):
    with pytest.raises(NoOrbitError):
        lightcone_worldline(model_I, 4 * math.pi, 0.0)
    with pytest.raises(UsageError):
        lightcone_worldline(make_model("constant", {"c": 1.0}), 5.0, 0.0)


def test_integrated_orbit_is_a_straight_line(orbit_I, model_I):
    E = orbit_I.energy
    worst = 0.0
    for s in np.unique(orbit_I.segment):
        idx = np.flatnonzero(orbit_I.segment == s)
        mid = idx[idx.size // 2]
        seg = lightcone_worldline(model_I, E, segment_t0(model_I, E, orbit_I.t[mid], orbit_I.p[mid]))
        xp, xm = flat_chart_coordinates(model_I, orbit_I.t[idx], orbit_I.x[idx])
        worst = max(worst, float(np.max(np.abs(seg.residual(xp, xm)))))
    assert worst <= 1e-6


def test_identity_chart_coordinates(model_I):
    xp, xm = identity_chart_coordinates(model_I, np.array([0.0, 1.0]), np.array([TWO_PI, 3 * TWO_PI]))
    assert np.allclose(xm, [0.0, math.log(3) - 1.0], rtol=1e-12)


# --- geodesics ------------------------------------------------------------------------

def test_geodesic_residual_model_I(orbit_I, model_I):
    rep = geodesic_residual(model_I, orbit_I)
    assert rep.max_residual <= 1e-5
    assert rep.nodes_used > 500 and rep.nodes_skipped > 0


def test_geodesic_residual_constant_model():
    m = make_model("constant", {"c": 1.0})
    rep = geodesic_residual(m, integrate_orbit(m, 5.0))
    assert rep.max_residual <= 1e-6


def test_geodesic_residual_negative_control(model_I):
    t = np.linspace(0, 3, 2000)
    fake = synthetic_path(model_I, t, 10.0 + np.sin(t))
    assert geodesic_residual(model_I, fake).max_residual > 1e-2
