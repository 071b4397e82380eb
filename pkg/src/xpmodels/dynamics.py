"""Classical motion for H = w(x) (p + 1/p): momentum branches, turning
points, Hamilton integration with wall bounces, periods and geodesic checks."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ClassicallyForbiddenError, DomainError, NoOrbitError, UsageError
from .models import to_p_gauge, to_symmetric_gauge
from .numerics import Quadrature, find_root, integrate, ode_integrate

_PERIOD_Q = Quadrature(abs_tol=1e-14, rel_tol=1e-12)


def _symmetric(m):
    return m if m.is_symmetric else to_symmetric_gauge(m)[1]


def hamiltonian(m, x, p):
    return m.w(x) * (p + 1.0 / p)


def momentum_branches(m, x, E):
    """Both momenta on the energy shell at ``x``; their product is 1.

    Raises ClassicallyForbiddenError when ``|E| < 2 w(x)``.
    """
    m = _symmetric(m)
    w = float(m.w(x))
    disc = E * E - 4.0 * w * w
    if disc < 0:
        if disc > -1e-14 * E * E:
            disc = 0.0
        else:
            raise ClassicallyForbiddenError(f"|E| = {abs(E)} < 2 w(x) = {2 * w} at x = {x}")
    root = math.sqrt(disc)
    return (E + root) / (2.0 * w), (E - root) / (2.0 * w)


# -- turning points --------------------------------------------------------------

@dataclass(frozen=True)
class TurningPoints:
    x_m: float
    x_M: float
    pinned: bool = False  # x_m sits on the domain boundary

    def __post_init__(self):
        if not self.x_m <= self.x_M:
            raise DomainError("turning points need x_m <= x_M")


def _w_at_lower(m):
    with np.errstate(divide="ignore", invalid="ignore"):
        w = float(m.w(m.lower))
    return w if math.isfinite(w) and w > 0 else math.inf


def _w_minimum(m):
    """(x*, w(x*)) for unimodal or increasing w; x* = lower when w increases there."""
    lower = m.lower
    eps = 1e-9 * max(1.0, abs(lower))
    w_low = _w_at_lower(m)
    x_probe = lower + eps
    if math.isfinite(w_low) and float(m.dw(x_probe)) >= 0:
        return lower, w_low
    if math.isfinite(w_low) and float(m.dw(x_probe)) < 0 or not math.isfinite(w_low):
        hi = lower + 1.0
        while float(m.dw(hi)) < 0:
            hi = lower + 2.0 * (hi - lower)
            if hi > min(m.upper, 1e200):
                raise UsageError("w is decreasing on the whole domain; no bounded orbits")
        x_star = find_root(lambda t: float(m.dw(t)), (x_probe, hi), tol=1e-13 * max(1.0, hi))
        return x_star, float(m.w(x_star))
    return lower, w_low


def turning_points(m, E):
    """Solutions of 2 w(x) = |E| bounding the orbit.

    ``x_m`` is pinned to the lower end of the domain when ``2 w(lower) <= |E|``.

    Raises
    ------
    NoOrbitError
        If ``|E|`` is below the classical minimum ``2 min w`` or if w never
        reaches ``|E|/2`` (open orbit).
    """
    return native_turning_points(_symmetric(m), E)


def native_turning_points(m, E):
    """Turning points in the model's own coordinate (any gauge; w = sqrt(U V))."""
    target = 0.5 * abs(E)
    x_star, w_min = _w_minimum(m)
    if target < w_min * (1 - 1e-15):
        raise NoOrbitError(f"|E| = {abs(E)} is below the classical minimum {2 * w_min}")
    if target <= w_min:
        return TurningPoints(x_star, x_star, x_star == m.lower)
    g = lambda t: float(m.w(t)) - target  # noqa: E731
    # outer turning point
    step = max(1.0, abs(x_star))
    hi = x_star + step
    while g(hi) < 0:
        step *= 2.0
        hi = x_star + step
        if hi > min(m.upper, 1e200) or step > 1e200:
            if not math.isinf(m.upper) and g(m.upper) < 0:
                raise NoOrbitError("orbit leaves the tabulated domain")
            if math.isinf(m.upper):
                raise NoOrbitError(f"w never reaches |E|/2 = {target}: the orbit is open")
            hi = m.upper
            break
    x_M = find_root(g, (x_star, hi), tol=1e-14 * max(1.0, hi))
    w_low = _w_at_lower(m)
    if x_star == m.lower or w_low <= target:
        return TurningPoints(m.lower, x_M, True)
    lo = m.lower + 1e-300 if m.lower == 0 else m.lower
    probe = x_star
    # walk toward the boundary until w exceeds the target
    while g(probe) < 0:
        probe = m.lower + 0.5 * (probe - m.lower)
        if probe - m.lower < 1e-300:
            return TurningPoints(m.lower, x_M, True)
    lo = probe
    x_m = find_root(g, (lo, x_star), tol=1e-15 * max(1.0, x_star))
    return TurningPoints(x_m, x_M, False)


# -- period -------------------------------------------------------------------------

def orbit_integral(f, tp, q):
    """Integrate ``f`` between turning points with inverse-sqrt endpoints.

    A pinned lower end is regular and integrated without substitution, which
    keeps x accurate where integrands peak at the wall.
    """
    if not tp.pinned:
        return integrate(f, tp.x_m, tp.x_M, q, hint="inverse-sqrt-both")[0]
    mid = 0.5 * (tp.x_m + tp.x_M)
    half_q = Quadrature(q.abs_tol / 2, q.rel_tol, q.max_subdivisions)
    left = integrate(f, tp.x_m, mid, half_q)[0]
    return left + integrate(f, mid, tp.x_M, half_q, hint="inverse-sqrt-right")[0]


def period(m, E, q=None):
    """T_E = int_{x_m}^{x_M} dx |E| / (w sqrt(E^2 - 4 w^2)).

    Inverse-sqrt endpoints are removed by substitution; the lower end is
    regular when it is pinned to the wall.
    """
    m = _symmetric(m)
    q = q or _PERIOD_Q
    a = abs(E)
    tp = turning_points(m, E)
    gap = tp.x_M - tp.x_m
    if gap < 1e-9 * max(1.0, abs(tp.x_M)):
        # orbits this close to the threshold are too short to resolve in
        # floating point; use the leading small-orbit behaviour instead
        if tp.pinned:
            return 2.0 * math.sqrt(gap / (a * float(m.dw(tp.x_M)))) if gap > 0 else 0.0
        w, _, d2w = m.derivatives(np.asarray(0.5 * (tp.x_m + tp.x_M)))
        return math.pi / math.sqrt(float(w) * float(d2w))

    def f(x):
        w = m.w(x)
        disc = (a - 2 * w) * (a + 2 * w)
        with np.errstate(divide="ignore"):
            out = a / (w * np.sqrt(np.maximum(disc, 0.0)))
        # nodes that round onto a turning point carry no weight
        return np.where(np.isfinite(out), out, 0.0)

    # w evaluated a distance d from a turning point has relative accuracy
    # eps |x_M| / d, which caps the attainable accuracy of short orbits
    floor = math.sqrt(np.finfo(float).eps * max(1.0, abs(tp.x_M)) / gap)
    if floor > q.rel_tol:
        q = Quadrature(q.abs_tol, min(floor, 1e-6), q.max_subdivisions)
    value = orbit_integral(f, tp, q)
    return value


def period_closed_linear(m, E):
    """Closed form (1/alpha) acosh(E / 2 w0) for the linear kind."""
    if m.kind != "linear" or not m.is_symmetric:
        raise UsageError("closed-form period needs a symmetric linear model")
    a, h = m.params["alpha"], m.params["h"]
    ratio = abs(E) / (2 * a * h)
    if ratio < 1:
        raise NoOrbitError("energy below 2 w0")
    return math.acosh(ratio) / a


# -- orbit integration -------------------------------------------------------------

@dataclass
class Trajectory:
    """Samples (t, x, p) of an orbit with energy ``energy`` and momentum sign ``eta``.

    ``segment`` labels the smooth pieces between wall bounces.  ``dense`` holds
    the ODE interpolants ``(t_start, t_end, sol)`` of each piece when the
    trajectory came from integration.
    """

    t: np.ndarray
    x: np.ndarray
    p: np.ndarray
    energy: float
    eta: int
    bounce_times: np.ndarray
    segment: np.ndarray
    period: float = None
    open: bool = False
    dense: list = field(default_factory=list, repr=False)

    @property
    def samples(self):
        return np.column_stack([self.t, self.x, self.p])

    def energy_error(self, m):
        """max |H(x, p) - E| / |E| over the samples."""
        H = hamiltonian(_symmetric(m), self.x, self.p)
        return float(np.max(np.abs(H - self.energy)) / abs(self.energy))

    def at(self, t):
        """(x, p) from the dense interpolant at time ``t``."""
        for t0, t1, sol in self.dense:
            if t0 <= t <= t1:
                y = sol(t)
                return float(y[0]), float(y[1])
        raise DomainError(f"t = {t} outside the integrated range")


def _field(m):
    def rhs(t, y):
        x, p = y
        w, dw, _ = m.derivatives(np.asarray(x))
        return [w * (1.0 - 1.0 / (p * p)), -dw * (p + 1.0 / p)]

    return rhs


def integrate_orbit(m, E, periods=1, samples_per_period=400, tol=1e-11):
    """Integrate Hamilton's equations for ``periods`` periods.

    Wall models start at the boundary on the fast branch (|p| > 1); when x
    returns to the boundary with |p| < 1 the momentum jumps to 1/p.  Models
    without a wall start at the inner turning point with p = sign(E).  For
    the constant model no bounded orbit exists: the particle is sent once
    into the wall and out again and the trajectory is flagged ``open``.
    Generic-gauge models are first mapped to the symmetric gauge.
    """
    m = _symmetric(m)
    if E == 0:
        raise NoOrbitError("E = 0 has no classical orbit")
    if periods < 1:
        raise DomainError("periods must be at least 1")
    if samples_per_period < 200:
        raise DomainError("samples_per_period must be at least 200")
    eta = 1 if E > 0 else -1
    rhs = _field(m)
    lower = m.lower
    if m.kind == "constant":
        c = m.params["c"]
        if abs(E) < 2 * c:
            raise NoOrbitError(f"|E| < 2c = {2 * c}")
        x0 = lower + 1.0
        p_slow = momentum_branches(m, x0, E)[1 if eta > 0 else 0]
        t_wall = 1.0 / abs(c * (1 - 1 / p_slow**2)) if abs(p_slow) != 1 else math.inf
        t_end = 2.0 * t_wall * periods
        y0, T, closed = (x0, p_slow), None, False
    else:
        tp = turning_points(m, E)
        T = period(m, E)
        t_end = T * periods
        if tp.pinned:
            p_pl, p_mi = momentum_branches(m, lower, E)
            y0 = (lower, p_pl if eta > 0 else p_mi)
        else:
            y0 = (tp.x_m, float(eta))
        closed = True
    if not t_end > 0:
        raise NoOrbitError("degenerate orbit with zero period")

    def hit_wall(t, y):
        return y[0] - lower

    hit_wall.terminal = True
    hit_wall.direction = -1
    n = int(math.ceil(samples_per_period * (t_end / T if T else periods))) + 1
    grid = np.linspace(0.0, t_end, n)
    ts, xs, ps, seg, dense, bounces = [], [], [], [], [], []
    t0, y, k = 0.0, np.array(y0, dtype=float), 0
    while t0 < t_end:
        path = ode_integrate(rhs, y, t0, t_end, tol, dense=True,
                             events=hit_wall if math.isfinite(lower) else None)
        t1 = path.t[-1]
        sel = grid[(grid >= t0) & (grid <= t1)]
        if sel.size == 0 or sel[0] > t0:
            sel = np.concatenate([[t0], sel])
        if sel[-1] < t1:
            sel = np.concatenate([sel, [t1]])
        Y = path.sol(sel)
        if path.terminated:
            Y[0, -1] = lower
        ts.append(sel), xs.append(Y[0]), ps.append(Y[1]), seg.append(np.full(sel.size, k))
        dense.append((t0, t1, path.sol))
        if not path.terminated:
            break
        p_low = Y[1, -1]
        bounces.append(t1)
        t0, y, k = t1, np.array([lower, 1.0 / p_low]), k + 1
        if m.kind == "constant":
            # after the bounce the particle escapes; run to the end and stop
            continue
    return Trajectory(np.concatenate(ts), np.concatenate(xs), np.concatenate(ps), float(E), eta,
                      np.array(bounces), np.concatenate(seg), T, not closed, dense)


def signed_area(m, traj, t_span=None):
    """int p dx = int p xdot dt along the trajectory (one period by default).

    Positive for clockwise motion (E > 0) and equal to 2 pi hbar n(E) in
    magnitude for a closed orbit.
    """
    m = _symmetric(m)
    t_lo, t_hi = (0.0, traj.period) if t_span is None else t_span
    total = 0.0
    for a, b, sol in traj.dense:
        lo, hi = max(a, t_lo), min(b, t_hi)
        if hi <= lo:
            continue

        def f(t, sol=sol):
            x, p = sol(t)
            return p * m.w(x) * (1.0 - 1.0 / (p * p))

        val, _ = integrate(f, lo, hi, Quadrature(1e-12, 1e-10))
        total += val
    return total


# -- light-cone picture -----------------------------------------------------------------

@dataclass(frozen=True)
class WorldlineSegment:
    """Straight line a_plus x+ + a_minus x- = rhs between boundary points B -> A."""

    a_plus: float
    a_minus: float
    rhs: float
    q: float
    epsilon: float
    start: tuple
    end: tuple
    alpha: float = 1.0

    def residual(self, xp, xm):
        return (self.a_plus * np.asarray(xp) + self.a_minus * np.asarray(xm) - self.rhs) / self.rhs

    def next(self):
        """Segment after the bounce: q -> exp(2 epsilon) q."""
        return _segment(self.q * math.exp(2 * self.epsilon), self.rhs, self.epsilon, self.alpha)


def _segment(q, rhs, eps, alpha):
    qa = q**alpha
    start = (qa * math.exp(-alpha * eps), 1.0 / (qa * math.exp(-alpha * eps)))
    end = (qa * math.exp(alpha * eps), 1.0 / (qa * math.exp(alpha * eps)))
    return WorldlineSegment(1.0 / qa, qa, rhs, q, eps, start, end, alpha)


def lightcone_worldline(m, E, t0):
    """Straight worldline of the linear model in the flat chart.

    Coefficients ``(q**-alpha, q**alpha, E/w0)`` with ``q = exp(2 t0) h**(1/alpha)``;
    the segment starts and ends on the hyperbola x+ x- = 1 at
    ``x+ = q**alpha exp(-+ alpha eps)`` with ``cosh(alpha eps) = E / 2 w0``.
    """
    m = _symmetric(m)
    if m.kind != "linear":
        raise UsageError("straight worldlines are available for the linear model only")
    a, h = m.params["alpha"], m.params["h"]
    w0 = a * h
    if not E > 2 * w0:
        raise NoOrbitError(f"E must exceed 2 w0 = {2 * w0}")
    eps = math.acosh(E / (2 * w0)) / a
    q = math.exp(2 * t0) * h ** (1.0 / a)
    return _segment(q, E / w0, eps, a)


def worldline_chain(seg, n):
    """``n`` consecutive segments generated by the bounce rule q_n = exp(2 eps) q_{n-1}."""
    out = [seg]
    for _ in range(n - 1):
        out.append(out[-1].next())
    return out


def flat_chart_coordinates(m, t, x):
    """(x+, x-) of the flat linear chart: x+ = exp(2 alpha t), x- = (x/h)^2 / x+."""
    a, h = m.params["alpha"], m.params["h"]
    xp = np.exp(2 * a * np.asarray(t))
    return xp, (np.asarray(x) / h) ** 2 / xp


def segment_t0(m, E, t, p):
    """Instant where x = p for the linear-model segment through (t, p)."""
    a = m.params["alpha"]
    return t + math.log((p * p + 1.0) * a / E) / (2 * a)


def identity_chart_coordinates(m, t, x):
    """(x+, x-) with f = g = identity: x+ = t, x- = int_lower^x dy/w - t."""
    m = _symmetric(m)
    pmap, _ = to_p_gauge(m)
    return np.asarray(t, dtype=float), pmap.forward(x) - np.asarray(t, dtype=float)


# -- geodesic check -------------------------------------------------------------------------

@dataclass(frozen=True)
class GeodesicReport:
    max_residual: float
    nodes_used: int
    nodes_skipped: int


def geodesic_residual(m, traj, max_velocity_ratio=0.99, step=None):
    """Residual of d2x+/ds2 + 2 w'(x) (dx+/ds)^2 = 0 along the identity chart.

    With dx+/ds = sigma = (1/2w)(1 - xdot/w)^(-1/2) and x+ = t, the residual
    divided by sigma^2 is ``d log(sigma)/dt + 2 w'(x)``.  The time derivative
    is a five-point difference on the dense interpolant when available,
    otherwise ``np.gradient`` on the samples.  Nodes with
    ``|xdot/w| >= max_velocity_ratio`` or whose stencil crosses a bounce are
    skipped.
    """
    m = _symmetric(m)
    if step is None:
        span = traj.period if traj.period else traj.t[-1] - traj.t[0]
        step = 5e-5 * span

    def log_sigma(x, p):
        w = m.w(x)
        xdot = w * (1.0 - 1.0 / (p * p))
        return -np.log(2 * w) - 0.5 * np.log(1.0 - xdot / w), xdot / w

    worst, used, skipped = 0.0, 0, 0
    if traj.dense:
        for a, b, sol in traj.dense:
            nodes = traj.t[(traj.t > a + 2 * step) & (traj.t < b - 2 * step)]
            skipped += int(np.sum((traj.t >= a) & (traj.t <= b))) - nodes.size
            if nodes.size == 0:
                continue
            vals = [log_sigma(*sol(nodes + k * step))[0] for k in (-2, -1, 1, 2)]
            dls = (vals[0] - 8 * vals[1] + 8 * vals[2] - vals[3]) / (12 * step)
            x, p = sol(nodes)
            ratio = log_sigma(x, p)[1]
            ok = np.abs(ratio) < max_velocity_ratio
            res = np.abs(dls + 2 * m.dw(x))[ok]
            skipped += int(np.sum(~ok))
            used += res.size
            if res.size:
                worst = max(worst, float(res.max()))
    else:
        for s in np.unique(traj.segment):
            idx = np.flatnonzero(traj.segment == s)
            if idx.size < 5:
                skipped += idx.size
                continue
            t, x, p = traj.t[idx], traj.x[idx], traj.p[idx]
            ls, ratio = log_sigma(x, p)
            dls = np.gradient(ls, t, edge_order=2)
            ok = np.abs(ratio) < max_velocity_ratio
            ok[[0, -1]] = False
            res = np.abs(dls + 2 * m.dw(x))[ok]
            skipped += int(np.sum(~ok))
            used += res.size
            if res.size:
                worst = max(worst, float(res.max()))
    return GeodesicReport(worst, used, skipped)


def synthetic_path(m, t, x, eta=1):
    """Trajectory object for an arbitrary path x(t), with p from the
    Lagrangian relation p = eta sqrt(w / (w - xdot)); used as a negative control."""
    m = _symmetric(m)
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    xdot = np.gradient(x, t, edge_order=2)
    w = m.w(x)
    p = eta * np.sqrt(w / (w - xdot))
    E = float(np.mean(hamiltonian(m, x, p)))
    return Trajectory(t, x, p, E, eta, np.array([]), np.zeros(t.size, dtype=int), None, True, [])
