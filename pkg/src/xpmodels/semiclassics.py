"""Semiclassical counting functions and Abel-type inversions.

``n(E)`` is the phase-space area of the orbit in units of 2 pi hbar (no
Maslov phase).  The inversions recover the potential profile x(w), or x(V)
for H = p^2 + V(x), from a prescribed counting function.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import native_turning_points, orbit_integral, period
from .errors import DomainError, NoOrbitError, UsageError
from .models import tabulated_model
from .numerics import Quadrature, elliptic_KE, integrate, log_integral
from .riemann import smooth_zero_count

_COUNT_Q = Quadrature(abs_tol=1e-13, rel_tol=1e-12)
_ABEL_Q = Quadrature(abs_tol=1e-12, rel_tol=1e-11)

CLOSED_KINDS = ("linear", "berry-keating", "harmonic-cosh")


@dataclass(frozen=True)
class CountingCurve:
    E: np.ndarray
    n: np.ndarray
    source: str = "quadrature"
    hbar: float = 1.0

    def __post_init__(self):
        E = np.asarray(self.E, dtype=float)
        n = np.asarray(self.n, dtype=float)
        if E.shape != n.shape or E.ndim != 1:
            raise DomainError("counting curve needs matching 1-d arrays")
        if np.any(np.diff(E) <= 0):
            raise DomainError("counting curve energies must be strictly ascending")
        if np.any(np.diff(n) < -1e-12 * np.maximum(1.0, np.abs(n[1:]))):
            raise DomainError("counting curve must be non-decreasing")
        if np.any(n < -1e-12):
            raise DomainError("counting curve must be non-negative")
        if self.source not in ("quadrature", "closed-form", "external"):
            raise DomainError(f"unknown source {self.source!r}")
        object.__setattr__(self, "E", E)
        object.__setattr__(self, "n", n)


def count_states(m, E, q=None):
    """n(E) = (1 / 2 pi hbar) int dx sqrt(E^2 - 4 U V) / U between the turning points.

    Works in any gauge (in the symmetric one U V = w^2 and U = w).  Negative
    energies use |E|.
    """
    q = q or _COUNT_Q
    a = abs(float(E))
    tp = native_turning_points(m, a)
    if tp.x_M == tp.x_m:
        return 0.0

    def f(x):
        w = m.w(x)
        disc = (a - 2 * w) * (a + 2 * w)
        return np.sqrt(np.maximum(disc, 0.0)) / m.U(x)

    value = orbit_integral(f, tp, q)
    return value / (2 * math.pi * m.hbar)


def density_of_states(m, E):
    """dn/dE = T_E / (2 pi hbar)."""
    return period(m, E) / (2 * math.pi * m.hbar)


def counting_curve(m, energies):
    energies = np.asarray(energies, dtype=float)
    return CountingCurve(energies, np.array([count_states(m, e) for e in energies]),
                         "quadrature", m.hbar)


# -- closed forms ----------------------------------------------------------------------

def _linear_closed(E, alpha, h, hbar):
    w0 = alpha * h
    a = abs(E) / (2 * w0)
    if a < 1:
        raise NoOrbitError(f"|E| below the threshold 2 w0 = {2 * w0}")
    return abs(E) / (2 * math.pi * hbar * alpha) * (math.acosh(a) - math.sqrt(1 - 1 / (a * a)))


def count_closed(kind, E, params, hbar=1.0):
    """Closed-form n(E).

    kind ``linear`` (params ``alpha, h``), ``berry-keating`` (``h``) or
    ``harmonic-cosh`` (``w0, mu``).
    """
    E = abs(float(E))
    if kind == "linear":
        return _linear_closed(E, params.get("alpha", 1.0), params["h"], hbar)
    if kind == "berry-keating":
        h = params["h"]
        if E < 4 * h:
            raise NoOrbitError(f"|E| below the threshold 4h = {4 * h}")
        K, Ek = elliptic_KE(1 - 16 * h * h / (E * E))
        return E / (2 * math.pi * hbar) * (K - Ek)
    if kind == "harmonic-cosh":
        w0, mu = params["w0"], params["mu"]
        if E < 2 * w0:
            raise NoOrbitError(f"|E| below the threshold 2 w0 = {2 * w0}")
        omega = 2 * w0 / (mu * hbar)
        return E / (hbar * omega) - mu
    raise UsageError(f"no closed-form counting function for {kind!r}; "
                     f"choose from {', '.join(CLOSED_KINDS)}")


def count_closed_derivative(kind, E, params, hbar=1.0):
    """dn/dE of :func:`count_closed`."""
    E = abs(float(E))
    if kind == "linear":
        alpha, h = params.get("alpha", 1.0), params["h"]
        return math.acosh(E / (2 * alpha * h)) / (2 * math.pi * hbar * alpha)
    if kind == "berry-keating":
        h = params["h"]
        m = 1 - 16 * h * h / (E * E)
        K, _ = elliptic_KE(m)
        # d/dE [E (K - E)] = K for this parametrisation
        return K / (2 * math.pi * hbar)
    if kind == "harmonic-cosh":
        return params["mu"] / (2 * params["w0"])
    raise UsageError(f"no closed-form counting function for {kind!r}")


def linear_log_count(E, w0, mu, hbar=1.0):
    """Linear-model count plus a constant mu (alpha = 1), and its derivative."""
    return _linear_closed(E, 1.0, w0, hbar) + mu, math.acosh(abs(E) / (2 * w0)) / (2 * math.pi * hbar)


def linear_log_profile(w, w0, mu, hbar=1.0, x0=None):
    """Closed-form x(w) recovered from :func:`linear_log_count`."""
    w = np.asarray(w, dtype=float)
    x0 = w0 if x0 is None else x0
    s = np.sqrt(1 - (w0 / w) ** 2)
    return x0 + w - w0 + mu * hbar * np.log((1 - s) / (1 + s))


# -- inversion ----------------------------------------------------------------------------

@dataclass
class InversionResult:
    """Profile x(w) (family ``xp``) or x(V) (family ``standard``)."""

    w: np.ndarray
    x: np.ndarray
    family: str
    monotone: bool = True
    gamma: float = None
    meta: dict = field(default_factory=dict)

    @property
    def profile(self):
        return np.column_stack([self.w, self.x])


def _derivative(n, step_rule):
    def dn(E):
        h = step_rule(E)
        try:
            return (n(E + h) - n(E - h)) / (2 * h)
        except (NoOrbitError, DomainError):
            # one-sided near the threshold
            return (-3 * n(E) + 4 * n(E + h) - n(E + 2 * h)) / (2 * h)

    return dn


def abel_invert_xp(n, w_grid, w0, x0, hbar=1.0, dn=None, q=None):
    """Invert n(E) for H = w(x)(p + 1/p) with x(w0) = x0.

    ``x(w) - x0 = 2 hbar w int_{w0}^{w} g(E) / sqrt(w^2 - E^2) dE`` with
    ``g(E) = 2 n'(2E) - n(2E)/E``.  The substitution ``E = w sin(phi)`` removes
    the inverse-sqrt endpoint.  Without ``dn`` the derivative is a central
    difference with step ``max(1e-4, 1e-6 E)``.  Terms linear in E do not
    affect the result.
    """
    q = q or _ABEL_Q
    w_grid = np.asarray(w_grid, dtype=float)
    if w_grid.ndim != 1 or w_grid.size == 0:
        raise DomainError("w_grid must be a non-empty 1-d array")
    if np.any(np.diff(w_grid) <= 0) or w_grid[0] < w0 * (1 - 1e-14):
        raise DomainError("w_grid must be ascending and start at or above w0")
    dn = dn or _derivative(n, lambda E: max(1e-4, 1e-6 * E))

    def g(E):
        return 2.0 * dn(2.0 * E) - n(2.0 * E) / E

    def g_vec(E):
        return np.array([g(e) for e in np.atleast_1d(E)])

    xs = np.empty_like(w_grid)
    for i, w in enumerate(w_grid):
        if w <= w0:
            xs[i] = x0
            continue
        phi0 = math.asin(w0 / w)
        val, _ = integrate(lambda phi: g_vec(w * np.sin(phi)), phi0, 0.5 * math.pi, q,
                           hint="inverse-sqrt-left")
        xs[i] = x0 + 2.0 * hbar * w * val
    monotone = bool(np.all(np.diff(xs) > 0))
    return InversionResult(w_grid, xs, "xp", monotone, meta={"w0": w0, "x0": x0, "hbar": hbar})


def recover_linear_term(n, result, energies, hbar=1.0):
    """Fit the slope gamma lost by the xp inversion.

    The recovered profile is turned back into a model (monotone PCHIP of w
    against x), its count is computed by quadrature and ``n(E) - n_rec(E)`` is
    fitted to ``gamma * E`` by least squares.
    """
    if result.family != "xp":
        raise UsageError("linear-term recovery applies to the xp family")
    if not result.monotone:
        raise DomainError("cannot rebuild a model from a non-monotone profile")
    model = tabulated_model(result.x, result.w, hbar)
    E = np.asarray(energies, dtype=float)
    if np.any(E > 2 * result.w[-1]) or np.any(E <= 2 * result.w[0]):
        raise DomainError("energies must lie within (2 w_min, 2 w_max] of the profile")
    diff = np.array([n(e) - count_states(model, e) for e in E])
    gamma = float(np.dot(E, diff) / np.dot(E, E))
    result.gamma = gamma
    return gamma


def abel_invert_standard(n, V_grid, V0=0.0, hbar=1.0, dn=None, q=None):
    """Invert n(E) for H = p^2 + V(x): x(V) = hbar int_{V0}^{V} n'(E) / sqrt(V - E) dE.

    Uses ``E = V0 + (V - V0) sin^2(phi)``.
    """
    q = q or _ABEL_Q
    V_grid = np.asarray(V_grid, dtype=float)
    if np.any(np.diff(V_grid) <= 0) or V_grid[0] < V0:
        raise DomainError("V_grid must be ascending and start at or above V0")
    dn = dn or _derivative(n, lambda E: max(1e-4, 1e-6 * E))

    def dn_vec(E):
        return np.array([dn(e) for e in np.atleast_1d(E)])

    xs = np.empty_like(V_grid)
    for i, V in enumerate(V_grid):
        span = V - V0
        if span <= 0:
            xs[i] = 0.0
            continue
        val, _ = integrate(
            lambda phi: dn_vec(V0 + span * np.sin(phi) ** 2) * 2 * math.sqrt(span) * np.sin(phi),
            0.0, 0.5 * math.pi, q)
        xs[i] = hbar * val
    monotone = bool(np.all(np.diff(xs) > 0))
    return InversionResult(V_grid, xs, "standard", monotone, meta={"V0": V0, "hbar": hbar})


# built-in targets: (n, dn, V0)
def wu_sprung_profile(V):
    """(sqrt(V) / pi) log(2 V / (pi e^2))."""
    V = np.asarray(V, dtype=float)
    safe = np.where(V > 0, V, 1.0)
    # sqrt(V) log V -> 0 at V = 0
    return np.where(V > 0, np.sqrt(safe) / math.pi * np.log(2 * safe / (math.pi * math.e**2)), 0.0)


STANDARD_PROFILES = {
    "wu-sprung": (smooth_zero_count, lambda E: math.log(E / (2 * math.pi)) / (2 * math.pi), 0.0),
    "mussardo": (log_integral, lambda E: 1.0 / math.log(E), 2.0),
}


def builtin_standard(name, V_grid, hbar=1.0):
    if name not in STANDARD_PROFILES:
        raise UsageError(f"unknown profile {name!r}")
    n, dn, V0 = STANDARD_PROFILES[name]
    return abel_invert_standard(n, V_grid, V0, hbar, dn)


def geometric_grid(lo, hi, per_decade=200):
    """Geometric grid from lo to hi with ``per_decade`` points per decade."""
    if not 0 < lo < hi:
        raise DomainError("geometric grid needs 0 < lo < hi")
    k = max(2, int(math.ceil(per_decade * math.log10(hi / lo))) + 1)
    return np.geomspace(lo, hi, k)


# -- power-law scaling ----------------------------------------------------------------------

@dataclass(frozen=True)
class ScalingFit:
    slope: float
    intercept: float
    rms_residual: float
    flagged: bool
    expected: float


def power_law_scaling(m, E_range, n_points=20, threshold=0.02):
    """Log-log least-squares slope of n(E) over ``E_range`` for a power model.

    The expected slope is 1/exponent for exponent < 1 and 1 for exponent > 1;
    ``flagged`` marks an rms log residual above ``threshold``.
    """
    if m.kind != "power":
        raise UsageError("power_law_scaling needs a power model")
    a = m.params["exponent"]
    if a == 1:
        raise DomainError("exponent 1 is the linear model; use kind=linear")
    lo, hi = E_range
    E = np.geomspace(lo, hi, n_points)
    n = np.array([count_states(m, e) for e in E])
    if np.any(n <= 0):
        raise DomainError("E_range must lie above the threshold")
    coef, res, *_ = np.polyfit(np.log(E), np.log(n), 1, full=True)
    rms = math.sqrt(float(res[0]) / n_points) if len(res) else 0.0
    return ScalingFit(float(coef[0]), float(coef[1]), rms, rms > threshold, 1 / a if a < 1 else 1.0)
