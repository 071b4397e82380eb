"""Model presentations H = U(x) p + V(x)/p, gauge maps and scalar curvature.

A model is stored through its two positive functions U = u**2 and V = v**2
on a half line.  In the symmetric gauge U = V = w and the scalar
w = u v is the only data; catalog kinds there carry analytic derivatives of w.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import MappingProxyType

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import (ConvergenceError, DivergentMapError, DomainError, UsageError,
                     UnsupportedModelError)
from .numerics import Quadrature, find_root, integrate

KINDS = ("linear", "berry-keating", "model-III", "constant", "cosh", "linear-log", "power")
GAUGES = ("symmetric", "generic", "p-gauge")

# documented parameter sets per kind; first entry is the symmetric form
PARAM_SETS = {
    "linear": [("alpha", "h"), ("h",), ("lx", "lp")],
    "berry-keating": [("h",), ("lx", "lp")],
    "model-III": [("lx", "lp")],
    "constant": [("c",)],
    "cosh": [("w0", "mu")],
    "linear-log": [("alpha", "beta", "h")],
    "power": [("A", "exponent", "h"), ("A", "exponent")],
}

_MAP_Q = Quadrature(abs_tol=1e-14, rel_tol=1e-13)


@dataclass(frozen=True)
class DomainInterval:
    lower: float
    upper: float = math.inf

    def __post_init__(self):
        if not self.lower < self.upper:
            raise DomainError(f"domain needs lower < upper, got ({self.lower}, {self.upper})")

    def contains(self, x):
        x = np.asarray(x, dtype=float)
        return (x > self.lower) & (x < self.upper) if math.isinf(self.upper) else \
            (x > self.lower) & (x <= self.upper)


@dataclass(frozen=True, eq=False)
class XpModel:
    """One presentation of an xp model.

    Attributes
    ----------
    kind : str
        Catalog tag (see :data:`KINDS`), ``"tabulated"`` or ``"mapped"``.
    params : mapping
        Read-only parameter record.
    gauge : str
        ``"symmetric"`` (U = V = w) or ``"generic"``.
    domain : DomainInterval
    hbar : float
    """

    kind: str
    params: MappingProxyType
    gauge: str
    domain: DomainInterval
    hbar: float
    _U: object = field(repr=False)
    _V: object = field(repr=False)
    _wd: object = field(default=None, repr=False)  # x -> (w, w', w'') when analytic
    data: tuple = field(default=None, repr=False)

    # -- gauge functions -------------------------------------------------
    def U(self, x):
        return self._U(np.asarray(x, dtype=float))

    def V(self, x):
        return self._V(np.asarray(x, dtype=float))

    def u(self, x):
        return np.sqrt(self.U(x))

    def v(self, x):
        return np.sqrt(self.V(x))

    def w(self, x):
        x = np.asarray(x, dtype=float)
        if self._wd is not None:
            return self._wd(x)[0]
        if self.gauge == "symmetric":
            return self._U(x)
        return np.sqrt(self._U(x) * self._V(x))

    def ratio(self, x):
        """v/u, the density of the map to the symmetric gauge."""
        if self.gauge == "symmetric":
            return np.ones_like(np.asarray(x, dtype=float))
        return np.sqrt(self.V(x) / self.U(x))

    def dw(self, x):
        return self.derivatives(x)[1]

    def d2w(self, x):
        return self.derivatives(x)[2]

    def derivatives(self, x):
        """(w, w', w'') with respect to the model's own coordinate."""
        x = np.asarray(x, dtype=float)
        if self._wd is not None:
            return self._wd(x)
        w = self.w(x)
        d1, d2, _ = _fd_pair(self.w, x, self.domain)
        if x.ndim == 0:
            d1, d2 = d1[0], d2[0]
        return w, d1, d2

    @property
    def lower(self):
        return self.domain.lower

    @property
    def upper(self):
        return self.domain.upper

    @property
    def is_symmetric(self):
        return self.gauge == "symmetric"

    def check(self, x):
        x = np.asarray(x, dtype=float)
        if not np.all(self.domain.contains(x)):
            raise DomainError(f"x outside domain ({self.lower}, {self.upper})")
        return x

    def __repr__(self):
        p = ", ".join(f"{k}={v!r}" for k, v in self.params.items())
        return f"XpModel({self.kind}, {p}, gauge={self.gauge}, hbar={self.hbar!r})"


# -- construction ------------------------------------------------------------

def _positive(name, value):
    value = float(value)
    if not (value > 0 and math.isfinite(value)):
        raise DomainError(f"parameter {name} must be positive and finite, got {value}")
    return value


def _pick_set(kind, params):
    keys = set(params)
    for allowed in PARAM_SETS[kind]:
        if keys == set(allowed):
            return allowed
    options = " | ".join("{" + ", ".join(s) + "}" for s in PARAM_SETS[kind])
    raise UsageError(f"kind {kind!r} takes parameters {options}; got {sorted(keys)}")


def _symmetric(kind, params, lower, hbar, wd):
    return XpModel(kind, MappingProxyType(dict(params)), "symmetric", DomainInterval(lower),
                   hbar, lambda x: wd(x)[0], lambda x: wd(x)[0], wd)


def make_model(kind, params, hbar=1.0):
    """Build a validated catalog model.

    Parameters
    ----------
    kind : str
        One of :data:`KINDS`.
    params : dict
        Parameters for that kind.  ``linear`` and ``berry-keating`` accept
        either their symmetric form (``alpha, h`` resp. ``h``) or the generic
        two-scale form ``lx, lp``.
    hbar : float

    Examples
    --------
    >>> m = make_model("linear", {"alpha": 1.0, "h": 2 * math.pi})
    >>> float(m.w(7.0))
    7.0
    """
    if kind not in KINDS:
        raise UsageError(f"unknown model kind {kind!r}; choose from {', '.join(KINDS)}")
    hbar = _positive("hbar", hbar)
    params = {k: float(v) for k, v in params.items()}
    keys = _pick_set(kind, params)
    if kind == "linear" and keys == ("h",):
        params = {"alpha": 1.0, "h": params["h"]}
        keys = ("alpha", "h")
    if kind == "power" and keys == ("A", "exponent"):
        params = {**params, "h": 1.0}
    for k in params:
        if not (kind == "linear-log" and k == "beta"):
            _positive(k, params[k])
    p = params

    if kind == "linear" and "alpha" in p:
        a = p["alpha"]
        return _symmetric(kind, p, p["h"], hbar,
                          lambda x: (a * x, np.full_like(x, a), np.zeros_like(x)))
    if "lx" in p:
        lx, lp = p["lx"], p["lp"]
        if kind == "linear":
            U = lambda x: x  # noqa: E731
            V = lambda x: lp * lp * x  # noqa: E731
            wd = lambda x: (lp * x, np.full_like(x, lp), np.zeros_like(x))  # noqa: E731
            lower = lx
        elif kind == "berry-keating":
            U = lambda x: x + lx * lx / x  # noqa: E731
            V = lambda x: lp * lp * (x + lx * lx / x)  # noqa: E731
            wd = lambda x: (lp * (x + lx * lx / x), lp * (1 - lx * lx / x**2),  # noqa: E731
                            2 * lp * lx * lx / x**3)
            lower = 0.0
        else:
            U = lambda x: x + lx * lx / x  # noqa: E731
            V = lambda x: lp * lp * x  # noqa: E731

            def wd(x):
                r = np.sqrt(x * x + lx * lx)
                return lp * r, lp * x / r, lp * lx * lx / r**3

            lower = 0.0
        return XpModel(kind, MappingProxyType(p), "generic", DomainInterval(lower), hbar, U, V, wd)
    if kind == "berry-keating":
        h2 = p["h"] ** 2
        return _symmetric(kind, p, 0.0, hbar,
                          lambda x: (x + h2 / x, 1 - h2 / x**2, 2 * h2 / x**3))
    if kind == "constant":
        c = p["c"]
        return _symmetric(kind, p, 0.0, hbar,
                          lambda x: (np.full_like(x, c), np.zeros_like(x), np.zeros_like(x)))
    if kind == "cosh":
        w0, k = p["w0"], 1.0 / (2.0 * p["mu"] * hbar)
        return _symmetric(kind, p, 0.0, hbar,
                          lambda x: (w0 * np.cosh(k * x), w0 * k * np.sinh(k * x),
                                     w0 * k * k * np.cosh(k * x)))
    if kind == "linear-log":
        a, b, h = p["alpha"], p["beta"], p["h"]
        x_min = max(h, -b / a)
        if a * x_min + b * math.log(x_min) <= 0:
            raise DomainError("linear-log model: w = alpha x + beta log x must stay positive on (h, inf)")
        return _symmetric(kind, p, h, hbar,
                          lambda x: (a * x + b * np.log(x), a + b / x, -b / x**2))
    # power
    A, e, h = p["A"], p["exponent"], p["h"]
    return _symmetric(kind, p, h, hbar,
                      lambda x: (A * x**e, A * e * x ** (e - 1), A * e * (e - 1) * x ** (e - 2)))


def tabulated_model(x, w, hbar=1.0):
    """Symmetric-gauge model from samples of w, interpolated by monotone PCHIP.

    The domain is ``(x[0], x[-1]]``.  Derivatives used for curvature come from
    five-point finite differences of the interpolant.
    """
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    if x.ndim != 1 or x.shape != w.shape or len(x) < 3:
        raise UsageError("tabulated w needs matching 1-d arrays with at least 3 samples")
    if np.any(np.diff(x) <= 0):
        raise DomainError("tabulated x must be strictly ascending")
    if np.any(w <= 0) or not np.all(np.isfinite(w)):
        raise DomainError("tabulated w must be finite and positive")
    hbar = _positive("hbar", hbar)
    spline = PchipInterpolator(x, w, extrapolate=True)
    f = lambda t: spline(t)  # noqa: E731
    return XpModel("tabulated", MappingProxyType({}), "symmetric",
                   DomainInterval(float(x[0]), float(x[-1])), hbar, f, f, None,
                   data=(x.copy(), w.copy()))


def with_hbar(m, hbar):
    """Same model with a different Planck constant (catalog kinds only)."""
    if m.kind == "tabulated":
        return tabulated_model(*m.data, hbar=hbar)
    if m.kind not in KINDS:
        raise UnsupportedModelError(f"cannot rebuild a {m.kind!r} model")
    return make_model(m.kind, dict(m.params), hbar)


def w_scalar(m, x):
    """w = u v at ``x`` (in the model's own coordinate)."""
    x = m.check(x)
    out = m.w(x)
    return float(out) if np.ndim(out) == 0 else out


# -- finite differences --------------------------------------------------------

def _fd_step(x, domain):
    """Step max(1e-5, 1e-4 x) as used for tabulated w."""
    return np.maximum(1e-5, 1e-4 * np.abs(x))


def _fd_pair(f, x, domain, step=None):
    """Five-point first and second derivatives; one-sided near the lower edge.

    Returns (f', f'', degraded) where ``degraded`` marks one-sided stencils.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    h = _fd_step(x, domain) if step is None else np.broadcast_to(step, x.shape).astype(float)
    lo_room = x - domain.lower
    hi_room = domain.upper - x
    d1 = np.empty_like(x)
    d2 = np.empty_like(x)
    flag = np.zeros(x.shape, dtype=bool)
    for i, (xi, hi) in enumerate(zip(x, h)):
        if lo_room[i] > 2 * hi and hi_room[i] >= 2 * hi:
            f2, f1, f0, g1, g2 = (float(f(xi + k * hi)) for k in (-2, -1, 0, 1, 2))
            d1[i] = (f2 - 8 * f1 + 8 * g1 - g2) / (12 * hi)
            d2[i] = (-f2 + 16 * f1 - 30 * f0 + 16 * g1 - g2) / (12 * hi * hi)
        else:
            s = 1.0 if lo_room[i] <= 2 * hi else -1.0
            if s > 0 and lo_room[i] <= 0:
                raise DomainError("finite-difference point outside the domain")
            fs = [float(f(xi + s * k * hi)) for k in range(5)]
            d1[i] = s * (-25 * fs[0] + 48 * fs[1] - 36 * fs[2] + 16 * fs[3] - 3 * fs[4]) / (12 * hi)
            d2[i] = (35 * fs[0] - 104 * fs[1] + 114 * fs[2] - 56 * fs[3] + 11 * fs[4]) / (12 * hi * hi)
            flag[i] = True
    return d1, d2, flag


# -- curvature -------------------------------------------------------------------

_CS_STEP = 1e-100


def _complex_step_ratio(m):
    """Return t -> W'(t)/V(t) with W' by complex step, or None if U, V are real-only."""
    def ratio(t):
        z = complex(t, _CS_STEP)
        return complex(m._U(z) * m._V(z)).imag / _CS_STEP / float(m.V(t))
    try:
        probe = m.lower + 1.0 if math.isfinite(m.lower) else 1.0
        with np.errstate(all="raise"):
            val = m._U(complex(probe, _CS_STEP)) * m._V(complex(probe, _CS_STEP))
        if not isinstance(val, complex) and not np.iscomplexobj(val):
            return None
        if val.imag == 0.0:
            return None
    except (TypeError, ValueError, FloatingPointError, ArithmeticError):
        return None
    return ratio

def scalar_curvature(m, x, with_flag=False):
    """Ricci scalar of the 1+1D metric built from (U, V).

    Symmetric gauge: ``R = -2 w''/w`` (analytic derivatives for catalog
    kinds).  Generic gauge: ``R = -(1/V) d/dx (W'/V)`` with ``W = U V``,
    evaluated by five-point finite differences.  With ``with_flag=True`` a
    ``(R, degraded)`` pair is returned, ``degraded`` marking one-sided
    stencils at the domain edge.
    """
    x = m.check(x)
    scalar = np.ndim(x) == 0
    xs = np.atleast_1d(x)
    degraded = np.zeros(xs.shape, dtype=bool)
    if m.is_symmetric and m._wd is not None:
        w, _, d2 = m._wd(xs)
        R = -2.0 * d2 / w
    elif m.is_symmetric:
        _, d2, degraded = _fd_pair(m.w, xs, m.domain)
        R = -2.0 * d2 / m.w(xs)
    else:
        step = 1e-3 * np.maximum(np.abs(xs), 1e-2)
        V = m.V(xs)
        gW = _complex_step_ratio(m)
        if gW is not None:
            # W'/V exact to rounding by complex step, then one difference
            dg, _, degraded = _fd_pair(gW, xs, m.domain, step)
            R = -dg / V
        else:
            def W(t):
                return m.U(t) * m.V(t)
            dW, d2W, f1 = _fd_pair(W, xs, m.domain, step)
            dV, _, f2 = _fd_pair(m.V, xs, m.domain, step)
            R = -(d2W * V - dW * dV) / V**3
            degraded = f1 | f2
    if scalar:
        R, degraded = float(R[0]), bool(degraded[0])
    return (R, degraded) if with_flag else R


# -- gauge maps --------------------------------------------------------------------

@dataclass(frozen=True)
class GaugeMap:
    """Coordinate change x' = forward(x) preserving orientation."""

    forward: object
    inverse: object
    new_lower: float

    def __call__(self, x):
        return self.forward(x)


def _identity_map(lower):
    ident = lambda x: np.asarray(x, dtype=float)  # noqa: E731
    return GaugeMap(ident, ident, lower)


def _numeric_map(m, density, new_lower):
    """x' = new_lower + int_lower^x density(y) dy, with numeric inverse."""
    lower = m.lower

    def forward_scalar(x):
        if x == lower:
            return new_lower
        try:
            val, _ = integrate(density, lower, x, _MAP_Q)
        except ConvergenceError as exc:
            raise DivergentMapError(
                f"map integral diverges at the lower end x = {lower}") from exc
        except DomainError as exc:
            raise DivergentMapError(f"map integrand singular near x = {lower}: {exc}") from exc
        return new_lower + val

    # probe divergence once, close to the boundary
    probe = lower + min(1.0, 1e-8 * max(1.0, abs(lower))) if math.isfinite(lower) else None
    if probe is not None:
        forward_scalar(probe)

    def forward(x):
        x = np.asarray(x, dtype=float)
        out = np.vectorize(forward_scalar, otypes=[float])(x)
        return out if out.ndim else float(out)

    def inverse_scalar(xp):
        if xp == new_lower:
            return lower
        if xp < new_lower:
            raise DomainError("point lies below the mapped domain")
        hi = lower + 1.0
        while forward_scalar(hi) < xp:
            hi = lower + 2.0 * (hi - lower)
            if hi > min(m.upper, 1e300):
                raise DomainError("point lies beyond the mapped domain")
        return find_root(lambda t: forward_scalar(t) - xp, (lower, hi), tol=1e-13 * max(1.0, hi))

    def inverse(xp):
        xp = np.asarray(xp, dtype=float)
        out = np.vectorize(inverse_scalar, otypes=[float])(xp)
        return out if out.ndim else float(out)

    return GaugeMap(forward, inverse, new_lower)


def _mapped_model(m, gmap, hbar=None):
    """Symmetric-gauge image w'(x') = w(f^{-1}(x')) for a general map."""
    def w_new(xp):
        return m.w(gmap.inverse(xp))

    upper = math.inf if math.isinf(m.upper) else float(gmap.forward(m.upper))
    return XpModel("mapped", MappingProxyType({"source": m.kind}), "symmetric",
                   DomainInterval(gmap.new_lower, upper), m.hbar if hbar is None else hbar,
                   w_new, w_new, None)


def to_symmetric_gauge(m, new_lower=None, numeric=False):
    """Map ``m`` to the symmetric gauge.

    Returns ``(GaugeMap, XpModel)``.  With ``new_lower=None`` the customary
    boundary is used (``lx*lp`` for the linear and model-III forms, 0 for the
    Berry-Keating form) and the image is the closed-form catalog model.  Any
    other ``new_lower``, or ``numeric=True``, builds the map by quadrature of
    v/u and inverts it by root finding.
    """
    if m.is_symmetric:
        if new_lower is None or new_lower == m.lower:
            return _identity_map(m.lower), m
        shift = new_lower - m.lower
        gmap = GaugeMap(lambda x: np.asarray(x, dtype=float) + shift,
                        lambda xp: np.asarray(xp, dtype=float) - shift, new_lower)
        return gmap, _mapped_model(m, gmap)
    if m.kind not in ("linear", "berry-keating", "model-III") or numeric or new_lower is not None:
        default = {"linear": m.params.get("lx", 0) * m.params.get("lp", 1),
                   "model-III": m.params.get("lx", 0) * m.params.get("lp", 1)}.get(m.kind, 0.0)
        nl = default if new_lower is None else float(new_lower)
        gmap = _numeric_map(m, m.ratio, nl)
        return gmap, _mapped_model(m, gmap)
    lx, lp = m.params["lx"], m.params["lp"]
    h = lx * lp
    if m.kind == "linear":
        gmap = GaugeMap(lambda x: lp * np.asarray(x, dtype=float),
                        lambda xp: np.asarray(xp, dtype=float) / lp, h)
        return gmap, make_model("linear", {"alpha": 1.0, "h": h}, m.hbar)
    if m.kind == "berry-keating":
        gmap = GaugeMap(lambda x: lp * np.asarray(x, dtype=float),
                        lambda xp: np.asarray(xp, dtype=float) / lp, 0.0)
        return gmap, make_model("berry-keating", {"h": h}, m.hbar)
    # model III: x' = lp sqrt(x^2 + lx^2)
    gmap = GaugeMap(lambda x: lp * np.sqrt(np.asarray(x, dtype=float) ** 2 + lx * lx),
                    lambda xp: np.sqrt(np.maximum((np.asarray(xp, dtype=float) / lp) ** 2 - lx * lx, 0.0)),
                    h)
    return gmap, make_model("linear", {"alpha": 1.0, "h": h}, m.hbar)


def to_p_gauge(m):
    """Map to the gauge U = 1: x' = int_lower^x dy / w(y), V_p(x') = w(x)**2.

    Returns ``(GaugeMap, V_p)``; the new domain starts at 0.
    """
    if not m.is_symmetric:
        g1, m = to_symmetric_gauge(m)
    else:
        g1 = None
    p = m.params
    if m.kind == "linear":
        a, h = p["alpha"], p["h"]
        g2 = GaugeMap(lambda x: np.log(np.asarray(x, dtype=float) / h) / a,
                      lambda xp: h * np.exp(a * np.asarray(xp, dtype=float)), 0.0)
        Vp = lambda xp: (a * h) ** 2 * np.exp(2 * a * np.asarray(xp, dtype=float))  # noqa: E731
    elif m.kind == "berry-keating":
        h = p["h"]
        g2 = GaugeMap(lambda x: 0.5 * np.log1p((np.asarray(x, dtype=float) / h) ** 2),
                      lambda xp: h * np.sqrt(np.expm1(2 * np.asarray(xp, dtype=float))), 0.0)

        def Vp(xp):
            xp = np.asarray(xp, dtype=float)
            return h * h * np.exp(2 * xp) / -np.expm1(-2 * xp)
    elif m.kind == "constant":
        c = p["c"]
        g2 = GaugeMap(lambda x: np.asarray(x, dtype=float) / c,
                      lambda xp: c * np.asarray(xp, dtype=float), 0.0)
        Vp = lambda xp: np.full_like(np.asarray(xp, dtype=float), c * c)  # noqa: E731
    else:
        g2 = _numeric_map(m, lambda y: 1.0 / m.w(y), 0.0)

        def Vp(xp):
            return m.w(g2.inverse(xp)) ** 2
    if g1 is None:
        return g2, Vp
    composed = GaugeMap(lambda x: g2.forward(g1.forward(x)),
                        lambda xp: g1.inverse(g2.inverse(xp)), 0.0)
    return composed, Vp


# -- light-cone charts ----------------------------------------------------------------

@dataclass(frozen=True)
class LightConeChart:
    """Chart functions f(x+), g(x-) and the conformal factor e^chi(x+, x-).

    ``constant`` holds the closed-form value of e^chi for flat choices.
    """

    f: object
    g: object
    conformal_factor: object
    choice: str
    constant: float = None


def lightcone_chart(m, choice):
    """Light-cone chart with int_lower^{x1} dy/w = f(x+) + g(x-).

    The conformal factor is evaluated from its general expression
    ``e^chi = 2 w(x1) sqrt(f'(x+) g'(x-))``; for the flat choices it is
    constant (h for the linear model, 2c for the constant one).
    """
    if not m.is_symmetric:
        _, m = to_symmetric_gauge(m)
    if choice == "flat-linear":
        if m.kind != "linear":
            raise UsageError("flat-linear chart needs a linear model")
        a = m.params["alpha"]
        f = lambda z: np.log(z) / (2 * a)  # noqa: E731
        df = lambda z: 1.0 / (2 * a * np.asarray(z, dtype=float))  # noqa: E731
        const = m.params["h"]
    elif choice == "flat-constant":
        if m.kind != "constant":
            raise UsageError("flat-constant chart needs a constant model")
        f = lambda z: np.asarray(z, dtype=float)  # noqa: E731
        df = lambda z: np.ones_like(np.asarray(z, dtype=float))  # noqa: E731
        const = 2 * m.params["c"]
    elif choice == "generic-identity":
        f = lambda z: np.asarray(z, dtype=float)  # noqa: E731
        df = lambda z: np.ones_like(np.asarray(z, dtype=float))  # noqa: E731
        const = None
    else:
        raise UsageError(f"unknown chart {choice!r}")
    pmap, _ = to_p_gauge(m)

    def conformal_factor(xp, xm):
        s = np.asarray(f(xp) + f(xm), dtype=float)
        if np.any(s < 0):
            raise DomainError("point lies outside the chart's domain")
        x1 = pmap.inverse(s)
        return 2.0 * m.w(x1) * np.sqrt(df(xp) * df(xm))

    return LightConeChart(f, f, conformal_factor, choice, const)


def chart_position(m, chart, xp, xm):
    """x1 solving int_lower^{x1} dy/w = f(x+) + g(x-)."""
    if not m.is_symmetric:
        _, m = to_symmetric_gauge(m)
    pmap, _ = to_p_gauge(m)
    return pmap.inverse(chart.f(xp) + chart.g(xm))
