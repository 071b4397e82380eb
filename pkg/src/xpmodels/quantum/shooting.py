"""Shooting solver for the nonlocal eigenproblem of a general xp model.

In the model's own coordinate, with phi = u psi, r = v/u and
chi = hbar phi'/r - iE phi/w, the eigenproblem reads

    hbar phi' = r (chi + iE phi / w),    hbar chi' = r phi,
    e^{i theta} phi(lower) - chi(lower) = 0,

where the boundary condition follows from hbar^-1 int r phi dx = -chi(lower)
for decaying phi.  For real E, |chi|^2 - |phi|^2 is conserved and vanishes at
infinity, so rho = chi/phi = exp(i a) stays on the unit circle and the phase
obeys the real equation

    hbar a' = r (-2 sin a - E / w).

It is integrated inward from a point where E / 2w <= 0.1, seeded by the
decaying WKB branch a = pi + asin(E / 2w) + O(hbar).  Eigenvalues solve
a(lower; E) = theta mod 2 pi, and the number of 2 pi windings between E = 0
and E counts the levels in between.
"""
from __future__ import annotations

import math

import numpy as np

from ..errors import ConvergenceError, DomainError, UnsupportedModelError
from ..numerics import Quadrature, RootBracket, integrate, ode_integrate, refine_brackets
from ..models import to_symmetric_gauge
from .results import Extension, SpectrumResult, ZeroMode

_TWO_PI = 2.0 * math.pi


def _far_point(m, E_max):
    """x where w >= 5 E_max and the symmetric-gauge distance from lower is >= 60 hbar."""
    lower = m.lower
    target = 5.0 * max(abs(E_max), 1.0)
    span = max(1.0, abs(lower))
    x = lower + span
    for _ in range(200):
        w = float(m.w(x))
        if w >= target:
            dist, _ = integrate(m.ratio, lower, x, Quadrature(1e-10, 1e-8))
            if dist >= 60.0 * m.hbar:
                return x
        span *= 1.5
        x = lower + span
        if x >= m.upper:
            break
    raise UnsupportedModelError(
        f"{m.kind}: w does not grow to 5 E_max = {target} on the domain; "
        "shooting needs an unbounded w (discrete spectrum)")


def _seed(m, x, E):
    w, dw, _ = m.derivatives(np.asarray(x))
    w, dw = float(w), float(dw)
    s = E / (2.0 * w)
    dwdz = dw / float(m.ratio(x))
    return math.pi + np.arcsin(s) - m.hbar * E * dwdz / (4.0 * w * w * (1.0 - s * s))


class PhaseShooter:
    """Boundary phase a(lower; E) for batches of energies at fixed far point."""

    def __init__(self, m, E_max, tol=1e-11):
        if m.kind == "constant":
            raise UnsupportedModelError("the constant model has a continuous spectrum; "
                                        "use constant_model_spectrum")
        self.m = m
        self.E_max = float(E_max)
        self.x_far = _far_point(m, E_max)
        self.tol = tol
        self.evaluations = 0

    def phase(self, E):
        E = np.atleast_1d(np.asarray(E, dtype=float))
        if np.any(np.abs(E) > self.E_max * (1 + 1e-12)):
            raise DomainError("energy above the E_max the shooter was built for")
        m, hbar = self.m, self.m.hbar
        a0 = _seed(m, self.x_far, E)

        def rhs(x, a):
            with np.errstate(all="ignore"):
                w = m.w(x)
                r = float(m.ratio(x))
                ew = np.where(np.isfinite(w), E / w, 0.0)
            return r / hbar * (-2.0 * np.sin(a) - ew)

        path = ode_integrate(rhs, a0, self.x_far, m.lower, tol=self.tol, atol=self.tol)
        self.evaluations += 1
        return path.final[1]


def _brackets(shooter, grid, theta, phase):
    """One bracket per crossing of a = theta + 2 pi k between grid points."""
    out = []
    F = phase - theta
    for i in range(len(grid) - 1):
        lo, hi = F[i], F[i + 1]
        k_lo, k_hi = sorted((lo / _TWO_PI, hi / _TWO_PI))
        for k in range(math.floor(k_lo) + 1, math.floor(k_hi) + 1):
            level = _TWO_PI * k
            if lo == level:
                continue
            out.append((RootBracket(grid[i], grid[i + 1], lo - level, hi - level), level))
    return out


def _scan(shooter, theta, E_lo, E_hi, n0=64, max_refine=8):
    grid = np.linspace(E_lo, E_hi, n0 + 1)
    phase = shooter.phase(grid)
    for _ in range(max_refine):
        jump = np.abs(np.diff(phase)) > 0.5 * math.pi
        if not jump.any():
            break
        mids = 0.5 * (grid[:-1] + grid[1:])[jump]
        grid = np.concatenate([grid, mids])
        phase = np.concatenate([phase, shooter.phase(mids)])
        order = np.argsort(grid)
        grid, phase = grid[order], phase[order]
    return grid, phase


def shoot_spectrum(m, theta=0.0, E_max=50.0, tol=1e-10):
    """Eigenvalues with |E| <= E_max by phase shooting (theta in {0, pi}).

    Returns a :class:`SpectrumResult` whose residuals are the phase
    mismatch |a(lower; E) - theta - 2 pi k| at each root.
    """
    ext = Extension(theta)
    if not ext.time_reversal:
        raise DomainError("shooting supports theta = 0 or pi only")
    if not E_max > 0:
        raise DomainError("E_max must be positive")
    shooter = PhaseShooter(m, E_max)
    th = ext.theta
    grid, phase = _scan(shooter, th, 0.0, E_max)
    found = _brackets(shooter, grid, th, phase)
    levels = np.array([lv for _, lv in found])
    brackets = [b for b, _ in found]
    if brackets:
        roots = refine_brackets(lambda E, idx: shooter.phase(E) - th - levels[idx],
                                brackets, tol=tol * max(1.0, E_max), indexed=True)
        res = np.abs(shooter.phase(roots) - th - levels)
    else:
        roots, res = np.empty(0), np.empty(0)
    E = list(roots) + [-r for r in roots]
    R = list(res) + list(res)
    zero = None
    flags = []
    if ext.is_pi:
        zm = zero_mode(m, th)
        if zm.present:
            E.append(0.0)
            R.append(abs(float(shooter.phase(0.0)[0]) - th))
            zero = zm.norm
        else:
            flags.append("zero-mode-divergent")
    return SpectrumResult(ext, np.array(E), np.array(R), m.hbar, zero_mode=zero, solver="shoot",
                          model={"kind": m.kind, "params": dict(m.params), "hbar": m.hbar,
                                 "gauge": m.gauge}, flags=flags)


def phase_count(m, E, theta=0.0):
    """Number of levels in (0, E] from the winding of the boundary phase."""
    ext = Extension(theta)
    shooter = PhaseShooter(m, abs(E))
    grid, phase = _scan(shooter, ext.theta, 0.0, abs(E))
    return len(_brackets(shooter, grid, ext.theta, phase))


def zero_mode(m, theta):
    """Zero-energy state phi_0 = exp(-z/hbar), present only for theta = pi.

    Returns the norm int dz exp(-2 z/hbar) / w(z) over the symmetric-gauge
    image of ``m`` (z is the symmetric coordinate, not the distance to the
    boundary).  A norm integral that fails to converge is reported as
    divergent.
    """
    ext = Extension(theta)
    if not ext.is_pi:
        return ZeroMode(False)
    sym = m if m.is_symmetric else to_symmetric_gauge(m)[1]
    hbar = sym.hbar
    lower = sym.lower

    def f(z):
        with np.errstate(all="ignore"):
            w = sym.w(z)
            v = np.exp(-2.0 * z / hbar) / w
        return np.where(np.isfinite(w), v, 0.0)

    q = Quadrature(abs_tol=1e-300, rel_tol=1e-11)
    try:
        if math.isinf(sym.upper):
            norm, _ = integrate(f, lower, math.inf, q, hint="exponential-tail")
        else:
            norm, _ = integrate(f, lower, sym.upper, q)
    except (ConvergenceError, DomainError):
        return ZeroMode(False, None, True)
    if not math.isfinite(norm) or norm <= 0:
        return ZeroMode(False, None, True)
    return ZeroMode(True, float(norm))
