"""Model I (w = z on z > z0): eigenvalues from the Bessel secular equation.

With s = z / hbar the eigenfunctions are phi(s) = s^(1 - nu) K_nu(s) with
nu = 1/2 - iE/(2 hbar), and the boundary condition becomes

    e^{i theta} K_nu(s0) + K_{nu - 1}(s0) = 0.

For real E and s0, K_{nu-1} = K_{1-nu} = conj(K_nu), so the condition is
equivalent to the real equation Re(e^{i theta / 2} K_nu(s0)) = 0.
"""
from __future__ import annotations

import cmath
import math

import numpy as np

from ..errors import DomainError
from ..numerics import Quadrature, bessel_k_log, find_root, integrate, scan_brackets
from .results import Extension, SpectrumResult, ZeroMode

_EIG_TOL = 1e-12


def _order(E, hbar):
    return complex(0.5, -0.5 * E / hbar)


def _check(z0, hbar):
    if not z0 > 0 or not math.isfinite(z0):
        raise DomainError(f"z0 must be positive, got {z0}")
    if not hbar > 0:
        raise DomainError(f"hbar must be positive, got {hbar}")


def modelI_secular(E, z0, theta=0.0, hbar=1.0):
    """Real secular function 2 Re(e^{i theta/2} K_nu(z0/hbar)), up to a positive factor.

    The factor exp(log_scale) of :func:`bessel_k_log` is dropped so that the
    value stays O(1) at large E, where K_nu itself underflows.
    """
    _check(z0, hbar)
    mant, _ = bessel_k_log(_order(E, hbar), z0 / hbar)
    return 2.0 * (cmath.exp(0.5j * theta) * mant).real


def modelI_raw_residual(E, z0, theta=0.0, hbar=1.0):
    """|e^{i theta} K_nu + K_{nu-1}| / |K_nu| with both orders evaluated separately."""
    _check(z0, hbar)
    nu = _order(E, hbar)
    s0 = z0 / hbar
    m1, l1 = bessel_k_log(nu, s0)
    m2, l2 = bessel_k_log(nu - 1.0, s0)
    raw = cmath.exp(1j * theta) * m1 + m2 * math.exp(l2 - l1)
    return abs(raw) / abs(m1)


def modelI_step(E, z0, hbar=1.0):
    """Scan step: a quarter of the asymptotic level spacing, at most hbar."""
    return hbar * min(1.0, math.pi / (2.0 * max(1.0, math.log(max(E, z0) / z0))))


def _scan_positive(z0, theta, E_lo, E_max, hbar):
    g = lambda e: modelI_secular(e, z0, theta, hbar)  # noqa: E731
    brackets = scan_brackets(g, E_lo, E_max, lambda e: modelI_step(abs(e), z0, hbar))
    return [find_root(g, b, tol=_EIG_TOL * max(1.0, b.hi)) for b in brackets]


def modelI_spectrum(z0, theta=0.0, E_max=100.0, hbar=1.0):
    """Eigenvalues of model I with |E| <= E_max.

    For theta in {0, pi} the positive roots are mirrored to negative
    energies; theta = pi adds the zero mode E = 0.  Other extensions are
    scanned on both half-lines.
    """
    _check(z0, hbar)
    if not E_max > 0:
        raise DomainError("E_max must be positive")
    ext = Extension(theta)
    th = ext.theta
    start = 1e-6 * hbar
    roots = _scan_positive(z0, th, start, E_max, hbar)
    zero = None
    if ext.time_reversal:
        roots = roots + [-r for r in roots]
        if ext.is_pi:
            roots.append(0.0)
            zero = modelI_zero_mode_norm(z0, hbar)
    else:
        g = lambda e: modelI_secular(-e, z0, th, hbar)  # noqa: E731
        neg = scan_brackets(g, start, E_max, lambda e: modelI_step(abs(e), z0, hbar))
        roots += [-find_root(g, b, tol=_EIG_TOL * max(1.0, b.hi)) for b in neg]
        # E = 0 solves the condition only when e^{i theta} = -1
    E = np.array(sorted(roots))
    res = np.array([modelI_raw_residual(e, z0, th, hbar) if e != 0 else abs(1 + cmath.exp(1j * th))
                    for e in E])
    return SpectrumResult(ext, E, res, hbar, zero_mode=zero, solver="bessel",
                          model={"kind": "linear", "params": {"alpha": 1.0, "h": z0}, "hbar": hbar})


def counting_m25(E, z0, theta=0.0, hbar=1.0):
    """Asymptotic index (E/2 pi hbar)(log(E/z0) - 1) - theta/2 pi - 1/2 of a positive level."""
    E = np.asarray(E, dtype=float)
    return E / (2 * math.pi * hbar) * (np.log(E / z0) - 1) - theta / (2 * math.pi) - 0.5


def level_indices(result, z0):
    """Integer labels of the positive levels.

    The lowest positive level gets the integer nearest to its asymptotic
    index; the following levels are numbered consecutively.
    """
    E = result.positive
    if E.size == 0:
        return np.empty(0, dtype=int)
    first = int(round(float(counting_m25(E[0], z0, result.theta, result.hbar))))
    return first + np.arange(E.size)


def modelI_zero_mode_norm(z0, hbar=1.0, q=None):
    """int_{z0}^inf exp(-2 z/hbar) / z dz = E1(2 z0 / hbar)."""
    q = q or Quadrature(abs_tol=1e-300, rel_tol=1e-12)
    val, _ = integrate(lambda z: np.exp(-2.0 * (z - z0) / hbar) / z, z0, math.inf, q,
                       hint="exponential-tail")
    return val * math.exp(-2.0 * z0 / hbar)


def modelI_zero_mode(z0, theta, hbar=1.0):
    ext = Extension(theta)
    if not ext.is_pi:
        return ZeroMode(False)
    return ZeroMode(True, modelI_zero_mode_norm(z0, hbar))


def modelI_eigenfunction(E, z0, z_grid, hbar=1.0):
    """phi(z) = s^(1 - nu) K_nu(s), s = z / hbar, unnormalised.

    Values that underflow double precision are returned as 0; the second
    return value flags them.
    """
    _check(z0, hbar)
    z = np.atleast_1d(np.asarray(z_grid, dtype=float))
    if np.any(z < z0 * (1 - 1e-15)):
        raise DomainError("z_grid must lie in [z0, inf)")
    nu = _order(E, hbar)
    out = np.empty(z.shape, dtype=complex)
    under = np.zeros(z.shape, dtype=bool)
    for k, zk in enumerate(z):
        s = zk / hbar
        mant, scale = bessel_k_log(nu, s)
        log_mod = scale + (1 - nu.real) * math.log(s) + math.log(abs(mant)) if mant != 0 else -math.inf
        if log_mod < -745:
            out[k], under[k] = 0.0, True
        else:
            out[k] = mant * cmath.exp(scale + (1 - nu) * math.log(s))
    return out, under


def modelI_boundary_functional(E, z0, theta=0.0, hbar=1.0, route="identity", q=None):
    """e^{i theta} phi(z0) + hbar^-1 int_{z0}^inf phi dz, divided by |phi(z0)|.

    ``route='identity'`` uses int_{s0}^inf s^(1-nu) K_nu = s0^(1-nu) K_{nu-1}(s0);
    ``route='quadrature'`` integrates phi numerically.
    """
    _check(z0, hbar)
    nu = _order(E, hbar)
    s0 = z0 / hbar
    m0, l0 = bessel_k_log(nu, s0)
    phase0 = cmath.exp((1 - nu) * math.log(s0))
    phi0 = m0 * phase0  # times exp(l0)
    if route == "identity":
        m1, l1 = bessel_k_log(nu - 1.0, s0)
        tail = m1 * math.exp(l1 - l0) * phase0
    elif route == "quadrature":
        q = q or Quadrature(abs_tol=1e-300, rel_tol=1e-11)

        def f(s):
            s = np.atleast_1d(s)
            vals = []
            for sk in s:
                mk, lk = bessel_k_log(nu, sk)
                vals.append(mk * cmath.exp(lk - l0 + (1 - nu) * math.log(sk)))
            return np.array(vals)

        # the integrand decays like exp(-s); split off the oscillatory head
        edge = max(s0 + 40.0, 2.0 * abs(nu.imag) + 40.0)
        head, _ = integrate(f, s0, edge, q, points=np.linspace(s0, edge, 64)[1:-1])
        tail_part, _ = integrate(f, edge, math.inf, q, hint="exponential-tail")
        tail = head + tail_part
    else:
        raise DomainError(f"unknown route {route!r}")
    return abs(cmath.exp(1j * theta) * phi0 + tail) / abs(phi0)
