"""Special functions: K_nu for complex order, complete elliptic K and E, Li(x).

Only what the rest of the package needs; this is not a general library.
"""
from __future__ import annotations

import cmath
import math

import numpy as np

from ..errors import ConvergenceError, DomainError
from .quadrature import Quadrature, integrate
from .roots import find_root

# Tail cut: drop the integrand once it is this many e-folds below its peak,
# on top of log(1/rtol).
_TAIL_MARGIN = 45.0


def _canonical_order(nu):
    """Map nu to (a, b, conjugate) with a, b >= 0 using K_{-nu} = K_nu and
    K_{conj nu}(z) = conj K_nu(z) for real z."""
    nu = complex(nu)
    if nu.real < 0 or (nu.real == 0 and nu.imag < 0):
        nu = -nu
    conj = nu.imag < 0
    return nu.real, abs(nu.imag), conj


def _contour_angle(b, z):
    """Height c of the shifted line t = x + i c, 0 <= c < pi/2.

    Choosing c near the saddle of -z cosh t + i b t removes the
    exp(pi b / 2) cancellation of the real-line integral at large Im(nu).
    """
    if b == 0.0:
        return 0.0
    saddle = math.asin(min(b / z, 1.0))
    cap = 0.5 * math.pi - 1.0 / (1.0 + b)
    return max(0.0, min(saddle, cap))


def _tail_cut(r, x_peak, drop, direction):
    """Return x beyond x_peak (in ``direction``) where r(x) <= r(x_peak) - drop."""
    target = r(x_peak) - drop
    step = 1.0
    x = x_peak + direction * step
    while r(x) > target:
        step *= 2.0
        x = x_peak + direction * step
        if step > 1e3:
            raise ConvergenceError("could not bracket the Bessel integrand tail")
    lo, hi = sorted((x_peak, x))
    return find_root(lambda t: r(t) - target, (lo, hi), tol=1e-6)


def bessel_k_log(nu, z, rtol=1e-13):
    """Return ``(mantissa, log_scale)`` with ``K_nu(z) = mantissa * exp(log_scale)``.

    Evaluates ``K_nu(z) = 1/2 int exp(-z cosh t + nu t) dt`` over the real
    line, moved to the horizontal line ``Im t = c`` so that large imaginary
    orders do not cancel catastrophically.  Valid for any ``z > 0`` without an
    asymptotic crossover; the split form avoids overflow and underflow.
    """
    z = float(z)
    if not z > 0 or not math.isfinite(z):
        raise DomainError(f"bessel_k needs finite z > 0, got {z}")
    if not cmath.isfinite(complex(nu)):
        raise DomainError("bessel_k needs a finite order")
    a, b, conj = _canonical_order(nu)
    c = _contour_angle(b, z)
    kappa = z * math.cos(c)
    sigma = z * math.sin(c)

    def r(x):
        return -kappa * np.cosh(x) + a * x

    x_peak = math.asinh(a / kappa)
    peak = float(r(x_peak))
    drop = _TAIL_MARGIN + math.log(1.0 / rtol)
    x_lo = _tail_cut(r, x_peak, drop, -1.0)
    x_hi = _tail_cut(r, x_peak, drop, +1.0)

    def integrand(x):
        return np.exp(r(x) - peak + 1j * (b * x - sigma * np.sinh(x)))

    # seed one panel per half-oscillation of the b*x phase
    n0 = int(min(4000, 8 + b * (x_hi - x_lo) / math.pi))
    points = np.linspace(x_lo, x_hi, n0 + 1)[1:-1]
    q = Quadrature(abs_tol=1e-300, rel_tol=rtol, max_subdivisions=200000)
    value, _ = integrate(integrand, x_lo, x_hi, q, points=points)
    mantissa = 0.5 * value * cmath.exp(1j * a * c)
    if a == 0.0 or b == 0.0:
        # real and purely imaginary orders give a real K_nu(z)
        mantissa = complex(mantissa.real)
    if conj:
        mantissa = mantissa.conjugate()
    return complex(mantissa), peak - b * c


def bessel_k(nu, z, rtol=1e-13):
    """Modified Bessel function of the second kind ``K_nu(z)``.

    Parameters
    ----------
    nu : complex
        Order; any finite complex value.  Symmetries ``K_{-nu} = K_nu`` and
        ``K_{conj nu} = conj K_nu`` hold exactly by construction.
    z : float
        Positive real argument.

    Returns
    -------
    complex
    """
    mantissa, scale = bessel_k_log(nu, z, rtol)
    return mantissa * math.exp(scale) if scale > -745 else complex(0.0)


def elliptic_KE(m):
    """Complete elliptic integrals ``K(m)`` and ``E(m)`` with parameter ``m = k**2``.

    Uses the arithmetic-geometric mean.  ``K(1)`` is returned as ``inf``.
    """
    m = float(m)
    if not 0.0 <= m <= 1.0:
        raise DomainError(f"elliptic_KE needs 0 <= m <= 1, got {m}")
    if m == 1.0:
        return math.inf, 1.0
    a, g = 1.0, math.sqrt(1.0 - m)
    c = math.sqrt(m)
    weight = 0.5
    acc = weight * c * c
    for _ in range(64):
        if abs(c) <= 1e-17 * a:
            break
        a_next = 0.5 * (a + g)
        # c_{n+1} = c_n^2 / (4 a_{n+1}) avoids the cancellation in (a - g) / 2
        a, g, c = a_next, math.sqrt(a * g), c * c / (4.0 * a_next)
        weight *= 2.0
        acc += weight * c * c
    K = math.pi / (2.0 * a)
    return K, K * (1.0 - acc)


def log_integral(x, q=None):
    """Offset logarithmic integral ``Li(x) = int_2^x dy / log y``."""
    x = float(x)
    if not x >= 2.0:
        raise DomainError(f"log_integral needs x >= 2, got {x}")
    if x == 2.0:
        return 0.0
    q = q or Quadrature(abs_tol=1e-14, rel_tol=1e-13)
    # y = e^s makes the integrand e^s / s, smooth on [log 2, log x]
    value, _ = integrate(lambda s: np.exp(s) / s, math.log(2.0), math.log(x), q)
    return value
