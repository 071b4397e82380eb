"""Constant model w = lp on the half-line: exact bound and scattering states.

The boundary condition here is -e^{i theta} psi(0) + (lp/hbar) int psi = 0,
i.e. theta is shifted by pi relative to the convention of the other
solvers.  With that choice the bound state exists for cos(theta) > 0.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from ..errors import DomainError
from ..numerics import Quadrature, integrate
from .results import Extension, SpectrumResult


def _check(lp, hbar):
    if not lp > 0 or not math.isfinite(lp):
        raise DomainError(f"lp must be positive, got {lp}")
    if not hbar > 0:
        raise DomainError(f"hbar must be positive, got {hbar}")


def _principal(theta):
    """theta reduced to (-pi, pi]."""
    t = math.remainder(float(theta), 2 * math.pi)
    return math.pi if t == -math.pi else t


@dataclass(frozen=True)
class BoundState:
    E0: float
    k0: complex
    C: float
    mean_x: float

    def __call__(self, x):
        return self.C * np.exp(-self.k0 * np.asarray(x, dtype=float))


def bound_state(lp, theta, hbar=1.0):
    """The normalisable state C exp(-k0 x), k0 = (lp/hbar) e^{-i theta}, or None."""
    _check(lp, hbar)
    t = _principal(theta)
    c = math.cos(t)
    if not c > 1e-15:
        return None
    return BoundState(2 * lp * math.sin(t), (lp / hbar) * cmath.exp(-1j * t),
                      math.sqrt(2 * lp * c / hbar), hbar / (2 * lp * c))


def constant_model_spectrum(lp, theta, hbar=1.0):
    """Continuum (-inf, -2 lp) u (2 lp, inf) plus E0 = 2 lp sin(theta) when cos(theta) > 0."""
    bs = bound_state(lp, theta, hbar)
    E = np.array([bs.E0]) if bs is not None else np.empty(0)
    res = np.zeros_like(E)
    if bs is not None:
        # boundary condition residual of the closed form
        res[0] = abs(-cmath.exp(1j * _principal(theta)) + (lp / hbar) / bs.k0)
    flags = [] if bs is not None else ["no-bound-state"]
    return SpectrumResult(Extension(theta), E, res, hbar, continuum=(-2 * lp, 2 * lp),
                          solver="closed-form", flags=flags,
                          model={"kind": "constant", "params": {"c": lp}, "hbar": hbar})


@dataclass(frozen=True)
class ScatteringState:
    E: float
    eta: int
    u: float
    k_plus: float
    k_minus: float
    A: complex
    B: complex
    lp: float
    hbar: float

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.A * np.exp(1j * self.k_plus * x) + self.B * np.exp(1j * self.k_minus * x)

    def normalisation(self):
        """|A|^2 e^-u + |B|^2 e^u, equal to 1/(2 pi hbar)."""
        return abs(self.A) ** 2 * math.exp(-self.u) + abs(self.B) ** 2 * math.exp(self.u)


def constant_model_scattering(E, lp, theta, hbar=1.0):
    """Continuum eigenfunction A e^{i k+ x} + B e^{i k- x} at energy E, |E| > 2 lp."""
    _check(lp, hbar)
    if not abs(E) > 2 * lp:
        raise DomainError(f"|E| = {abs(E)} lies inside the gap (-2 lp, 2 lp)")
    eta = 1 if E > 0 else -1
    u = math.acosh(abs(E) / (2 * lp))
    e_th = cmath.exp(1j * theta)
    denom = math.sqrt(8 * math.pi * hbar * (math.cosh(u) - eta * math.sin(theta)))
    A = (e_th - 1j * eta * math.exp(u)) / denom
    B = -(e_th - 1j * eta * math.exp(-u)) / denom
    k = eta * lp / hbar
    return ScatteringState(float(E), eta, u, k * math.exp(u), k * math.exp(-u), A, B, lp, hbar)


def ap_ratio(state, theta):
    """A/B from the bound-continuum orthogonality condition."""
    e_th = cmath.exp(1j * theta)
    return -(e_th - 1j * state.eta * math.exp(state.u)) / (e_th - 1j * state.eta * math.exp(-state.u))


def bilinear_form(s1, s2):
    """(A1*, B1*) M (A2, B2)^T with M_ij = 1/(k_i - k'_j); vanishes for E1 != E2."""
    k1 = (s1.k_plus, s1.k_minus)
    k2 = (s2.k_plus, s2.k_minus)
    c1 = (s1.A.conjugate(), s1.B.conjugate())
    c2 = (s2.A, s2.B)
    return sum(c1[i] * c2[j] / (k1[i] - k2[j]) for i in range(2) for j in range(2))


def bilinear_matrix(s1, s2):
    """The same matrix written with rapidities: (hbar/lp) [1/(eta e^{+-u} - eta' e^{+-u'})]."""
    a = (s1.eta * math.exp(s1.u), s1.eta * math.exp(-s1.u))
    b = (s2.eta * math.exp(s2.u), s2.eta * math.exp(-s2.u))
    return (s1.hbar / s1.lp) * np.array([[1 / (a[i] - b[j]) for j in range(2)] for i in range(2)])


@dataclass(frozen=True)
class OrthonormalityReport:
    bound_norm: float
    mean_x: float
    overlaps: dict  # L -> |<psi_0|psi_E>_L| for each probed E
    bilinear_max: float


def _overlap_closed(bs, st, L):
    """int_0^L conj(psi_0) psi_E dx in closed form."""
    kc = bs.k0.conjugate()
    total = 0j
    for amp, k in ((st.A, st.k_plus), (st.B, st.k_minus)):
        a = 1j * k - kc
        total += amp * (cmath.exp(a * L) - 1) / a
    return bs.C * total


def orthonormality_check(lp, theta, hbar=1.0, E_pairs=(), L_values=(5.0, 10.0, 20.0, 40.0)):
    """Numerical checks of the orthonormal basis.

    ``bound_norm`` and ``mean_x`` come from quadrature of the bound state;
    ``overlaps`` maps each probed continuum energy to |<psi_0|psi_E>| on
    (0, L) for the regulators ``L_values`` (closed form); ``bilinear_max``
    is the largest |bilinear form| over ``E_pairs``.
    """
    bs = bound_state(lp, theta, hbar)
    if bs is None:
        raise DomainError("no bound state for this extension (cos theta <= 0)")
    q = Quadrature(abs_tol=1e-15, rel_tol=1e-13)
    dens = lambda x: np.abs(bs(x)) ** 2  # noqa: E731
    norm, _ = integrate(dens, 0.0, math.inf, q, hint="exponential-tail")
    mean, _ = integrate(lambda x: x * dens(x), 0.0, math.inf, q, hint="exponential-tail")
    overlaps = {}
    bil = 0.0
    for E1, E2 in E_pairs:
        for E in (E1, E2):
            st = constant_model_scattering(E, lp, theta, hbar)
            overlaps[float(E)] = [abs(_overlap_closed(bs, st, L)) for L in L_values]
        s1 = constant_model_scattering(E1, lp, theta, hbar)
        s2 = constant_model_scattering(E2, lp, theta, hbar)
        bil = max(bil, abs(bilinear_form(s1, s2)))
    return OrthonormalityReport(norm, mean, overlaps, bil)
