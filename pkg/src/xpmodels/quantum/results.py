"""Result containers shared by the spectral solvers."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import DomainError

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Extension:
    """Self-adjoint extension angle, stored in [0, 2 pi)."""

    theta: float

    def __post_init__(self):
        t = float(self.theta)
        if not math.isfinite(t):
            raise DomainError("theta must be finite")
        t = math.fmod(t, _TWO_PI)
        if t < 0:
            t += _TWO_PI
        if _TWO_PI - t < 1e-14:
            t = 0.0
        object.__setattr__(self, "theta", t)

    @property
    def time_reversal(self):
        """True for theta in {0, pi}, where the spectrum is symmetric under E -> -E."""
        return self.is_zero or self.is_pi

    @property
    def is_zero(self):
        return self.theta < 1e-12

    @property
    def is_pi(self):
        return abs(self.theta - math.pi) < 1e-12


@dataclass(frozen=True)
class ZeroMode:
    """Outcome of the zero-energy analysis: ``norm`` is <psi_0|psi_0> when present."""

    present: bool
    norm: float = None
    divergent: bool = False

    def __bool__(self):
        return self.present


@dataclass
class SpectrumResult:
    """Eigenvalues sorted ascending with their residuals.

    ``zero_mode`` is the zero-mode norm when E = 0 is an eigenvalue with
    the decaying solution, ``continuum`` the band edges when a continuum exists.
    """

    extension: Extension
    eigenvalues: np.ndarray
    residuals: np.ndarray
    hbar: float = 1.0
    zero_mode: float = None
    continuum: tuple = None
    solver: str = ""
    model: dict = field(default_factory=dict)
    flags: list = field(default_factory=list)

    def __post_init__(self):
        E = np.asarray(self.eigenvalues, dtype=float)
        r = np.asarray(self.residuals, dtype=float)
        if E.shape != r.shape:
            raise DomainError("eigenvalues and residuals must have equal length")
        order = np.argsort(E, kind="stable")
        self.eigenvalues, self.residuals = E[order], r[order]

    @property
    def theta(self):
        return self.extension.theta

    @property
    def positive(self):
        return self.eigenvalues[self.eigenvalues > 0]

    def count_below(self, E):
        """Number of eigenvalues in (0, E]."""
        return int(np.count_nonzero((self.eigenvalues > 0) & (self.eigenvalues <= E)))

    def symmetry_defect(self):
        """max |E_k + E_{N-1-k}| over the sorted eigenvalues (0 for a symmetric set)."""
        E = self.eigenvalues
        if E.size == 0:
            return 0.0
        return float(np.max(np.abs(E + E[::-1])))

    def to_dict(self):
        return {
            "theta": self.theta,
            "hbar": self.hbar,
            "solver": self.solver,
            "model": dict(self.model),
            "eigenvalues": [float(e) for e in self.eigenvalues],
            "residuals": [float(r) for r in self.residuals],
            "zero_mode_norm": self.zero_mode,
            "continuum": None if self.continuum is None else [float(c) for c in self.continuum],
            "flags": list(self.flags),
        }
