"""Comparison of xp spectra with the smooth count of Riemann zeros."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DomainError, IngestionError
from .quantum.bessel import counting_m25


def smooth_zero_count(t):
    """(t / 2 pi)(log(t / 2 pi) - 1) + 7/8, the smooth number of zeros up to height t."""
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise DomainError("smooth_zero_count needs t > 0")
    out = t / (2 * math.pi) * (np.log(t / (2 * math.pi)) - 1) + 7 / 8
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ZerosTable:
    ordinates: np.ndarray
    source_path: str = ""

    def __post_init__(self):
        t = np.asarray(self.ordinates, dtype=float)
        if t.ndim != 1:
            raise DomainError("zeros must be a 1-d sequence")
        if np.any(t <= 0):
            raise DomainError("zero ordinates must be positive")
        if np.any(np.diff(t) <= 0):
            raise DomainError("zero ordinates must be strictly ascending")
        object.__setattr__(self, "ordinates", t)

    def __len__(self):
        return len(self.ordinates)

    def count_below(self, t):
        return int(np.searchsorted(self.ordinates, t, side="right"))


def load_zeros(path):
    """Read one ordinate per line; blank lines and ``#`` comments are skipped."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IngestionError(f"cannot read {path}: {exc}") from exc
    values = []
    prev = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            t = float(line)
        except ValueError:
            raise IngestionError(f"not a number: {line!r}", lineno) from None
        if not math.isfinite(t) or t <= 0:
            raise IngestionError(f"ordinate must be finite and positive, got {line!r}", lineno)
        if prev is not None and t <= prev:
            raise IngestionError(f"ordinates must ascend ({t!r} after {prev!r})", lineno)
        values.append(t)
        prev = t
    return ZerosTable(np.array(values), str(path))


@dataclass(frozen=True)
class Identification:
    """t = E / (hbar alpha); z0 defaults to 2 pi hbar."""

    alpha: float = 1.0
    hbar: float = 1.0
    z0: float = None

    def __post_init__(self):
        if not self.alpha > 0 or not self.hbar > 0:
            raise DomainError("alpha and hbar must be positive")
        if self.z0 is None:
            object.__setattr__(self, "z0", 2 * math.pi * self.hbar)
        elif not self.z0 > 0:
            raise DomainError("z0 must be positive")


@dataclass
class ComparisonReport:
    identification: Identification
    n: np.ndarray
    E: np.ndarray
    t: np.ndarray
    smooth: np.ndarray
    offset: np.ndarray
    nearest_zero: np.ndarray = None
    summary: dict = field(default_factory=dict)

    def rows(self):
        cols = [self.n, self.E, self.t, self.smooth, self.offset]
        if self.nearest_zero is not None:
            cols.append(self.nearest_zero)
        return list(zip(*[c.tolist() for c in cols]))

    def window(self, E_lo, E_hi):
        sel = (self.E >= E_lo) & (self.E <= E_hi)
        return self.offset[sel]

    def to_dict(self):
        ident = self.identification
        return {
            "identification": {"alpha": ident.alpha, "hbar": ident.hbar, "z0": ident.z0},
            "columns": ["n", "E", "t", "smooth_count", "offset"]
            + (["nearest_zero_distance"] if self.nearest_zero is not None else []),
            "rows": [list(r) for r in self.rows()],
            "summary": dict(self.summary),
        }


def compare_spectrum(spec, zeros=None, ident=None):
    """Offsets smooth_zero_count(t_n) - n for the positive levels of ``spec``.

    Levels are labelled by the asymptotic model-I index at the identified
    z0 (lowest level rounded, the rest consecutive).  With a zeros table the
    distance from each t_n to the nearest zero is reported too.
    """
    ident = ident or Identification(hbar=spec.hbar)
    E = spec.positive
    if E.size == 0:
        raise DomainError("spectrum has no positive eigenvalues to compare")
    first = int(round(float(counting_m25(E[0] / ident.alpha, ident.z0, spec.theta, ident.hbar))))
    n = first + np.arange(E.size)
    t = E / (ident.hbar * ident.alpha)
    smooth = np.asarray(smooth_zero_count(t), dtype=float).reshape(-1)
    offset = smooth - n
    nearest = None
    if zeros is not None and len(zeros):
        z = zeros.ordinates
        k = np.clip(np.searchsorted(z, t), 1, len(z) - 1) if len(z) > 1 else np.zeros(len(t), int)
        cand = np.stack([np.abs(t - z[k - 1]), np.abs(t - z[k])]) if len(z) > 1 else np.abs(t - z[0])[None]
        nearest = cand.min(axis=0)
    summary = {"mean_offset": float(offset.mean()), "max_offset": float(offset.max()),
               "min_offset": float(offset.min()), "levels": int(E.size), "target": 11 / 8}
    return ComparisonReport(ident, n, E, t, smooth, offset, nearest, summary)
