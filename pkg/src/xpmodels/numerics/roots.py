"""Bracketed root location and grid scans for sign changes."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DomainError


@dataclass(frozen=True)
class RootBracket:
    lo: float
    hi: float
    f_lo: float
    f_hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise DomainError(f"bracket needs lo < hi, got [{self.lo}, {self.hi}]")
        if self.f_lo * self.f_hi > 0:
            raise DomainError(
                f"no sign change on [{self.lo}, {self.hi}]: f = {self.f_lo}, {self.f_hi}"
            )

    @classmethod
    def from_function(cls, f, lo, hi):
        return cls(lo, hi, float(f(lo)), float(f(hi)))

    @property
    def width(self):
        return self.hi - self.lo


def find_root(f, bracket, tol=1e-10):
    """Bisect ``bracket`` down to width ``tol`` and finish with one secant step.

    ``bracket`` is a :class:`RootBracket` or a ``(lo, hi)`` pair.  The secant
    point is only accepted when it falls inside the final bracket, so the
    result never leaves it.
    """
    if not tol > 0:
        raise DomainError("tol must be positive")
    if not isinstance(bracket, RootBracket):
        bracket = RootBracket.from_function(f, *bracket)
    lo, hi, f_lo, f_hi = bracket.lo, bracket.hi, bracket.f_lo, bracket.f_hi
    if f_lo == 0:
        return lo
    if f_hi == 0:
        return hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        f_mid = float(f(mid))
        if f_mid == 0:
            return mid
        if (f_mid < 0) == (f_lo < 0):
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
    secant = lo - f_lo * (hi - lo) / (f_hi - f_lo)
    if lo <= secant <= hi and math.isfinite(secant):
        return secant
    return 0.5 * (lo + hi)


def scan_grid(e_lo, e_hi, step):
    """Grid ``e_lo = e_0 < e_1 < ... = e_hi`` with ``e_{k+1} - e_k = step(e_k)``."""
    if not e_lo < e_hi:
        raise DomainError(f"scan needs e_lo < e_hi, got [{e_lo}, {e_hi}]")
    grid = [e_lo]
    e = e_lo
    while e < e_hi:
        h = step(e)
        if not h > 0:
            raise DomainError(f"scan step must be positive, got {h} at {e}")
        e = min(e + h, e_hi)
        grid.append(e)
    return np.array(grid)


def brackets_from_samples(grid, values):
    out = []
    for k in range(len(grid) - 1):
        f0, f1 = values[k], values[k + 1]
        if f0 == 0 and k > 0:
            continue  # already reported as the right end of the previous cell
        if f0 * f1 < 0 or f0 == 0 or (f1 == 0 and k == len(grid) - 2):
            out.append(RootBracket(float(grid[k]), float(grid[k + 1]), float(f0), float(f1)))
    return out


def scan_brackets(f, e_lo, e_hi, step, vectorized=False):
    """Sample ``f`` on an adaptive grid and return one bracket per sign change.

    ``step`` maps a grid point to the distance to the next one.  With
    ``vectorized=True`` the whole grid is passed to ``f`` in one call.
    """
    grid = scan_grid(e_lo, e_hi, step)
    if vectorized:
        values = np.asarray(f(grid), dtype=float)
    else:
        values = np.array([float(f(e)) for e in grid])
    return brackets_from_samples(grid, values)


def refine_brackets(f, brackets, tol=1e-10, max_iter=200, indexed=False):
    """Vectorised Illinois iteration on many brackets at once.

    ``f`` takes an array of abscissae and returns the function values; with
    ``indexed=True`` it is called as ``f(x, idx)`` where ``idx`` holds the
    positions of the active brackets.  Used where every evaluation is
    expensive but batches cheaply (shooting).
    """
    if not brackets:
        return np.empty(0)
    lo = np.array([b.lo for b in brackets])
    hi = np.array([b.hi for b in brackets])
    f_lo = np.array([b.f_lo for b in brackets])
    f_hi = np.array([b.f_hi for b in brackets])
    root = np.where(f_lo == 0, lo, np.where(f_hi == 0, hi, np.nan))
    side = np.zeros(len(lo), dtype=int)
    for _ in range(max_iter):
        active = np.isnan(root) & (hi - lo > tol)
        if not active.any():
            break
        x = lo - f_lo * (hi - lo) / (f_hi - f_lo)
        bad = ~np.isfinite(x) | (x <= lo) | (x >= hi)
        x = np.where(bad, 0.5 * (lo + hi), x)
        # bisect when the bracket stagnates relative to its width
        fx = np.full(len(lo), np.nan)
        fx[active] = f(x[active], np.flatnonzero(active)) if indexed else f(x[active])
        hit = active & (fx == 0)
        root[hit] = x[hit]
        move_lo = active & ~hit & ((fx < 0) == (f_lo < 0))
        move_hi = active & ~hit & ~move_lo
        lo = np.where(move_lo, x, lo)
        f_lo = np.where(move_lo, fx, f_lo)
        hi = np.where(move_hi, x, hi)
        f_hi = np.where(move_hi, fx, f_hi)
        # Illinois: halve the retained end value when the same end survives twice
        f_hi = np.where(move_lo & (side == 1), 0.5 * f_hi, f_hi)
        f_lo = np.where(move_hi & (side == -1), 0.5 * f_lo, f_lo)
        side = np.where(move_lo, 1, np.where(move_hi, -1, side))
    rest = np.isnan(root)
    secant = lo - f_lo * (hi - lo) / (f_hi - f_lo)
    secant = np.where(np.isfinite(secant) & (secant >= lo) & (secant <= hi), secant, 0.5 * (lo + hi))
    root[rest] = secant[rest]
    return root
