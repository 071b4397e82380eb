"""scikit-learn style wrappers around the counting and inversion routines.

``SemiclassicalCounter`` maps energies to n(E) for a catalog model;
``CountingCurveInverter`` learns n(E) from samples and maps a w (or V) grid
to the recovered profile x.  Both follow the fit/transform protocol so they
can be chained or grid-searched.
"""
import numpy as np
from scipy.interpolate import PchipInterpolator
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .errors import DomainError, UsageError
from .models import make_model
from .semiclassics import abel_invert_standard, abel_invert_xp, count_states


class SemiclassicalCounter(BaseEstimator, TransformerMixin):
    """n(E) of a catalog model.

    Parameters
    ----------
    kind : str
    params : dict
    hbar : float
    """

    def __init__(self, kind="linear", params=None, hbar=1.0):
        self.kind = kind
        self.params = params
        self.hbar = hbar

    def fit(self, X=None, y=None):
        self.model_ = make_model(self.kind, self.params or {}, self.hbar)
        return self

    def transform(self, X):
        check_is_fitted(self, "model_")
        E = np.asarray(X, dtype=float).reshape(-1)
        return np.array([count_states(self.model_, e) for e in E])


class CountingCurveInverter(BaseEstimator, TransformerMixin):
    """Recover x(w) (family ``xp``) or x(V) (family ``standard``) from samples of n(E).

    The samples are interpolated by a monotone PCHIP curve whose derivative
    supplies dn/dE.  For the xp family the curve must cover [2 w0, 2 w_max].

    Parameters
    ----------
    family : {'xp', 'standard'}
    w0 : float
        Threshold w0 (xp) or potential minimum V0 (standard).
    x0 : float
        Position of the threshold (xp only).
    hbar : float
    """

    def __init__(self, family="xp", w0=1.0, x0=None, hbar=1.0):
        self.family = family
        self.w0 = w0
        self.x0 = x0
        self.hbar = hbar

    def fit(self, X, y):
        if self.family not in ("xp", "standard"):
            raise UsageError(f"unknown family {self.family!r}")
        E = np.asarray(X, dtype=float).reshape(-1)
        n = np.asarray(y, dtype=float).reshape(-1)
        if E.shape != n.shape or E.size < 4:
            raise DomainError("need at least four (E, n) samples")
        order = np.argsort(E)
        E, n = E[order], n[order]
        if np.any(np.diff(E) <= 0):
            raise DomainError("energies must be distinct")
        self.curve_ = PchipInterpolator(E, n, extrapolate=False)
        self.slope_ = self.curve_.derivative()
        self.E_range_ = (float(E[0]), float(E[-1]))
        return self

    def _n(self, E):
        return float(self.curve_(E))

    def _dn(self, E):
        return float(self.slope_(E))

    def transform(self, X):
        check_is_fitted(self, "curve_")
        grid = np.asarray(X, dtype=float).reshape(-1)
        lo, hi = self.E_range_
        if self.family == "xp":
            if 2 * grid[-1] > hi * (1 + 1e-12) or 2 * self.w0 < lo * (1 - 1e-12):
                raise DomainError("n(E) samples must cover [2 w0, 2 max(w)]")
            x0 = self.w0 if self.x0 is None else self.x0
            res = abel_invert_xp(self._n, grid, self.w0, x0, self.hbar, dn=self._dn)
        else:
            if grid[-1] > hi or self.w0 < lo:
                raise DomainError("n(E) samples must cover [V0, max(V)]")
            res = abel_invert_standard(self._n, grid, self.w0, self.hbar, dn=self._dn)
        self.result_ = res
        return res.x
