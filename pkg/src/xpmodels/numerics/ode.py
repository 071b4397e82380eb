"""Thin adaptive ODE driver on top of scipy's explicit Runge-Kutta solvers."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from ..errors import DomainError, IntegrationError


@dataclass
class OdePath:
    """Accepted steps of an integration.

    ``y`` has shape ``(n_state, n_steps)``.  ``sol`` is the dense interpolant
    when requested, ``t_events``/``y_events`` mirror :func:`solve_ivp`.
    """

    t: np.ndarray
    y: np.ndarray
    sol: object = None
    t_events: list = field(default_factory=list)
    y_events: list = field(default_factory=list)
    terminated: bool = False

    @property
    def final(self):
        return self.t[-1], self.y[:, -1]


def ode_integrate(fun, y0, t0, t1, tol=1e-10, *, atol=None, dense=False, t_eval=None,
                  events=None, max_step=np.inf, method="DOP853"):
    """Integrate ``y' = fun(t, y)`` from ``t0`` to ``t1``.

    ``tol`` is the relative local error target; ``atol`` defaults to
    ``tol * 1e-2``.  Backward integration (``t1 < t0``) is allowed and complex
    states are supported.

    Raises
    ------
    IntegrationError
        On step-size underflow or a non-finite state.  The exception carries
        the last accepted ``(t, y)``.
    """
    if t0 == t1:
        raise DomainError("ode_integrate needs t0 != t1")
    if not tol > 0:
        raise DomainError("tol must be positive")
    y0 = np.atleast_1d(np.asarray(y0))
    if not np.all(np.isfinite(y0)):
        raise DomainError("initial state is not finite")
    atol = tol * 1e-2 if atol is None else atol
    with np.errstate(over="ignore", invalid="ignore"):
        res = solve_ivp(fun, (t0, t1), y0, method=method, rtol=tol, atol=atol,
                        dense_output=dense, t_eval=t_eval, events=events, max_step=max_step)
    finite = np.all(np.isfinite(res.y), axis=0) if res.y.size else np.array([], bool)
    if res.status == -1 or not finite.all():
        good = np.flatnonzero(finite)
        last_t = res.t[good[-1]] if good.size else t0
        last_y = res.y[:, good[-1]] if good.size else y0
        raise IntegrationError(f"integration failed near t = {last_t!r}: {res.message}",
                               last_t=last_t, last_y=last_y)
    return OdePath(t=res.t, y=res.y, sol=res.sol,
                   t_events=list(res.t_events or []), y_events=list(res.y_events or []),
                   terminated=res.status == 1)
