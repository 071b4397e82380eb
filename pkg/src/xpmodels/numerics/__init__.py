"""Numerical kernels shared by the physics modules."""
from .ode import OdePath, ode_integrate
from .quadrature import DEFAULT_QUADRATURE, HINTS, Quadrature, integrate
from .roots import RootBracket, find_root, refine_brackets, scan_brackets
from .special import bessel_k, bessel_k_log, elliptic_KE, log_integral

__all__ = [
    "DEFAULT_QUADRATURE", "HINTS", "OdePath", "Quadrature", "RootBracket",
    "bessel_k", "bessel_k_log", "elliptic_KE", "find_root", "integrate",
    "log_integral", "ode_integrate", "refine_brackets", "scan_brackets",
]
