"""Numerics for the covariant family of xp Hamiltonians H = U(x) p + V(x)/p."""
__version__ = "0.1.0"
