"""Quantum spectra of the xp Hamiltonians.

Model I is solved through its Bessel secular equation, general unbounded
models by phase shooting, and the constant model in closed form.
"""
from .bessel import (
    counting_m25,
    level_indices,
    modelI_boundary_functional,
    modelI_eigenfunction,
    modelI_raw_residual,
    modelI_secular,
    modelI_spectrum,
    modelI_zero_mode,
    modelI_zero_mode_norm,
)
from .constant import (
    BoundState,
    OrthonormalityReport,
    ScatteringState,
    ap_ratio,
    bilinear_form,
    bilinear_matrix,
    bound_state,
    constant_model_scattering,
    constant_model_spectrum,
    orthonormality_check,
)
from .results import Extension, SpectrumResult, ZeroMode
from .selfadjoint import boundary_functional, impose_boundary_condition, omega12
from .shooting import PhaseShooter, phase_count, shoot_spectrum, zero_mode

__all__ = [
    "BoundState", "Extension", "OrthonormalityReport", "PhaseShooter", "ScatteringState",
    "SpectrumResult", "ZeroMode", "ap_ratio", "bilinear_form", "bilinear_matrix",
    "bound_state", "boundary_functional", "constant_model_scattering",
    "constant_model_spectrum", "counting_m25", "impose_boundary_condition", "level_indices",
    "modelI_boundary_functional", "modelI_eigenfunction", "modelI_raw_residual",
    "modelI_secular", "modelI_spectrum", "modelI_zero_mode", "modelI_zero_mode_norm",
    "omega12", "orthonormality_check", "phase_count", "shoot_spectrum", "zero_mode",
]
