"""Numerical integration of the truncated moment chain and symmetry defects."""
from ._kernels import BACKEND
from .verifier import (
    GridState, RefinementStudy, SimParams, apply_group_transform, characteristic_speed,
    closure_values, evolve, refinement_study, shift_periodic, symmetry_defect,
)

__all__ = [
    "BACKEND", "GridState", "SimParams", "RefinementStudy", "evolve", "apply_group_transform",
    "symmetry_defect", "refinement_study", "characteristic_speed", "closure_values",
    "shift_periodic",
]
