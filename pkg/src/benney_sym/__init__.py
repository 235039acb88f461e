"""Symmetry coordinates of the Benney moment chain in exact arithmetic."""
from .determining_solver import EtaMatrix, EtaRow, generate_eta_matrix, generate_eta_row
from .graded_poly import A, Ax, Axx, Polynomial, T, X, euler_reconstruct, parse_polynomial, weighted_degree
from .operator_engine import (
    CanonicalOperator, Form, PointGeneratorId, VerificationReport, embed_point_symmetry,
    kupershmidt_check, lie_bracket, point_generators, verify_jet, verify_restricted,
)

__version__ = "0.1.0"

__all__ = [
    "A", "Ax", "Axx", "T", "X", "Polynomial", "parse_polynomial", "weighted_degree",
    "euler_reconstruct", "EtaRow", "EtaMatrix", "generate_eta_row", "generate_eta_matrix",
    "CanonicalOperator", "Form", "PointGeneratorId", "VerificationReport", "verify_restricted",
    "verify_jet", "point_generators", "embed_point_symmetry", "lie_bracket", "kupershmidt_check",
]
