"""Orbifold Poincare-Hopf verification for global quotients M/G."""

from .doubling import build_doubled_field, verify_double_index
from .errors import OrbifoldError
from .euler_satake import chi_orb, chi_orb_relative, chi_underlying
from .exit_chain import compute_chain, verify_generic_contact
from .group_action import GroupAction, GroupElement, close_group, conjugacy_classes, validate_codimension2
from .inertia import build_sectors, chi_orb_inertia, verify_corollary
from .pipeline import VerificationReport, run_verify
from .scenario import Scenario, load_scenario
from .simplicial import QuotientPresentation, SimplicialComplex, double_complex
from .vector_field import FieldExpr, orbifold_index_sum, winding_number_2d

__version__ = "0.1.0"

__all__ = [
    "FieldExpr",
    "GroupAction",
    "GroupElement",
    "OrbifoldError",
    "QuotientPresentation",
    "Scenario",
    "SimplicialComplex",
    "VerificationReport",
    "build_doubled_field",
    "build_sectors",
    "chi_orb",
    "chi_orb_inertia",
    "chi_orb_relative",
    "chi_underlying",
    "close_group",
    "compute_chain",
    "conjugacy_classes",
    "double_complex",
    "load_scenario",
    "orbifold_index_sum",
    "run_verify",
    "validate_codimension2",
    "verify_corollary",
    "verify_double_index",
    "verify_generic_contact",
    "winding_number_2d",
]
