"""Exception hierarchy.

Every error carries a short machine-readable ``code`` so the CLI can map
failures onto report entries without string matching.
"""

from __future__ import annotations


class OrbifoldError(Exception):
    code = "error"


# group_action
class OrderExceeded(OrbifoldError):
    code = "order_exceeded"


class NotOrthogonal(OrbifoldError):
    code = "not_orthogonal"


# simplicial
class NotSimplicial(OrbifoldError):
    code = "not_simplicial"


class NotManifold(OrbifoldError):
    code = "not_manifold"


class RequiresRegular(OrbifoldError):
    code = "requires_regular"


class EmptyBoundary(OrbifoldError):
    code = "empty_boundary"


class InvalidPresentation(OrbifoldError):
    code = "invalid_presentation"


# vector_field
class ParseError(OrbifoldError):
    code = "parse_error"


class EvalError(OrbifoldError):
    code = "eval_error"


class NewtonDivergence(OrbifoldError):
    code = "newton_divergence"


class ZeroOnBoundary(OrbifoldError):
    code = "zero_on_boundary"


class DegenerateZero(OrbifoldError):
    code = "degenerate_zero"


class FieldVanishesOnCircle(OrbifoldError):
    code = "field_vanishes_on_circle"


# exit_chain
class NotGeneric(OrbifoldError):
    code = "not_generic"


class FieldVanishesOnBoundary(OrbifoldError):
    code = "field_vanishes_on_boundary"


class UnsupportedDimension(OrbifoldError):
    code = "unsupported_dimension"


# doubling / inertia
class BoundaryZeroDegenerate(OrbifoldError):
    code = "boundary_zero_degenerate"


class SupportTooWide(OrbifoldError):
    code = "support_too_wide"


class MismatchDetected(OrbifoldError):
    code = "mismatch"

    def __init__(self, label: str, detail: str = "") -> None:
        self.label = label
        super().__init__(f"{label}: {detail}" if detail else label)


class InertiaMismatch(OrbifoldError):
    code = "inertia_mismatch"


class TangencyViolation(OrbifoldError):
    code = "tangency_violation"


# scenario
class ValidationError(OrbifoldError):
    code = "validation_error"

    def __init__(self, path: str, message: str) -> None:
        self.path = path
        super().__init__(f"{path}: {message}")


class ScenarioParseError(ParseError):
    """Scenario file is unreadable or not valid JSON."""
