"""
Exception hierarchy for the capillary verification toolkit.

Library code raises these; the verification service turns them into
failing report records.
"""

from typing import Any, Dict, Optional


class CapillaryError(Exception):
    """Base class; carries optional structured details for reports"""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.details = details or {}


class ArgumentError(CapillaryError, ValueError):
    """Argument out of the documented range"""


class ValidationError(CapillaryError):
    """Input value violates a type invariant"""


class DomainError(CapillaryError):
    """Point outside the model domain"""


class NumericalConsistencyError(CapillaryError):
    """An internally asserted identity failed its tolerance"""


class PreconditionError(CapillaryError):
    """A hypothesis of the requested check does not hold"""


class DegenerateAngleError(CapillaryError):
    """Contact angle at 0 or pi"""


class DegenerateNormalizerError(CapillaryError):
    """A normalizing integral is too close to zero"""


class DiscretizationError(CapillaryError):
    """Degenerate node or unsupported grid"""


class ConstructionError(CapillaryError):
    """A surface family cannot be built from the given parameters"""


class BasisError(CapillaryError):
    """Galerkin basis is degenerate"""


class FlowBreakdownError(CapillaryError):
    """Immersion degenerated during a flow"""

    def __init__(self, message: str, step: int, details: Optional[Dict[str, Any]] = None):
        super().__init__(message, details)
        self.step = step


class UsageError(CapillaryError):
    """Command-line or config-file schema violation"""
