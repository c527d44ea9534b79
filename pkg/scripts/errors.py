"""Typed errors shared by the library, the CLI and the API.

Every error carries the process exit code the CLI uses for it:
2 for invalid input, 3 for domain violations, 1 for I/O problems.
"""
from __future__ import annotations

from typing import Any, Dict


class SaltosError(Exception):
    exit_code = 1

    def __init__(self, message: str = "", **details: Any):
        super().__init__(message or self.__class__.__name__)
        self.message = message or self.__class__.__name__
        self.details = details

    def to_dict(self) -> Dict[str, Any]:
        payload: Dict[str, Any] = {
            "error": self.__class__.__name__,
            "message": self.message,
            "exit_code": self.exit_code,
        }
        if self.details:
            payload["details"] = self.details
        return payload


class InputOutputError(SaltosError):
    exit_code = 1


# ---------------------------------------------------------------------------
# validation (exit 2)
# ---------------------------------------------------------------------------

class ValidationError(SaltosError):
    exit_code = 2


class SchemaError(ValidationError):
    pass


class InvalidInterval(ValidationError):
    pass


class InvalidExpression(ValidationError):
    pass


class InvalidTrain(ValidationError):
    pass


class InvalidWeights(ValidationError):
    pass


class InvalidIndexSet(ValidationError):
    pass


class InvalidModel(ValidationError):
    pass


class NonpositiveEpsilon(ValidationError):
    pass


class NonpositiveTolerance(ValidationError):
    pass


class NegativeCoefficient(ValidationError):
    pass


class MismatchedDomains(ValidationError):
    pass


class OverlappingCells(ValidationError):
    pass


class OverlappingRectangles(ValidationError):
    pass


class MissingTailBound(ValidationError):
    pass


# ---------------------------------------------------------------------------
# domain (exit 3)
# ---------------------------------------------------------------------------

class DomainError(SaltosError):
    exit_code = 3


class OutOfDomain(DomainError):
    pass


class NoLeftNeighborhood(DomainError):
    pass


class NoRightNeighborhood(DomainError):
    pass


class BoundaryPoint(DomainError):
    pass


class BNotInL(DomainError):
    pass


class NotSummable(DomainError):
    pass


class SizeSetTouchesZero(DomainError):
    pass


class UnboundedWindowWithoutCertificate(DomainError):
    pass


class UncertifiedSum(DomainError):
    """Neither a finite tail nor a divergence certificate is available."""


class InvariantViolation(DomainError):
    """A proven bound failed numerically; always a bug or a bad rule."""


class ResolutionLimit(DomainError):
    """The request needs generated atoms whose locations float64 cannot separate."""
