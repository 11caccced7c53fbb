"""Error vocabulary shared by every layer of the toolkit.

Each exception carries a machine ``code`` (stable, used by the CLI and the
HTTP service) and an ``http_status`` hint. Validation routines that must
report *all* problems at once return lists of :class:`Issue` instead of
raising; the two worlds share the same code strings.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any


@dataclass(frozen=True)
class Issue:
    """One entry of a validation report."""

    code: str
    message: str
    where: str = ""

    def __str__(self) -> str:
        if self.where:
            return f"{self.code} at {self.where}: {self.message}"
        return f"{self.code}: {self.message}"


class ScsError(Exception):
    """Base class; ``code`` is the machine-readable error name."""

    code = "Error"
    http_status = 500

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details = details

    def as_dict(self) -> dict[str, Any]:
        return {"code": self.code, "message": self.message, "details": self.details}


class InvalidDocumentError(ScsError):
    code = "InvalidDocument"
    http_status = 400


# --- ontology load / lookup -------------------------------------------------

class DuplicateIdError(ScsError):
    code = "DuplicateId"
    http_status = 400


class DanglingReferenceError(ScsError):
    code = "DanglingReference"
    http_status = 400


class CycleDetectedError(ScsError):
    code = "CycleDetected"
    http_status = 400


class MissingRootError(ScsError):
    code = "MissingRoot"
    http_status = 400


class EmptyConceptSetError(ScsError):
    code = "EmptyConceptSet"
    http_status = 400


class UnknownIdError(ScsError):
    code = "UnknownId"
    http_status = 404


class UnknownMarkerError(ScsError):
    code = "UnknownMarker"
    http_status = 404


# --- graph operations ---------------------------------------------------------

class NotASubtypeError(ScsError):
    code = "NotASubtype"
    http_status = 400


class NonConformingMarkerError(ScsError):
    code = "NonConformingMarker"
    http_status = 400


class AlreadyIndividualError(ScsError):
    code = "AlreadyIndividual"
    http_status = 400


class IncompatibleTypesError(ScsError):
    code = "IncompatibleTypes"
    http_status = 400


class ConflictingMarkersError(ScsError):
    code = "ConflictingMarkers"
    http_status = 400


class InvalidGraphError(ScsError):
    code = "InvalidGraph"
    http_status = 400

    def __init__(self, message: str, issues: list[Issue] | None = None, **details: Any):
        super().__init__(message, **details)
        self.issues = issues or []

    def as_dict(self) -> dict[str, Any]:
        out = super().as_dict()
        out["details"] = dict(out["details"], issues=[vars(i) for i in self.issues])
        return out


class NoDefinitionError(ScsError):
    code = "NoDefinition"
    http_status = 400


class JoinFailureError(ScsError):
    code = "JoinFailure"
    http_status = 400


# --- corpus -------------------------------------------------------------------

class InvalidModelError(ScsError):
    code = "InvalidModel"
    http_status = 400


class UnknownStratumError(ScsError):
    code = "UnknownStratum"
    http_status = 400


class UnknownMediaError(ScsError):
    code = "UnknownMedia"
    http_status = 404


class TimecodeOutOfRangeError(ScsError):
    code = "TimecodeOutOfRange"
    http_status = 400


class AnnotationInvalidError(ScsError):
    code = "AnnotationInvalid"
    http_status = 400

    def __init__(self, message: str, issues: list[Issue] | None = None, **details: Any):
        super().__init__(message, **details)
        self.issues = issues or []

    def as_dict(self) -> dict[str, Any]:
        out = super().as_dict()
        out["details"] = dict(out["details"], issues=[vars(i) for i in self.issues])
        return out


# --- storyteller ----------------------------------------------------------------

class InvalidRequirementError(ScsError):
    code = "InvalidRequirement"
    http_status = 400


class InvalidScenarioError(ScsError):
    code = "InvalidScenario"
    http_status = 400

    def __init__(self, message: str, issues: list[Issue] | None = None, **details: Any):
        super().__init__(message, **details)
        self.issues = issues or []


class UnknownScenarioError(ScsError):
    code = "UnknownScenario"
    http_status = 404


# --- interface --------------------------------------------------------------------

class VersionConflictError(ScsError):
    code = "VersionConflict"
    http_status = 409


class WorkspaceIOError(ScsError):
    code = "IoError"
    http_status = 500
