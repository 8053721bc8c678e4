"""Typed stage failures with the process exit codes the CLI maps them to."""

from __future__ import annotations

__all__ = [
    "StageFailure",
    "SpecError",
    "AuditFailure",
    "InadmissibleLambda",
    "CrossingFailure",
    "GeometryFailure",
    "SolverFailure",
    "EXIT_CODES",
]

EXIT_CODES = {
    "spec": 2,
    "audit": 3,
    "admissibility": 4,
    "crossing": 5,
    "geometry": 6,
    "solve": 7,
}


class StageFailure(Exception):
    """A pipeline stage failed; carries the stage name and a details payload."""

    stage = "unknown"

    def __init__(self, message, details=None):
        super().__init__(message)
        self.details = details or {}

    @property
    def exit_code(self):
        return EXIT_CODES[self.stage]

    def to_dict(self):
        return {
            "stage": self.stage,
            "exit_code": self.exit_code,
            "message": str(self),
            "details": self.details,
        }


class SpecError(StageFailure):
    stage = "spec"


class AuditFailure(StageFailure):
    stage = "audit"


class InadmissibleLambda(StageFailure):
    stage = "admissibility"


class CrossingFailure(StageFailure):
    stage = "crossing"


class GeometryFailure(StageFailure):
    stage = "geometry"


class SolverFailure(StageFailure):
    stage = "solve"
