"""
Error hierarchy shared by every verification module.

Each error carries a machine-readable `kind` and a details dict so the CLI can
emit a one-line JSON error object.
"""
from typing import Any, Dict


class VerificationError(RuntimeError):
    kind = "error"

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details: Dict[str, Any] = details

    def to_dict(self) -> Dict[str, Any]:
        return {"error": self.kind, "message": self.message, "details": self.details}


class CapacityError(VerificationError):
    kind = "capacity"


class OutOfRangeError(VerificationError):
    kind = "out_of_range"


class DomainError(VerificationError):
    kind = "domain"


class IndecisiveVerdictError(VerificationError):
    kind = "indecisive"


class UncoverableIntervalError(VerificationError):
    kind = "uncoverable"


class CertificateError(VerificationError):
    kind = "certificate"
