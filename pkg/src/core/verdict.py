"""
Verdicts and the frozen exit-code contract.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Optional


class VerdictStatus(str, Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    ERROR = "ERROR"


# 0 = verified, 2 = counterexample/violation, 1 = error or indecisive
EXIT_CODES = {
    VerdictStatus.PASS: 0,
    VerdictStatus.FAIL: 2,
    VerdictStatus.ERROR: 1,
}


@dataclass
class Verdict:
    """
    Final verdict of a CLI run.
    """
    status: VerdictStatus
    command: str
    items_checked: int = 0
    error_message: Optional[str] = None

    def is_pass(self) -> bool:
        return self.status == VerdictStatus.PASS

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.status]

    def summary(self) -> str:
        if self.status == VerdictStatus.PASS:
            return f"PASS: {self.command} verified {self.items_checked} item(s)"
        elif self.status == VerdictStatus.FAIL:
            return f"FAIL: {self.command} found a violation in {self.items_checked} item(s)"
        else:
            return f"ERROR: {self.error_message}"


def combine(statuses) -> VerdictStatus:
    statuses = list(statuses)
    if any(s == VerdictStatus.ERROR for s in statuses):
        return VerdictStatus.ERROR
    if any(s == VerdictStatus.FAIL for s in statuses):
        return VerdictStatus.FAIL
    return VerdictStatus.PASS
