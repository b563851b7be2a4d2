"""Tiny shared record type for verification suite results."""

from __future__ import annotations

from dataclasses import dataclass, field

PASS = "pass"
FAIL = "fail"
REPORTED = "reported"


@dataclass
class CheckRecord:
    """Outcome of one named identity check.

    ``residual_terms`` counts the surviving terms of the residual object
    (polynomial or form); an assertive check passes iff it is zero.
    ``reported`` marks checks that record a residual without asserting.
    """

    check_id: str
    status: str
    residual_terms: int = 0
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.status == PASS


def assertive(check_id: str, residual_terms: int, detail: str = "") -> CheckRecord:
    status = PASS if residual_terms == 0 else FAIL
    return CheckRecord(check_id, status, residual_terms, detail)


def reported(check_id: str, residual_terms: int, detail: str = "") -> CheckRecord:
    return CheckRecord(check_id, REPORTED, residual_terms, detail)
