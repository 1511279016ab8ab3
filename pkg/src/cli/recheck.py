"""
Standalone re-validation of certificate files.

Every record is rebuilt from what it declares and re-derived from scratch;
nothing recorded is trusted except the inputs it names.
"""
import math
import os
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional

from src.abc_verifier import corollary33_check, revalidate_certificate, tail_constants_check
from src.analytic_bounds import f3_f4_check
from src.analytic_bounds.functions import window_bounds
from src.core.config import RunConfig
from src.core.enclosure import log_of
from src.core.errors import CertificateError
from src.core.journal import CertificateJournal
from src.core.logger import get_logger
from src.core.types import (
    CheckKind,
    ExclusionCertificateModel,
    SearchReport,
    SweepCertificate,
    Table1RowModel,
)
from src.core.verdict import VerdictStatus, combine
from src.fermat_bounds import chain_covers, cor48_33n_check, flt_contradiction, revalidate_exclusion
from src.fermat_bounds.table1 import H_CAP, cap_check
from src.power_search import verify_catalog
from src.prime_tables import PrimeTables

from .commands import obtain_tables

logger = get_logger(__name__)


def _tables_needed(records: List[Any]) -> int:
    need = 0
    for record in records:
        certs = []
        if isinstance(record, ExclusionCertificateModel):
            certs = [record]
        elif isinstance(record, Table1RowModel):
            certs = record.certificates
        for cert in certs:
            if cert.selection.get("vol_source", {}).get("source") == "constant" and cert.S:
                continue
            need = max(need, int(cert.selection.get("tables_limit", 0)), int(cert.selection.get("last", 0)))
        if isinstance(record, SweepCertificate) and record.kind == "f3_f4":
            _, b = window_bounds(Fraction(record.details["log_x"]))
            need = max(need, b + 1)
    return need


class Rechecker:
    """Dispatches records by kind."""

    def __init__(self, config: RunConfig, tables: Optional[PrimeTables] = None):
        self.config = config
        self.tables = tables

    def exclusion(self, cert: ExclusionCertificateModel) -> bool:
        if cert.check_kind == CheckKind.ABC_SWEEP:
            return revalidate_certificate(cert, self.tables)
        return revalidate_exclusion(cert, self.tables)

    def table1_row(self, row: Table1RowModel) -> bool:
        chain = sorted(row.certificates, key=lambda c: -c.upper)
        cap = float(row.extremal.get("cap", H_CAP))
        if not chain_covers(chain, row.h_bound.hi, cap):
            logger.warning("row_chain_gap", row=row.row)
            return False
        return all(revalidate_exclusion(c, self.tables) for c in chain)

    def search(self, report: SearchReport) -> bool:
        limit = report.h_max
        for sol in report.solutions:
            a, b, c = sol.x**sol.r, sol.y**sol.s, sol.z**sol.t
            if a + b != c:
                raise CertificateError("recorded solution is not an identity", solution=sol.model_dump())
            if math.gcd(math.gcd(sol.x, sol.y), sol.z) != 1 and sol.primitive:
                raise CertificateError("solution marked primitive is not", solution=sol.model_dump())
            if not log_of(a * b * c).definitely_lt(limit):
                return False
        return report.exhaustive == (not report.boundary)

    def sweep(self, cert: SweepCertificate) -> Optional[bool]:
        """Reruns the cheap checks; None for kinds that are only re-derivable by a full rerun."""
        rerun: Dict[str, Callable[[], SweepCertificate]] = {
            "catalog": verify_catalog,
            "cor33": corollary33_check,
            "tail_constants": tail_constants_check,
            "table1_cap": lambda: cap_check(cert.range[0], cert.range[1]),
            "flt": lambda: flt_contradiction(
                cert.details["p"], Fraction(cert.details["fermat_bound"]["hi"]), int(cert.range[1])
            ),
            "cor48_33n": lambda: cor48_33n_check(
                Fraction(cert.details["bound"]["hi"]), cert.details["literature"]
            ),
            "f3_f4": lambda: f3_f4_check(Fraction(cert.details["log_x"]), self.tables),
        }
        if cert.kind not in rerun:
            return None
        fresh = rerun[cert.kind]()
        return fresh.status == cert.status

    def check(self, record: Any) -> Optional[bool]:
        if isinstance(record, ExclusionCertificateModel):
            return self.exclusion(record)
        if isinstance(record, Table1RowModel):
            return self.table1_row(record)
        if isinstance(record, SearchReport):
            return self.search(record)
        if isinstance(record, SweepCertificate):
            return self.sweep(record)
        raise CertificateError("unrecognised record", type=type(record).__name__)


def recheck_file(path: str, config: RunConfig, limit: Optional[int] = None) -> Dict[str, Any]:
    if not os.path.isfile(path):
        raise CertificateError("certificate file not found", path=path)
    records = list(CertificateJournal.replay(path))
    if not records:
        raise CertificateError("no certificates in file", path=path)

    tables = None
    need = max(_tables_needed(records), limit or 0)
    if need:
        tables = obtain_tables(config, need)

    checker = Rechecker(config, tables)
    outcomes = []
    for i, record in enumerate(records):
        verdict = checker.check(record)
        outcomes.append({"index": i, "kind": getattr(record, "kind", None), "verified": verdict})
    statuses = [VerdictStatus.FAIL if o["verified"] is False else VerdictStatus.PASS for o in outcomes]
    status = combine(statuses)
    skipped = sum(1 for o in outcomes if o["verified"] is None)
    logger.info("recheck_done", path=path, records=len(records), skipped=skipped, status=status.value)
    return {
        "kind": "recheck",
        "status": status.value,
        "path": path,
        "records": len(records),
        "verified": sum(1 for o in outcomes if o["verified"]),
        "failed": [o for o in outcomes if o["verified"] is False],
        "skipped": [o for o in outcomes if o["verified"] is None],
    }
