"""
Subcommand handlers.

Each handler takes the parsed arguments and the RunConfig and returns a
CommandResult: the verdict, one JSON document for stdout, and the records
that go to the --out journal.
"""
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Union

from mpmath import iv
from pydantic import BaseModel

from src.abc_verifier import (
    VolProvider,
    corollary33_check,
    sweep_summary,
    sweep_theorem32,
    tail_constants_check,
)
from src.abc_verifier.sweep import DEFAULT_H_LO, DEFAULT_STEP_RATIO, e31_upper, geometric_grid
from src.analytic_bounds import CONSTANTS, auxiliary_certificate, f3_f4_check, f3_f4_grid, sweep_f1
from src.analytic_bounds.functions import window_bounds
from src.core.clock import Stopwatch
from src.core.config import PRECISION_BITS, DeterministicRNG, RunConfig
from src.core.enclosure import LOG_PI
from src.core.errors import DomainError
from src.core.journal import CertificateJournal
from src.core.logger import get_logger
from src.core.types import SCHEMA_VERSION, ExclusionCertificateModel
from src.core.verdict import VerdictStatus, combine
from src.fermat_bounds import (
    cap_check,
    cor48_33n_check,
    flt_contradiction,
    radical_bound_check,
    table1,
    table1_report,
)
from src.fermat_bounds.corollaries import FERMAT_BOUND, LITERATURE_33N
from src.fermat_bounds.radical import is_catalan_exception
from src.fermat_bounds.table1 import H_CAP, TOLERANCE
from src.local_volume import make_family, parse_method, vol
from src.local_volume.volume import VolMethod
from src.power_search import CATALOG, run_search, verify_catalog
from src.prime_tables import PrimeTables, build_tables, find_cached_tables, save_tables
from src.prime_tables.cache import cache_filename

logger = get_logger(__name__)

Record = Union[BaseModel, Dict[str, Any]]

DEFAULT_ABC_LIMIT = 100_000_000
DEFAULT_TABLE1_LIMIT = 1_000_000
AUX_LIMIT = 10 * CONSTANTS.A
F1_SWEEP_HI = 10 * CONSTANTS.A


@dataclass
class CommandResult:
    status: VerdictStatus
    payload: Dict[str, Any]
    records: List[Record] = field(default_factory=list)
    # records already written to the journal while the command ran
    streamed: bool = False


# --- argument parsing helpers ---

def parse_exponent(text: str) -> Optional[Fraction]:
    """'e31' or 'e^31' -> 31; None for a plain number."""
    text = text.strip()
    if text.startswith("e"):
        return Fraction(text[1:].lstrip("^"))
    return None


def parse_height(text: str) -> float:
    """A height given as a number or as e<exponent>; the exponential form is rounded up."""
    exponent = parse_exponent(text)
    if exponent is None:
        return float(text)
    value = iv.exp(iv.mpf(exponent.numerator) / exponent.denominator)
    return float(value.b)


def parse_log_x(text: str) -> Fraction:
    exponent = parse_exponent(text)
    if exponent is not None:
        return exponent
    x = float(text)
    if x <= 1:
        raise DomainError("x must exceed 1", x=text)
    return Fraction(math.log(x))


def _dump(record: Record) -> Dict[str, Any]:
    return record.model_dump(mode="json") if isinstance(record, BaseModel) else record


def _stamp(payload: Dict[str, Any], config: RunConfig) -> Dict[str, Any]:
    payload.setdefault("schema", SCHEMA_VERSION)
    payload.setdefault("config_hash", config.config_hash())
    return payload


def _single(record: BaseModel, config: RunConfig) -> CommandResult:
    if "config_hash" in type(record).model_fields:
        record = record.model_copy(update={"config_hash": config.config_hash()})
    return CommandResult(record.status, _stamp(_dump(record), config), [record])


# --- prime tables ---

def obtain_tables(config: RunConfig, limit: int) -> PrimeTables:
    """A cached table covering limit, else a fresh build saved into the cache directory."""
    cached = find_cached_tables(config.table_cache, limit, DeterministicRNG(config.seed))
    if cached is not None:
        return cached
    tables = build_tables(limit, workers=config.workers)
    save_tables(tables, os.path.join(config.table_cache, cache_filename(limit)))
    return tables


def cmd_sieve(args, config: RunConfig) -> CommandResult:
    watch = Stopwatch()
    tables = build_tables(args.limit, workers=config.workers)
    path = args.table_out or os.path.join(config.table_cache, cache_filename(args.limit))
    save_tables(tables, path)
    payload = {"kind": "sieve", "status": VerdictStatus.PASS.value, "path": path, "duration_ms": watch.elapsed_ms()}
    payload.update(tables.summary())
    return CommandResult(VerdictStatus.PASS, _stamp(payload, config))


# --- local volume ---

def cmd_vol(args, config: RunConfig) -> CommandResult:
    method = parse_method(args.method)
    dataset = make_family(args.l, args.variant)
    tables = None
    if method in (VolMethod.CLOSED_FORM, VolMethod.F2_BOUND):
        need = max(3 * args.l, dataset.base_index * args.l) + 2
        tables = obtain_tables(config, max(need, args.limit or 0))
    result = vol(dataset, method, tables)
    payload = {"kind": "vol", "status": VerdictStatus.PASS.value, **result.to_dict()}
    if method == VolMethod.EXACT:
        payload["above_log_pi"] = result.value.definitely_gt(LOG_PI)
    return CommandResult(VerdictStatus.PASS, _stamp(payload, config))


# --- analytic bounds ---

def cmd_sweep_f1(args, config: RunConfig) -> CommandResult:
    n_hi = args.n_to if args.n_to is not None else F1_SWEEP_HI
    tables = obtain_tables(config, max(n_hi, args.limit or 0))
    extended = PRECISION_BITS["extended"] if config.precision == "extended" else None
    cert = sweep_f1(args.n_from, n_hi, tables, chunk=args.chunk, workers=config.workers, extended_prec=extended)
    return _single(cert, config)


def cmd_check_f3f4(args, config: RunConfig) -> CommandResult:
    log_lo = parse_log_x(args.x)
    log_hi = parse_log_x(args.to) if args.to else log_lo
    _, need = window_bounds(max(log_lo, log_hi))
    tables = obtain_tables(config, max(need + 1, args.limit or 0))
    if log_hi == log_lo:
        return _single(f3_f4_check(log_lo, tables), config)
    return _single(f3_f4_grid(log_lo, log_hi, args.points, tables), config)


def cmd_check_aux(args, config: RunConfig) -> CommandResult:
    tables = obtain_tables(config, max(AUX_LIMIT, args.limit or 0))
    return _single(auxiliary_certificate(tables), config)


# --- abc verifier ---

def _resume_records(config: RunConfig) -> Optional[List[ExclusionCertificateModel]]:
    if not (config.resume and config.out and os.path.exists(config.out)):
        return None
    existing = list(CertificateJournal.replay_typed(config.out, ExclusionCertificateModel))
    logger.info("resume_loaded", path=config.out, certificates=len(existing))
    return existing


def cmd_sweep_abc(args, config: RunConfig) -> CommandResult:
    watch = Stopwatch()
    h_lo = parse_height(args.h_min)
    h_hi = parse_height(args.h_max) if args.h_max else e31_upper()
    tables = obtain_tables(config, args.limit or DEFAULT_ABC_LIMIT)
    provider = VolProvider(
        tables,
        variant=args.variant,
        exact_max_l=args.exact_max_l,
        large_method=parse_method(args.large_method),
    )
    resume_from = _resume_records(config)
    journal = CertificateJournal(config.out) if config.out else None
    try:
        certs = sweep_theorem32(
            tables,
            h_lo=h_lo,
            h_hi=h_hi,
            step_ratio=args.step,
            provider=provider,
            workers=config.workers,
            journal=journal,
            resume_from=resume_from,
            allow_13=args.allow_13,
        )
    finally:
        if journal is not None:
            journal.close()
    grid = geometric_grid(h_lo, h_hi, args.step)
    summary = sweep_summary(certs, grid[0], grid[-1], args.step, tables.limit, watch.elapsed_ms(), config.config_hash())
    payload = {"kind": "abc_sweep_report", "status": summary.status.value, "summary": _dump(summary)}
    if journal is None:
        payload["certificates"] = [_dump(c) for c in certs]
    return CommandResult(summary.status, _stamp(payload, config), [summary], streamed=journal is not None)


def cmd_check_cor33(args, config: RunConfig) -> CommandResult:
    certs = [corollary33_check(), tail_constants_check()]
    certs = [c.model_copy(update={"config_hash": config.config_hash()}) for c in certs]
    status = combine(c.status for c in certs)
    payload = {"kind": "cor33_report", "status": status.value, "certificates": [_dump(c) for c in certs]}
    return CommandResult(status, _stamp(payload, config), certs)


# --- fermat bounds ---

def cmd_table1(args, config: RunConfig) -> CommandResult:
    tables = obtain_tables(config, args.limit or DEFAULT_TABLE1_LIMIT)
    vol_constant = Fraction(args.vol_constant) if args.vol_constant else None
    journal = CertificateJournal(config.out) if config.out else None
    try:
        rows = table1(
            tables,
            rows=args.rows,
            workers=config.workers,
            tolerance=args.tolerance,
            cap=args.cap,
            journal=journal,
            vol_constant=vol_constant,
        )
        cap = None if args.skip_cap else cap_check(args.cap)
        if journal is not None and cap is not None:
            journal.append(cap)
    finally:
        if journal is not None:
            journal.close()
    report = table1_report(rows, cap, config.config_hash())
    status = VerdictStatus(report["status"])
    return CommandResult(status, _stamp(report, config), [], streamed=journal is not None)


def cmd_flt(args, config: RunConfig) -> CommandResult:
    return _single(flt_contradiction(args.p, Fraction(args.bound)), config)


def cmd_cor48(args, config: RunConfig) -> CommandResult:
    return _single(cor48_33n_check(Fraction(args.bound), args.literature), config)


# --- power search ---

def cmd_search(args, config: RunConfig) -> CommandResult:
    workers = args.threads or config.workers
    report = run_search(
        parse_height(args.h_max),
        args.min_exp,
        primitive_only=not args.all,
        workers=workers,
        with_one_plus=not args.no_one_plus,
    )
    return CommandResult(report.status, _stamp(_dump(report), config), [report])


def cmd_verify_catalog(args, config: RunConfig) -> CommandResult:
    cert = verify_catalog()
    checked = [sol for sol in CATALOG if not is_catalan_exception(*sol.as_tuple)]
    radical = {str(sol): radical_bound_check(sol.as_tuple) for sol in checked}
    status = VerdictStatus.PASS if all(radical.values()) else VerdictStatus.FAIL
    cert = cert.model_copy(
        update={
            "status": status,
            "details": {**cert.details, "radical_bounds": radical},
            "config_hash": config.config_hash(),
        }
    )
    return CommandResult(status, _stamp(_dump(cert), config), [cert])


def cmd_recheck(args, config: RunConfig) -> CommandResult:
    from .recheck import recheck_file

    report = recheck_file(args.cert, config, limit=args.limit)
    return CommandResult(VerdictStatus(report["status"]), _stamp(report, config))


HANDLERS = {
    "sieve": cmd_sieve,
    "vol": cmd_vol,
    "sweep-f1": cmd_sweep_f1,
    "check-f3f4": cmd_check_f3f4,
    "check-aux": cmd_check_aux,
    "sweep-abc": cmd_sweep_abc,
    "check-cor33": cmd_check_cor33,
    "table1": cmd_table1,
    "flt": cmd_flt,
    "cor48": cmd_cor48,
    "search": cmd_search,
    "verify-catalog": cmd_verify_catalog,
    "recheck": cmd_recheck,
}

DEFAULTS = {
    "h_min": str(DEFAULT_H_LO),
    "step": DEFAULT_STEP_RATIO,
    "tolerance": TOLERANCE,
    "cap": H_CAP,
    "fermat_bound": FERMAT_BOUND,
    "literature": LITERATURE_33N,
}
