"""
Certified sweeps over the prime-sum estimates.

sweep_f1 checks f1(n) < n/2 + 0.01865·n/log n for every integer n of a range.
The range is cut into chunks; each chunk is seeded by direct table queries at
its left end and advanced with numpy cumulative sums over the primes inside it.
All float quantities are pushed to the unfavourable side by explicit relative
budgets, so a chunk passes only if every n passes with its upper bound.
"""
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from src.core.clock import Stopwatch
from src.core.enclosure import UNIT_ROUNDOFF, Enclosure, log_of, require_lt
from src.core.errors import DomainError, IndecisiveVerdictError, OutOfRangeError
from src.core.logger import get_logger
from src.core.types import EnclosureModel, SweepCertificate
from src.core.verdict import VerdictStatus
from src.core.workers import ordered_map
from src.prime_tables.tables import TERM_ULPS, PrimeTables, prime_terms

from .constants import CONSTANTS
from .functions import f1, f1_extended, f1_target, f3_f4_exact, f3_lower_bound, f4_upper_bound

logger = get_logger(__name__)

DEFAULT_CHUNK = 1 << 20
MAX_REPORTED = 20

_TABLES: Optional[PrimeTables] = None


def _install_tables(tables: PrimeTables):
    global _TABLES
    _TABLES = tables


@dataclass
class ChunkOutcome:
    lo: int
    hi: int
    worst_margin: float
    worst_n: int
    rechecked: int = 0
    violations: List[int] = field(default_factory=list)


def _cum(terms: np.ndarray) -> np.ndarray:
    out = np.zeros(terms.size + 1, dtype=np.float64)
    np.cumsum(terms, out=out[1:])
    return out


def _sqrt_term_upper(ns: np.ndarray, tables: PrimeTables) -> np.ndarray:
    """Upper bounds of Σ_{(p−1)² < n} log(n/(p−1)) for every n in ns."""
    top = int(ns[-1])
    small = tables.primes_in_array(0, math.isqrt(top - 1) + 1)
    lpm1 = _cum(np.log(small.astype(np.float64) - 1.0))

    r = np.floor(np.sqrt((ns - 1).astype(np.float64))).astype(np.int64)
    r -= (r * r > ns - 1).astype(np.int64)
    r += ((r + 1) * (r + 1) <= ns - 1).astype(np.int64)
    count = np.searchsorted(small, r + 1, side="right")

    u = UNIT_ROUNDOFF
    return count * np.log(ns.astype(np.float64)) * (1 + 4 * u) - lpm1[count] * (1 - (small.size + 4) * u)


def f1_upper_at(ns: np.ndarray, tables: PrimeTables) -> np.ndarray:
    """
    Upper bounds of f1(n) for a sorted int64 array ns (n ≥ 4). Sums are seeded
    by direct table queries at ns[0] − 1 and advanced over the primes up to ns[-1].
    """
    if ns.size == 0:
        return np.zeros(0, dtype=np.float64)
    lo, hi = int(ns[0]), int(ns[-1])
    if lo < 4:
        raise DomainError("f1 needs n >= 4", n=lo)
    seed_s1 = tables.sum_logp_over_pm1(lo - 1)
    seed_th = tables.theta(lo - 1)
    seed_p = tables.sum_plogp(lo - 1)

    primes = tables.primes_in_array(lo - 1, hi)
    logp, plogp, lpm1 = prime_terms(primes)
    idx = np.searchsorted(primes, ns, side="right")
    rel = (TERM_ULPS + primes.size + 4) * UNIT_ROUNDOFF * 1.01

    s1_hi = (seed_s1.hi + _cum(lpm1)[idx]) * (1 + rel)
    th_hi = (seed_th.hi + _cum(logp)[idx]) * (1 + rel)
    p_lo = (seed_p.lo + _cum(plogp)[idx]) * (1 - rel)
    sq_hi = _sqrt_term_upper(ns, tables)

    nf = ns.astype(np.float64)
    raw = s1_hi + th_hi + th_hi / nf - p_lo / nf + sq_hi
    envelope = 8 * UNIT_ROUNDOFF * (s1_hi + 2 * th_hi + p_lo / nf + np.abs(sq_hi))
    return raw + envelope


def f1_chunk_upper(lo: int, hi: int, tables: PrimeTables) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    (n, upper bound of f1(n), lower bound of the target) for n in [lo, hi].
    """
    ns = np.arange(lo, hi + 1, dtype=np.int64)
    nf = ns.astype(np.float64)
    target = float(CONSTANTS.f1_slope) * nf + float(CONSTANTS.f1_fringe) * nf / np.log(nf)
    return ns, f1_upper_at(ns, tables), target * (1 - 16 * UNIT_ROUNDOFF)


def _direct_below_target(n: int, tables: PrimeTables, extended_prec: Optional[int]) -> bool:
    target = f1_target(n)
    try:
        return require_lt(f1(n, tables), target, "f1 below its linear target", n=n)
    except IndecisiveVerdictError:
        if extended_prec is None:
            raise
        logger.warning("f1_extended_retry", n=n, prec=extended_prec)
        return require_lt(f1_extended(n, tables, extended_prec), target, "f1 below its linear target", n=n, prec=extended_prec)


def _f1_chunk_task(task) -> ChunkOutcome:
    lo, hi, extended_prec = task
    tables = _TABLES
    ns, f1_hi, target_lo = f1_chunk_upper(lo, hi, tables)
    margin = target_lo - f1_hi
    k = int(np.argmin(margin))
    outcome = ChunkOutcome(lo=lo, hi=hi, worst_margin=float(margin[k]), worst_n=int(ns[k]))

    for n in ns[margin <= 0]:
        # undecided by the chunk bound: fall back to the direct enclosure
        n = int(n)
        outcome.rechecked += 1
        if _direct_below_target(n, tables, extended_prec):
            continue
        outcome.violations.append(n)
    return outcome


def sweep_f1(
    n_lo: int,
    n_hi: int,
    tables: PrimeTables,
    chunk: int = DEFAULT_CHUNK,
    workers: int = 1,
    extended_prec: Optional[int] = None,
) -> SweepCertificate:
    """
    f1(n) below its linear target for every integer n in [n_lo, n_hi]. Points the
    chunk bound leaves open get a direct enclosure; with extended_prec set, points
    that one leaves open are re-evaluated in mpmath at that many bits.
    """
    if n_lo < 4 or n_hi < n_lo:
        raise DomainError("bad f1 sweep range", n_lo=n_lo, n_hi=n_hi)
    if tables.limit < n_hi:
        raise OutOfRangeError("tables too small for the f1 sweep", need=n_hi, limit=tables.limit)

    watch = Stopwatch()
    tasks = [(lo, min(lo + chunk - 1, n_hi), extended_prec) for lo in range(n_lo, n_hi + 1, chunk)]
    outcomes = ordered_map(
        _f1_chunk_task, tasks, workers=workers, initializer=_install_tables, initargs=(tables,), label="f1_chunks"
    )

    worst = min(outcomes, key=lambda o: o.worst_margin)
    violations = [n for o in outcomes for n in o.violations]
    status = VerdictStatus.FAIL if violations else VerdictStatus.PASS
    logger.info(
        "f1_sweep_done",
        n_lo=n_lo,
        n_hi=n_hi,
        chunks=len(tasks),
        status=status.value,
        worst_n=worst.worst_n,
        duration_ms=watch.elapsed_ms(),
    )
    return SweepCertificate(
        kind="f1_sweep",
        status=status,
        range=[n_lo, n_hi],
        grid="every integer",
        worst_margin=EnclosureModel(lo=worst.worst_margin, hi=worst.worst_margin),
        tables_limit=tables.limit,
        points_checked=n_hi - n_lo + 1,
        duration_ms=watch.elapsed_ms(),
        details={
            "worst_n": worst.worst_n,
            "chunk": chunk,
            "chunks": len(tasks),
            "direct_rechecks": sum(o.rechecked for o in outcomes),
            "violations": violations[:MAX_REPORTED],
        },
        notes=["worst_margin is a certified lower bound of target(n) - f1(n)"],
    )


# --- f3 / f4 ---

def f3_f4_check(log_x: Fraction, tables: PrimeTables) -> SweepCertificate:
    """
    |S_x| ≥ f3 closed form and Σ_{S_x} p < f4 closed form at x = e^log_x.
    """
    log_x = Fraction(log_x)
    if log_x < CONSTANTS.f3_f4_min_log:
        raise DomainError("f3/f4 bounds are stated for x >= e^31", log_x=str(log_x))
    watch = Stopwatch()
    count, psum = f3_f4_exact(log_x, tables)
    f3_lb = f3_lower_bound(log_x)
    f4_ub = f4_upper_bound(log_x)
    ok3 = require_lt(f3_lb, Enclosure.from_int(count), "f3 lower bound", log_x=str(log_x))
    ok4 = require_lt(Enclosure.from_int(psum), f4_ub, "f4 upper bound", log_x=str(log_x))
    status = VerdictStatus.PASS if ok3 and ok4 else VerdictStatus.FAIL
    return SweepCertificate(
        kind="f3_f4",
        status=status,
        range=[float(log_x), float(log_x)],
        grid="log x",
        worst_margin=EnclosureModel.of((Enclosure.from_int(count) - f3_lb).minimum(f4_ub - Enclosure.from_int(psum))),
        tables_limit=tables.limit,
        points_checked=1,
        duration_ms=watch.elapsed_ms(),
        details={
            "log_x": str(log_x),
            "f3": count,
            "f3_lower": f3_lb.to_dict(),
            "f4": str(psum),
            "f4_upper": f4_ub.to_dict(),
        },
    )


def f3_f4_grid(log_lo: Fraction, log_hi: Fraction, points: int, tables: PrimeTables) -> SweepCertificate:
    if points < 2:
        raise DomainError("grid needs at least two points", points=points)
    watch = Stopwatch()
    log_lo, log_hi = Fraction(log_lo), Fraction(log_hi)
    grid = [log_lo + (log_hi - log_lo) * i / (points - 1) for i in range(points)]
    certs = [f3_f4_check(lx, tables) for lx in grid]
    failed = [c.details["log_x"] for c in certs if not c.is_pass()]
    worst = min(certs, key=lambda c: c.worst_margin.lo)
    return SweepCertificate(
        kind="f3_f4_grid",
        status=VerdictStatus.FAIL if failed else VerdictStatus.PASS,
        range=[float(log_lo), float(log_hi)],
        grid=f"{points} evenly spaced log x",
        worst_margin=worst.worst_margin,
        tables_limit=tables.limit,
        points_checked=points,
        duration_ms=watch.elapsed_ms(),
        details={"failed": failed, "points": [c.details for c in certs]},
    )


# --- auxiliary proof computations ---

@dataclass
class CheckResult:
    """A single inequality: passes when margin (right side minus left side) is positive."""
    name: str
    margin: Enclosure
    details: Dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.margin.lo > 0

    @property
    def decisive(self) -> bool:
        return self.margin.lo > 0 or self.margin.hi <= 0

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "margin": self.margin.to_dict(), **self.details}


def _frac(q: Fraction) -> Enclosure:
    return Enclosure.from_fraction(q)


def auxiliary_checks(tables: PrimeTables, A: int = CONSTANTS.A) -> List[CheckResult]:
    """
    The finite computations behind the f1 estimate at A and 10A.
    """
    eps = _frac(CONSTANTS.epsilon)
    A10 = 10 * A
    results: List[CheckResult] = []

    tail = tables.weighted_sum(lambda p: np.log(p) / (p * (p - 1.0)), A) + 1 / Enclosure.from_int(A).sqrt()
    results.append(CheckResult("recip_tail_below_cap", _frac(CONSTANTS.recip_sum_cap) - tail, {"x": A}))

    for x in (A, A10):
        lhs = tables.sum_logp_over_pm1(x)
        results.append(
            CheckResult("logp_over_pm1_below_log_x", log_of(x) + _frac(CONSTANTS.recip_sum_cap) - lhs, {"x": x})
        )

    A2 = Enclosure.from_int(A * A)
    head = tables.sum_plogp(A) - (_frac(CONSTANTS.f1_slope) + _frac(CONSTANTS.plogp_head) * eps / log_of(A)) * A2
    floor_ = -(_frac(CONSTANTS.plogp_slack) * eps * Enclosure.from_int(A10 * A10) / log_of(A10))
    results.append(CheckResult("plogp_head_above_floor", head - floor_, {"x": A}))

    lower = (_frac(CONSTANTS.f1_slope) - _frac(CONSTANTS.plogp_tail) * eps / log_of(A10)) * Enclosure.from_int(A10 * A10)
    results.append(CheckResult("plogp_lower_bound", tables.sum_plogp(A10) - lower, {"x": A10}))

    root = Enclosure.from_int(A10).sqrt()
    results.append(
        CheckResult(
            "theta_sqrt_lower_bound",
            tables.theta(root.lo) - _frac(CONSTANTS.theta_sqrt_ratio) * root,
            {"x": A10},
        )
    )

    for x in (A, A10):
        th = tables.theta(x)
        X = Enclosure.from_int(x)
        slack = eps * X / log_of(x)
        results.append(
            CheckResult("theta_error_bound", (slack - (th - X)).minimum(slack - (X - th)), {"x": x})
        )

    for r in results:
        logger.info("auxiliary_check", name=r.name, passed=r.passed, margin_lo=r.margin.lo, **r.details)
    return results


def auxiliary_certificate(tables: PrimeTables, A: int = CONSTANTS.A) -> SweepCertificate:
    watch = Stopwatch()
    results = auxiliary_checks(tables, A)
    undecided = [r.name for r in results if not r.decisive]
    if undecided:
        raise IndecisiveVerdictError("auxiliary checks not decisive", checks=undecided)
    failed = [r.name for r in results if not r.passed]
    return SweepCertificate(
        kind="f1_auxiliary",
        status=VerdictStatus.FAIL if failed else VerdictStatus.PASS,
        range=[A, 10 * A],
        tables_limit=tables.limit,
        points_checked=len(results),
        duration_ms=watch.elapsed_ms(),
        details={"checks": [r.to_dict() for r in results], "failed": failed},
        external_inputs=["|theta(x) - x| <= eps x/log x for x >= A (eps = 0.006788, A = 2.89e7)"],
    )
