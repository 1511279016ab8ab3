"""
Arithmetic contradictions drawn from certified height bounds.
"""
from fractions import Fraction
from typing import Union

from mpmath import iv
from sympy import isprime, primerange

from src.core.clock import Stopwatch
from src.core.enclosure import LOG2, Enclosure, log_of, require_lt
from src.core.errors import DomainError
from src.core.logger import get_logger
from src.core.types import EnclosureModel, SweepCertificate
from src.core.verdict import VerdictStatus

logger = get_logger(__name__)

FERMAT_BOUND = 600
LITERATURE_33N = 10**9
SLOPE_GRID_HI = 10_000

BoundLike = Union[int, float, Fraction, Enclosure]


def _bound(value: BoundLike) -> Enclosure:
    bound = Enclosure.coerce(value)
    if bound.lo <= 0:
        raise DomainError("height bound must be positive", bound=bound.to_dict())
    return bound


def flt_margin(p: int, bound: Enclosure) -> Enclosure:
    """p·log(p+1) − log 2 − bound/(3p−1); positive rules out x^p + y^p = z^p."""
    return Enclosure.from_int(p) * log_of(p + 1) - LOG2 - bound / (3 * p - 1)


def flt_contradiction(p: int = 11, fermat_bound: BoundLike = FERMAT_BOUND, grid_hi: int = SLOPE_GRID_HI) -> SweepCertificate:
    """
    Any primitive x^p + y^p = z^p with x < y < z has (z−1)^(3p−1) < (xyz)^p, so
    log(z−1) < bound/(3p−1); the elementary estimate z > (p+1)^p/2 gives
    log(z−1) ≥ p·log(p+1) − log 2 ((p+1)^p is even, so z − 1 ≥ (p+1)^p/2).
    The left side decreases in p and the right side increases, so p decides all
    larger primes; the slope of the right side is checked on every prime up to grid_hi.
    """
    if p < 11 or not isprime(p):
        raise DomainError("p must be a prime >= 11", p=p)
    watch = Stopwatch()
    bound = _bound(fermat_bound)
    lhs = bound / (3 * p - 1)
    rhs = Enclosure.from_int(p) * log_of(p + 1) - LOG2
    decisive = require_lt(lhs, rhs, "Fermat height bound against the size of z", p=p)

    # d/dp (p log(p+1) − log 2) = log(p+1) + p/(p+1)
    slope_failures = []
    checked = 0
    for q in primerange(p, max(p, grid_hi) + 1):
        Q = iv.mpf(int(q))
        slope = iv.log(Q + 1) + Q / (Q + 1)
        checked += 1
        if not slope.a > 0:
            slope_failures.append(int(q))

    passed = decisive and not slope_failures
    margin = rhs - lhs
    logger.info("flt_checked", p=p, lhs_hi=lhs.hi, rhs_lo=rhs.lo, passed=passed)
    return SweepCertificate(
        kind="flt",
        status=VerdictStatus.PASS if passed else VerdictStatus.FAIL,
        range=[float(p), float(max(p, grid_hi))],
        grid="every prime for the slope of p log(p+1)",
        worst_margin=EnclosureModel.of(margin),
        points_checked=checked + 1,
        duration_ms=watch.elapsed_ms(),
        details={
            "p": p,
            "fermat_bound": bound.to_dict(),
            "log_z_minus_1_upper": lhs.to_dict(),
            "log_z_minus_1_lower": rhs.to_dict(),
            "slope_failures": slope_failures,
        },
        external_inputs=["z > (p+1)^p/2 for positive solutions of x^p + y^p = z^p (elementary estimate)"],
        notes=[
            "the (p,p,p) height bound comes from the min{r,s,t} >= 8 class; pass --bound to use a computed value",
        ],
    )


def cor48_33n_check(bound_33n: BoundLike, literature: int = LITERATURE_33N) -> SweepCertificate:
    """
    For signature (3,3,n) the height is at least n·log 2, so a bound B gives
    n < B/log 2; that must undercut the known lower bound on n.
    """
    watch = Stopwatch()
    bound = _bound(bound_33n)
    ratio = bound / LOG2
    passed = require_lt(ratio, Enclosure.from_int(literature), "n bound against the literature bound", literature=literature)
    logger.info("cor48_checked", ratio_hi=ratio.hi, literature=literature, passed=passed)
    return SweepCertificate(
        kind="cor48_33n",
        status=VerdictStatus.PASS if passed else VerdictStatus.FAIL,
        worst_margin=EnclosureModel.of(literature - ratio),
        points_checked=1,
        duration_ms=watch.elapsed_ms(),
        details={
            "bound": bound.to_dict(),
            "n_upper": ratio.to_dict(),
            "below_1e5": ratio.hi < 10**5,
            "literature": literature,
        },
        external_inputs=[f"signature (3,3,n) has no primitive solution for 3 <= n <= {literature}"],
    )
