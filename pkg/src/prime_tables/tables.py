"""
Cumulative weighted prime sums with checkpointed prefix arrays.

Layout: every prime up to `limit` is stored (uint32), and for every block of
`stride` integers the prefix sums of π, log p, p·log p and log p/(p−1) up to the
block start are kept. A point query adds the primes of the partial block to the
checkpoint. Sums are plain float64 accumulations; their error is covered by a
single relative budget `rel_err` (all terms are positive):

    per term      TERM_ULPS ulps (numpy log, one product / quotient)
    within block  stride/2 sequential additions
    across blocks one addition per block
"""
import math
from fractions import Fraction
from typing import Callable, Final, List, Optional, Union

import mpmath
import numpy as np

from src.core.enclosure import UNIT_ROUNDOFF, Enclosure, log_of
from src.core.errors import CapacityError, OutOfRangeError
from src.core.logger import get_logger
from src.core.clock import Stopwatch
from src.core.workers import ordered_map

from .sieve import segment_plan, sieve_segment, simple_sieve

logger = get_logger(__name__)

STRIDE: Final[int] = 1 << 16
SEGMENT_SIZE: Final[int] = 1 << 22
MAX_LIMIT: Final[int] = 1 << 32
TERM_ULPS: Final[int] = 6
STREAM_CHUNK: Final[int] = 1 << 20

Real = Union[int, float, Fraction]

_BASE_PRIMES: Optional[np.ndarray] = None


def _floor(x: Real) -> int:
    if isinstance(x, int):
        return x
    return math.floor(x)


def prime_terms(primes: np.ndarray):
    """(log p, p·log p, log p/(p−1)) for an int array of primes."""
    pf = primes.astype(np.float64)
    logp = np.log(pf)
    return logp, pf * logp, logp / (pf - 1.0)


def block_sums(primes: np.ndarray, low: int, high_exclusive: int, stride: int):
    """
    Per-block counts and sums for primes in [low, high_exclusive), low a multiple of stride.
    np.bincount accumulates each bin sequentially in input order, so the result
    depends only on the primes of the block.
    """
    n_blocks = -(-(high_exclusive - low) // stride)
    bidx = (primes - low) // stride
    logp, plogp, lpm1 = prime_terms(primes)
    return (
        np.bincount(bidx, minlength=n_blocks).astype(np.int64),
        np.bincount(bidx, weights=logp, minlength=n_blocks),
        np.bincount(bidx, weights=plogp, minlength=n_blocks),
        np.bincount(bidx, weights=lpm1, minlength=n_blocks),
    )


def _install_base_primes(base: np.ndarray):
    global _BASE_PRIMES
    _BASE_PRIMES = base


def _segment_task(task):
    idx, low, high, stride = task
    primes = sieve_segment(low, high, _BASE_PRIMES)
    return idx, primes.astype(np.uint32), block_sums(primes, low, high, stride)


def _prefix(block_values: np.ndarray, dtype) -> np.ndarray:
    out = np.zeros(block_values.size + 1, dtype=dtype)
    # np.cumsum is a sequential left-to-right accumulation
    np.cumsum(block_values, out=out[1:])
    return out


class PrimeTables:
    """
    Immutable after construction; safe for concurrent queries.
    """

    def __init__(
        self,
        limit: int,
        stride: int,
        primes: np.ndarray,
        cp_pi: np.ndarray,
        cp_theta: np.ndarray,
        cp_plogp: np.ndarray,
        cp_lpm1: np.ndarray,
    ):
        self.limit = limit
        self.stride = stride
        self.primes = primes
        self.cp_pi = cp_pi
        self.cp_theta = cp_theta
        self.cp_plogp = cp_plogp
        self.cp_lpm1 = cp_lpm1
        for arr in (primes, cp_pi, cp_theta, cp_plogp, cp_lpm1):
            arr.flags.writeable = False
        self.n_blocks = cp_pi.size - 1
        self.rel_err = (TERM_ULPS + stride + self.n_blocks + 8) * UNIT_ROUNDOFF * 1.01

    # --- exact queries ---

    def _check(self, x: Real, what: str) -> int:
        if x > self.limit:
            raise OutOfRangeError(f"{what} queried beyond table limit", x=float(x), limit=self.limit)
        return _floor(x)

    def prime_pi(self, x: Real) -> int:
        n = self._check(x, "prime_pi")
        if n < 2:
            return 0
        return int(np.searchsorted(self.primes, np.int64(n), side="right"))

    def primes_in_array(self, lo: Real, hi: Real) -> np.ndarray:
        """Primes p with lo < p ≤ hi as an int64 array."""
        n_hi = self._check(hi, "primes_in")
        n_lo = _floor(lo)
        if n_hi <= n_lo or n_hi < 2:
            return np.array([], dtype=np.int64)
        i0 = int(np.searchsorted(self.primes, np.int64(max(n_lo, 0)), side="right"))
        i1 = int(np.searchsorted(self.primes, np.int64(n_hi), side="right"))
        return self.primes[i0:i1].astype(np.int64)

    def primes_in(self, lo: Real, hi: Real) -> List[int]:
        return [int(p) for p in self.primes_in_array(lo, hi)]

    # --- enclosed sums ---

    def _enclose(self, value: float) -> Enclosure:
        if value == 0.0:
            return Enclosure(0.0, 0.0)
        return Enclosure(
            math.nextafter(value * (1.0 - self.rel_err), 0.0),
            math.nextafter(value * (1.0 + self.rel_err), math.inf),
        )

    def _partial(self, n: int, checkpoint: np.ndarray, column: int) -> float:
        if n < 2:
            return 0.0
        b = n // self.stride
        i0 = int(self.cp_pi[b])
        i1 = int(np.searchsorted(self.primes, np.int64(n), side="right"))
        base = float(checkpoint[b])
        if i1 <= i0:
            return base
        terms = prime_terms(self.primes[i0:i1].astype(np.int64))[column]
        return base + float(np.sum(terms))

    def theta(self, x: Real) -> Enclosure:
        n = self._check(x, "theta")
        enc = self._enclose(self._partial(n, self.cp_theta, 0))
        if n >= 2:
            cap = Enclosure.from_int(self.prime_pi(n)) * log_of(n)
            enc = Enclosure(min(enc.lo, cap.hi), min(enc.hi, cap.hi))
        return enc

    def sum_plogp(self, x: Real) -> Enclosure:
        n = self._check(x, "sum_plogp")
        return self._enclose(self._partial(n, self.cp_plogp, 1))

    def sum_logp_over_pm1(self, x: Real) -> Enclosure:
        n = self._check(x, "sum_logp_over_pm1")
        return self._enclose(self._partial(n, self.cp_lpm1, 2))

    def weighted_sum(self, fn: Callable[[np.ndarray], np.ndarray], x: Real, term_ulps: int = 8) -> Enclosure:
        """
        Σ_{p ≤ x} fn(p) for a positive float weight, streamed over the stored primes.
        """
        n = self._check(x, "weighted_sum")
        count = self.prime_pi(n)
        total = 0.0
        for i in range(0, count, STREAM_CHUNK):
            chunk = self.primes[i : min(i + STREAM_CHUNK, count)].astype(np.float64)
            total += float(np.sum(fn(chunk)))
        rel = (term_ulps + STREAM_CHUNK + count // STREAM_CHUNK + 8) * UNIT_ROUNDOFF * 1.01
        if total == 0.0:
            return Enclosure(0.0, 0.0)
        return Enclosure(math.nextafter(total * (1.0 - rel), 0.0), math.nextafter(total * (1.0 + rel), math.inf))

    def block_primes(self, b: int) -> np.ndarray:
        return self.primes[int(self.cp_pi[b]) : int(self.cp_pi[b + 1])]

    def summary(self) -> dict:
        return {
            "limit": self.limit,
            "stride": self.stride,
            "blocks": self.n_blocks,
            "prime_pi": int(self.cp_pi[-1]),
            "rel_err": self.rel_err,
        }


def build_tables(
    limit: int,
    workers: int = 1,
    stride: int = STRIDE,
    segment_size: int = SEGMENT_SIZE,
    max_limit: int = MAX_LIMIT,
) -> PrimeTables:
    """
    Segmented, optionally parallel build. Segment boundaries are multiples of
    the stride and are fixed by (limit, segment_size), so checkpoints are
    bit-identical for any worker count.
    """
    if not (2 <= limit <= max_limit):
        raise CapacityError("table limit out of range", limit=limit, min=2, max=max_limit)
    if segment_size % stride != 0:
        raise CapacityError("segment size must be a multiple of the stride", segment=segment_size, stride=stride)

    watch = Stopwatch()
    base = simple_sieve(math.isqrt(limit))
    plan = [(idx, low, high, stride) for idx, low, high in segment_plan(limit, segment_size)]
    results = ordered_map(
        _segment_task,
        plan,
        workers=workers,
        initializer=_install_base_primes,
        initargs=(base,),
        label="sieve_segments",
    )

    primes = np.concatenate([r[1] for r in results]) if results else np.array([], dtype=np.uint32)
    counts = np.concatenate([r[2][0] for r in results])
    theta = np.concatenate([r[2][1] for r in results])
    plogp = np.concatenate([r[2][2] for r in results])
    lpm1 = np.concatenate([r[2][3] for r in results])

    tables = PrimeTables(
        limit=limit,
        stride=stride,
        primes=primes,
        cp_pi=_prefix(counts, np.int64),
        cp_theta=_prefix(theta, np.float64),
        cp_plogp=_prefix(plogp, np.float64),
        cp_lpm1=_prefix(lpm1, np.float64),
    )
    logger.info("tables_built", duration_ms=watch.elapsed_ms(), workers=workers, **tables.summary())
    return tables


def recompute_block(tables: PrimeTables, b: int, base: Optional[np.ndarray] = None):
    """
    Re-sieve block b from scratch and return (primes, count, theta, plogp, lpm1).
    """
    low = b * tables.stride
    high = min(low + tables.stride, tables.limit + 1)
    if base is None:
        base = simple_sieve(math.isqrt(tables.limit))
    primes = sieve_segment(low, high, base)
    counts, theta, plogp, lpm1 = block_sums(primes, low, high, tables.stride)
    return primes, int(counts[0]), float(theta[0]), float(plogp[0]), float(lpm1[0])


# Module-level query API

def theta(tables: PrimeTables, x: Real) -> Enclosure:
    return tables.theta(x)


def prime_pi(tables: PrimeTables, x: Real) -> int:
    return tables.prime_pi(x)


def sum_plogp(tables: PrimeTables, x: Real) -> Enclosure:
    return tables.sum_plogp(x)


def sum_logp_over_pm1(tables: PrimeTables, x: Real) -> Enclosure:
    return tables.sum_logp_over_pm1(x)


def primes_in(tables: PrimeTables, lo: Real, hi: Real) -> List[int]:
    return tables.primes_in(lo, hi)


def extended_plogp(tables: PrimeTables, x: Real, prec: int = 128):
    """
    Σ_{p ≤ x} p·log p accumulated in mpmath at `prec` bits; a soundness check
    for the float64 enclosure, not a production query.
    """
    n = tables._check(x, "extended_plogp")
    with mpmath.workprec(prec):
        total = mpmath.mpf(0)
        for p in tables.primes_in(1, n):
            total += p * mpmath.log(p)
    return total
