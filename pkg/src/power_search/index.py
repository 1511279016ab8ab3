"""
Every perfect power m^k (m ≥ 2, k ≥ k_min) up to a bound, with all of its
representations, in a sorted value array plus a digest-keyed membership map.
"""
import bisect
import hashlib
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Tuple

import gmpy2

from src.core.clock import Stopwatch
from src.core.errors import CapacityError, DomainError
from src.core.logger import get_logger

logger = get_logger(__name__)

# entries held in memory at most
MAX_ENTRIES = 30_000_000

Representation = Tuple[int, int]


def value_key(v: int) -> bytes:
    """128-bit digest of the minimal big-endian encoding."""
    raw = v.to_bytes(max(1, (v.bit_length() + 7) // 8), "big")
    return hashlib.blake2b(raw, digest_size=16).digest()


def iroot_floor(v: int, k: int) -> int:
    root, _ = gmpy2.iroot(gmpy2.mpz(v), k)
    return int(root)


def estimate_entries(k_min: int, v_max: int) -> int:
    total = 0
    k = k_min
    while 2**k <= v_max:
        total += iroot_floor(v_max, k) - 1
        k += 1
    return total


@dataclass
class PerfectPowerIndex:
    k_min: int
    v_max: int
    values: List[int] = field(default_factory=list)
    _reps: Dict[bytes, List[Tuple[int, List[Representation]]]] = field(default_factory=dict, repr=False)

    def __len__(self) -> int:
        return len(self.values)

    def _bucket(self, v: int):
        return self._reps.get(value_key(v), ())

    def representations(self, v: int) -> List[Representation]:
        """All (m, k) with m^k = v, k ≥ k_min; empty when v is not indexed."""
        for value, reps in self._bucket(v):
            if value == v:
                return reps
        return []

    def __contains__(self, v: int) -> bool:
        return bool(self.representations(v))

    def values_upto(self, bound: int) -> List[int]:
        return self.values[: bisect.bisect_right(self.values, bound)]

    def values_between(self, lo: int, hi: int) -> List[int]:
        """Values v with lo ≤ v < hi."""
        return self.values[bisect.bisect_left(self.values, lo) : bisect.bisect_left(self.values, hi)]

    def __iter__(self) -> Iterator[int]:
        return iter(self.values)

    def _add(self, v: int, m: int, k: int) -> bool:
        bucket = self._reps.setdefault(value_key(v), [])
        for value, reps in bucket:
            if value == v:
                reps.append((m, k))
                return False
        bucket.append((v, [(m, k)]))
        return True


def build_power_index(k_min: int, v_max: int, max_entries: int = MAX_ENTRIES) -> PerfectPowerIndex:
    if k_min < 2:
        raise DomainError("k_min must be at least 2", k_min=k_min)
    if v_max < 2**k_min:
        raise DomainError("v_max must be at least 2^k_min", k_min=k_min, v_max=str(v_max))
    estimate = estimate_entries(k_min, v_max)
    if estimate > max_entries:
        raise CapacityError("perfect power index too large", estimate=estimate, max_entries=max_entries)

    watch = Stopwatch()
    index = PerfectPowerIndex(k_min=k_min, v_max=v_max)
    k = k_min
    while 2**k <= v_max:
        top = iroot_floor(v_max, k)
        for m in range(2, top + 1):
            v = int(gmpy2.mpz(m) ** k)
            if index._add(v, m, k):
                index.values.append(v)
        k += 1
    index.values.sort()
    for _, bucket in index._reps.items():
        for _, reps in bucket:
            reps.sort(key=lambda rep: rep[1])
    logger.info("power_index_built", k_min=k_min, v_max_bits=v_max.bit_length(), entries=len(index), duration_ms=watch.elapsed_ms())
    return index


def is_power_at_least(v: int, k_min: int) -> List[Representation]:
    """Direct integer-root test: every (m, k), k ≥ k_min, with m^k = v and m ≥ 2."""
    out = []
    if v < 4:
        return out
    for k in range(k_min, v.bit_length() + 1):
        root, exact = gmpy2.iroot(gmpy2.mpz(v), k)
        if exact and root >= 2:
            out.append((int(root), k))
    return out
