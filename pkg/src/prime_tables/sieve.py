"""
Segmented sieve of Eratosthenes (odd-only masks, numpy strided clears).
"""
import math
from typing import List, Tuple

import numpy as np


def simple_sieve(limit: int) -> np.ndarray:
    """Classic sieve up to 'limit' (inclusive), returns primes as int64 numpy array."""
    if limit < 2:
        return np.array([], dtype=np.int64)
    is_prime = np.ones(limit + 1, dtype=bool)
    is_prime[:2] = False
    r = math.isqrt(limit)
    for p in range(2, r + 1):
        if is_prime[p]:
            is_prime[p * p : limit + 1 : p] = False
    return np.flatnonzero(is_prime).astype(np.int64)


def sieve_segment(low: int, high_exclusive: int, base_primes: np.ndarray) -> np.ndarray:
    """
    All primes in [low, high_exclusive), ascending, as int64.
    base_primes must contain every prime up to sqrt(high_exclusive - 1).
    """
    if high_exclusive <= max(low, 2):
        return np.array([], dtype=np.int64)
    head = [2] if low <= 2 < high_exclusive else []

    start = max(low, 3)
    if (start & 1) == 0:
        start += 1
    odd_count = (high_exclusive - start + 1) // 2
    if odd_count <= 0:
        return np.array(head, dtype=np.int64)

    mask = np.ones(odd_count, dtype=bool)
    for p in base_primes:
        p = int(p)
        if p == 2:
            continue
        p2 = p * p
        if p2 >= high_exclusive:
            break
        # first odd multiple of p in [start, high), never below p^2
        first = max(p2, ((start + p - 1) // p) * p)
        if (first & 1) == 0:
            first += p
        if first >= high_exclusive:
            continue
        mask[(first - start) // 2 :: p] = False

    odds = start + 2 * np.flatnonzero(mask).astype(np.int64)
    if head:
        return np.concatenate([np.array(head, dtype=np.int64), odds])
    return odds


def segment_plan(limit: int, segment_size: int) -> List[Tuple[int, int, int]]:
    """
    (idx, low, high_exclusive) segments covering [0, limit] whose boundaries
    are multiples of segment_size. The plan depends only on (limit, segment_size).
    """
    plan = []
    idx = 0
    low = 0
    while low <= limit:
        high = min(low + segment_size, limit + 1)
        plan.append((idx, low, high))
        low = high
        idx += 1
    return plan
