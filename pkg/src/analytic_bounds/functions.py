"""
The prime-sum functions f1 and f2, their linear targets, and the closed-form
f3 / f4 bounds, as enclosures assembled from table queries.
"""
import math
from fractions import Fraction
from typing import Tuple, Union

import mpmath
from mpmath import iv

from src.core.enclosure import Enclosure, log_of
from src.core.errors import DomainError, IndecisiveVerdictError
from src.prime_tables.tables import PrimeTables

from .constants import CONSTANTS

Real = Union[int, Fraction]


def prefactor(x: Real) -> Enclosure:
    """(x² + 5x)/(x² + x − 12)."""
    q = Fraction(x)
    return Enclosure.from_fraction((q * q + 5 * q) / (q * q + q - 12))


def sqrt_term(x: Real, tables: PrimeTables) -> Enclosure:
    """Σ_{p < √x + 1} log(x/(p−1)); the condition is (p−1)² < x."""
    q = Fraction(x)
    bound = math.isqrt(math.floor(q)) + 1
    primes = [p for p in tables.primes_in(1, bound) if (p - 1) ** 2 < q]
    if not primes:
        return Enclosure(0.0, 0.0)
    return Enclosure.from_int(len(primes)) * log_of(q) - log_of(math.prod(p - 1 for p in primes))


def f1(x: Real, tables: PrimeTables) -> Enclosure:
    q = Fraction(x)
    if q <= 3:
        raise DomainError("f1 needs x > 3", x=str(q))
    n = math.floor(q)
    inv = Enclosure.from_fraction(1 / q)
    s1 = tables.sum_logp_over_pm1(n)
    th = tables.theta(n)
    plogp = tables.sum_plogp(n)
    return s1 + (1 + inv) * th - inv * plogp + sqrt_term(q, tables)


def f1_extended(x: Real, tables: PrimeTables, prec: int = 128) -> Enclosure:
    """
    f1(x) with every prime term accumulated in mpmath interval arithmetic at
    `prec` bits. Linear in π(x); only for points the float enclosure leaves open.
    """
    q = Fraction(x)
    if q <= 3:
        raise DomainError("f1 needs x > 3", x=str(q))
    n = math.floor(q)
    saved = iv.prec
    iv.prec = prec
    try:
        s1 = th = plogp = iv.mpf(0)
        for p in tables.primes_in(1, n):
            L = iv.log(p)
            s1 += L / (p - 1)
            th += L
            plogp += p * L
        Q = iv.mpf(q.numerator) / q.denominator
        total = s1 + (1 + 1 / Q) * th - plogp / Q
        for p in tables.primes_in(1, math.isqrt(n) + 1):
            if (p - 1) ** 2 < q:
                total += iv.log(Q / (p - 1))
        return Enclosure.from_mpi(total)
    finally:
        iv.prec = saved


def f2(x: Real, tables: PrimeTables) -> Enclosure:
    q = Fraction(x)
    if q < 5:
        raise DomainError("f2 needs x >= 5", x=str(q))
    inner = f1(3 * q, tables) + Enclosure.from_fraction(Fraction(10, 3)) * log_of(q) + 9
    return prefactor(q) * inner


def f1_target(n: Real) -> Enclosure:
    q = Fraction(n)
    return Enclosure.from_fraction(CONSTANTS.f1_slope * q) + Enclosure.from_fraction(CONSTANTS.f1_fringe * q) / log_of(q)


def f2_target(n: Real) -> Enclosure:
    q = Fraction(n)
    return Enclosure.from_fraction(CONSTANTS.f2_slope * q) + Enclosure.from_fraction(CONSTANTS.f2_fringe * q) / log_of(q)


# --- f3 / f4 (x given through its logarithm, x = e^λ) ---

def _iv_of(q: Fraction):
    return iv.mpf(q.numerator) / iv.mpf(q.denominator)


def f3_lower_bound(log_x: Fraction) -> Enclosure:
    """(4/3)·√x·(√log x − 2.14)/(log x + log log x)."""
    L = _iv_of(Fraction(log_x))
    value = iv.mpf(4) / 3 * iv.sqrt(iv.exp(L)) * (iv.sqrt(L) - _iv_of(CONSTANTS.f3_shift)) / (L + iv.log(L))
    return Enclosure.from_mpi(value)


def f4_upper_bound(log_x: Fraction) -> Enclosure:
    """(4/9)·x·(1 + 4.33/log x)."""
    L = _iv_of(Fraction(log_x))
    value = iv.mpf(4) / 9 * iv.exp(L) * (1 + _iv_of(CONSTANTS.f4_fringe) / L)
    return Enclosure.from_mpi(value)


def _floor_decisive(value, what: str, strict: bool = False) -> int:
    lo = int(mpmath.floor(value.a))
    hi = int(mpmath.floor(value.b))
    if lo != hi or (strict and value.a == lo):
        raise IndecisiveVerdictError(f"{what} straddles an integer", lo=float(value.a), hi=float(value.b))
    return lo


def window_bounds(log_x: Fraction) -> Tuple[int, int]:
    """
    Integer bounds (a, b] with S_x = {p : a < p ≤ b}: a = ⌊√(x/log 2)⌋ (the lower bound is
    strict and never an integer at the decisive precision), b = ⌊(2/3)√(x log x)⌋.
    """
    L = _iv_of(Fraction(log_x))
    x = iv.exp(L)
    alpha = iv.sqrt(x / iv.log(2))
    beta = iv.mpf(2) / 3 * iv.sqrt(x * L)
    a = _floor_decisive(alpha, "sqrt(x/log 2)", strict=True)
    return a, _floor_decisive(beta, "(2/3)sqrt(x log x)")


def f3_f4_exact(log_x: Fraction, tables: PrimeTables) -> Tuple[int, int]:
    """(|S_x|, Σ_{p ∈ S_x} p) as exact integers."""
    a, b = window_bounds(log_x)
    primes = tables.primes_in_array(a, b)
    return int(primes.size), int(primes.sum(dtype="int64"))
