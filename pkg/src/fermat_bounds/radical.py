"""
Upper bounds for log rad(N_C) on a concrete solution of x^r + y^s = z^t.

N = abc/gcd(16, abc) with a = x^r, b = y^s, c = z^t, and N_C is the part of N
supported on a chosen set C of its primes (v_p(N_C) = v_p(N) for p ∈ C).
"""
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Union

from src.abc_verifier.factored import FactoredInteger
from src.core.enclosure import LOG2, Enclosure
from src.core.errors import DomainError, IndecisiveVerdictError
from src.core.logger import get_logger

logger = get_logger(__name__)

Subset = Union[None, int, Iterable[int]]


@dataclass(frozen=True)
class RadicalBound:
    name: str
    lhs: Enclosure
    rhs: Enclosure
    holds: bool

    def to_dict(self) -> dict:
        return {"name": self.name, "lhs": self.lhs.to_dict(), "rhs": self.rhs.to_dict(), "holds": self.holds}


def _power(base: int, e: int) -> FactoredInteger:
    if base == 1:
        return FactoredInteger({})
    f = FactoredInteger.from_int(base)
    return FactoredInteger({p: v * e for p, v in f.factors.items()})


def check_solution(x: int, y: int, z: int, r: int, s: int, t: int):
    if min(x, y, z) < 1:
        raise DomainError("solutions must be positive", x=x, y=y, z=z)
    if min(r, s, t) < 2:
        raise DomainError("exponents must be at least 2", r=r, s=s, t=t)
    if x**r + y**s != z**t:
        raise DomainError("not a solution of x^r + y^s = z^t", x=x, y=y, z=z, r=r, s=s, t=t)
    if math.gcd(math.gcd(x, y), z) != 1:
        raise DomainError("solution is not primitive", x=x, y=y, z=z)


def reduced_N(x: int, y: int, z: int, r: int, s: int, t: int) -> FactoredInteger:
    """abc/gcd(16, abc), factored through x, y, z."""
    abc = _power(x, r) * _power(y, s) * _power(z, t)
    factors = dict(abc.factors)
    if 2 in factors:
        factors[2] -= min(factors[2], 4)
        if factors[2] == 0:
            del factors[2]
    return FactoredInteger(factors)


def select_part(N: FactoredInteger, subset: Subset) -> FactoredInteger:
    """None picks every prime of N; an int is a bit mask over the sorted primes; else a prime set."""
    primes = sorted(N.primes)
    if subset is None:
        return N
    if isinstance(subset, int):
        if subset < 0 or subset >> len(primes):
            raise DomainError("mask selects primes N does not have", mask=subset, primes=len(primes))
        chosen = [p for i, p in enumerate(primes) if subset >> i & 1]
    else:
        chosen = [int(p) for p in subset]
        stray = [p for p in chosen if p not in N.factors]
        if stray:
            raise DomainError("C holds primes not dividing N", primes=stray)
    return N.restrict(chosen)


def _decide(lhs: Enclosure, rhs: Enclosure, name: str) -> bool:
    if lhs.hi <= rhs.lo:
        return True
    if lhs.lo > rhs.hi:
        return False
    raise IndecisiveVerdictError("radical bound", case=name, lhs=lhs.to_dict(), rhs=rhs.to_dict())


def _q(value: Fraction) -> Enclosure:
    return Enclosure.from_fraction(value)


def radical_bounds(x: int, y: int, z: int, r: int, s: int, t: int, subset: Subset = None) -> List[RadicalBound]:
    """Every case whose exponent condition holds, each evaluated on the exact data."""
    check_solution(x, y, z, r, s, t)
    N = reduced_N(x, y, z, r, s, t)
    N_C = select_part(N, subset)
    h, h_C = N.h, N_C.h
    lhs = N_C.rad_log

    rp, sp = min(r, s), max(r, s)
    u0 = min(rp, t)
    tail = 4 * LOG2 / u0
    F = Fraction
    rhs: Dict[str, Enclosure] = {"i": h_C / u0 + tail}
    if t <= rp:
        rhs["ii"] = (h_C - h) / rp + _q(F(1, 2 * t) + F(1, 2 * rp)) * h + tail
    if t == rp:
        rhs["iii"] = (h_C - h) / sp + _q((F(1, t) + F(1, sp)) * F(2 * t, 3 * t - 1)) * h + tail
        # the derivation gives the sharper coefficient 1/t − 1/s′ on 2th/(3t−1)
        rhs["iii_sharp"] = h_C / sp + _q((F(1, t) - F(1, sp)) * F(2 * t, 3 * t - 1)) * h + tail
    if t >= rp:
        mix = max(F(1, 2 * t) + F(1, 2 * rp), (F(1, r) + F(1, s) + F(1, t)) / 3)
        rhs["iv"] = (h_C - h) / t + _q(mix) * h + tail
    if F(2, sp) <= F(1, rp) + F(1, t):
        rhs["remark_a"] = (h_C - h) / max(rp, t) + _q(F(1, 2 * t) + F(1, 2 * rp)) * h + tail
    if F(2, sp) >= F(1, rp) + F(1, t):
        rhs["remark_b"] = (h_C - h) / t + _q(F(2, 3 * rp) + F(1, 3 * t)) * h + tail

    out = [RadicalBound(name, lhs, bound, _decide(lhs, bound, name)) for name, bound in rhs.items()]
    failed = [b.name for b in out if not b.holds]
    if failed:
        logger.warning("radical_bound_violated", x=x, y=y, z=z, r=r, s=s, t=t, cases=failed)
    return out


def radical_bound_check(solution, subset: Subset = None) -> bool:
    """solution = (x, y, z, r, s, t); True iff every applicable bound holds."""
    x, y, z, r, s, t = (int(v) for v in solution)
    return all(b.holds for b in radical_bounds(x, y, z, r, s, t, subset))


def is_catalan_exception(x: int, y: int, z: int, r: int, s: int, t: int) -> bool:
    """(a, b, c) a permutation of (1, 8, 9): the one triple with a base equal to 1."""
    return sorted((x**r, y**s, z**t)) == [1, 8, 9]


def all_subsets_check(solution, limit: Optional[int] = 12) -> bool:
    """radical_bound_check over every subset C of the primes of N (up to 2^limit subsets)."""
    x, y, z, r, s, t = (int(v) for v in solution)
    check_solution(x, y, z, r, s, t)
    count = len(reduced_N(x, y, z, r, s, t).factors)
    if limit is not None and count > limit:
        raise DomainError("too many primes for an exhaustive subset check", primes=count, limit=limit)
    return all(radical_bound_check(solution, mask) for mask in range(1 << count))
