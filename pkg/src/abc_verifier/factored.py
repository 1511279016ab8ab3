"""
Positive integers carried together with their factorization.
"""
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, Mapping

from sympy import factorint, isprime

from src.core.enclosure import Enclosure, log_of
from src.core.errors import DomainError


@dataclass(frozen=True)
class FactoredInteger:
    factors: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self):
        for p, e in self.factors.items():
            if e < 1:
                raise DomainError("exponents must be positive", p=p, exponent=e)

    @classmethod
    def from_int(cls, n: int) -> "FactoredInteger":
        if n < 1:
            raise DomainError("only positive integers are factored", value=n)
        return cls(dict(sorted((int(p), int(e)) for p, e in factorint(n).items())))

    @classmethod
    def from_factors(cls, factors: Mapping[int, int], check_primes: bool = True) -> "FactoredInteger":
        merged: Dict[int, int] = {}
        for p, e in factors.items():
            if e == 0:
                continue
            if check_primes and not isprime(p):
                raise DomainError("factor base holds a non-prime", p=p)
            merged[int(p)] = merged.get(int(p), 0) + int(e)
        return cls(dict(sorted(merged.items())))

    @property
    def primes(self) -> Iterable[int]:
        return self.factors.keys()

    @property
    def value(self) -> int:
        return math.prod(p**e for p, e in self.factors.items())

    def v(self, p: int) -> int:
        return self.factors.get(p, 0)

    @property
    def h(self) -> Enclosure:
        return log_of(self.value)

    @property
    def rad(self) -> int:
        return math.prod(self.factors)

    @property
    def rad_log(self) -> Enclosure:
        return log_of(self.rad)

    def restrict(self, primes: Iterable[int]) -> "FactoredInteger":
        keep = set(primes)
        return FactoredInteger({p: e for p, e in self.factors.items() if p in keep})

    def N_l(self, l: int) -> int:
        """Π p^{v_p} over the primes whose exponent is divisible by l."""
        return math.prod(p**e for p, e in self.factors.items() if e % l == 0)

    def __mul__(self, other: "FactoredInteger") -> "FactoredInteger":
        merged = dict(self.factors)
        for p, e in other.factors.items():
            merged[p] = merged.get(p, 0) + e
        return FactoredInteger(dict(sorted(merged.items())))
