"""
Averaging the per-prime local inequalities over a prime set S.

CombinerParams carries S (sorted int64 array), k and upper/lower Vol bounds per
prime, and derives the constants a1, a2, a3 as enclosures. Small sets are
summed in exact rationals; large sets (sweep windows near e^31 hold ~10^6
primes) are summed with math.fsum and widened by a relative budget.
"""
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Dict, List, Mapping, Optional, Sequence, Set, Tuple

import numpy as np
from sympy import isprime

from src.core.enclosure import LOG2, UNIT_ROUNDOFF, Enclosure, log_of, require_lt
from src.core.errors import DomainError
from src.core.hasher import CanonicalHasher
from src.core.types import CheckKind, EnclosureModel, ExclusionCertificateModel, VolRecord
from src.local_volume.volume import VARIANT_OF_FAMILY, VolResult
from src.prime_tables.tables import TERM_ULPS

from .factored import FactoredInteger

# Sets up to this size are summed exactly and stored explicitly in certificates.
EXACT_SUM_MAX = 256
MIN_PRIME = 11


def local_slope(l) -> Fraction:
    """(11l + 31)/(l² + l − 12), the per-prime excess over 3."""
    return Fraction(11 * l + 31, l * l + l - 12)


def _fsum_up(values: np.ndarray) -> float:
    # fsum is correctly rounded, so one step up bounds the exact sum
    return math.nextafter(math.fsum(values.tolist()), math.inf)


def _fsum_down(values: np.ndarray) -> float:
    return math.nextafter(math.fsum(values.tolist()), -math.inf)


@dataclass(eq=False)
class CombinerParams:
    S: np.ndarray
    k: int
    vol_hi: np.ndarray
    vol_lo: Optional[np.ndarray] = None
    allow_13: bool = False
    vol_records: Optional[List[VolRecord]] = field(default=None, repr=False)
    vol_variant: str = "rl"

    def __post_init__(self):
        self.S = np.asarray(self.S, dtype=np.int64)
        self.vol_hi = np.asarray(self.vol_hi, dtype=np.float64)
        if self.vol_lo is not None:
            self.vol_lo = np.asarray(self.vol_lo, dtype=np.float64)
        n = int(self.S.size)
        if n < 2:
            raise DomainError("S needs at least two primes", n=n)
        if self.vol_hi.shape != self.S.shape or (self.vol_lo is not None and self.vol_lo.shape != self.S.shape):
            raise DomainError("one Vol bound per prime of S is required", n=n)
        if np.any(np.diff(self.S) <= 0):
            raise DomainError("S must be strictly increasing")
        if int(self.S[0]) < MIN_PRIME:
            raise DomainError("S holds a prime below 11", p=int(self.S[0]))
        if not self.allow_13 and np.any(self.S == 13):
            raise DomainError("13 is admissible only when 16 divides abc", S_head=self.S[:4].tolist())
        if not 2 <= self.k <= n:
            raise DomainError("k must satisfy 2 <= k <= |S|", k=self.k, n=n)
        if np.any(self.vol_hi < 0):
            raise DomainError("Vol bounds must be nonnegative")

    @classmethod
    def from_vols(
        cls,
        S: Sequence[int],
        k: int,
        vols: Mapping[int, VolResult],
        allow_13: bool = False,
    ) -> "CombinerParams":
        primes = sorted(int(l) for l in S)
        for l in primes:
            if not isprime(l):
                raise DomainError("S holds a non-prime", l=l)
            if l not in vols:
                raise DomainError("missing Vol for a prime of S", l=l)
        return cls(
            S=np.array(primes, dtype=np.int64),
            k=k,
            vol_hi=np.array([vols[l].value.hi for l in primes]),
            vol_lo=np.array([vols[l].value.lo for l in primes]),
            allow_13=allow_13,
            vol_records=[vols[l].to_record() for l in primes],
            vol_variant=VARIANT_OF_FAMILY.get(vols[primes[0]].family, "rl"),
        )

    @property
    def n(self) -> int:
        return int(self.S.size)

    @property
    def p0(self) -> int:
        return int(self.S[0])

    @property
    def explicit(self) -> bool:
        return self.n <= EXACT_SUM_MAX

    @cached_property
    def k_of_S(self) -> int:
        return math.prod(int(l) for l in self.S[: self.k])

    @cached_property
    def k_of_S_log2(self) -> Enclosure:
        return Enclosure.from_int(self.k_of_S) * LOG2

    @cached_property
    def a1(self) -> Enclosure:
        if self.explicit:
            return Enclosure.from_fraction(sum(local_slope(int(l)) for l in self.S) / self.n)
        lf = self.S.astype(np.float64)
        total = math.fsum(((11 * lf + 31) / (lf * lf + lf - 12)).tolist())
        rel = 10 * UNIT_ROUNDOFF
        return Enclosure(total * (1 - rel), total * (1 + rel)) / self.n

    @cached_property
    def a2(self) -> Enclosure:
        hi = _fsum_up(self.vol_hi)
        lo = 0.0 if self.vol_lo is None else max(0.0, _fsum_down(self.vol_lo))
        return Enclosure(min(lo, hi), hi) * 3 / self.n

    @cached_property
    def a3(self) -> Enclosure:
        if self.explicit:
            total = Enclosure(0.0, 0.0)
            for l in self.S:
                total = total + log_of(int(l))
            return total
        total = math.fsum(np.log(self.S.astype(np.float64)).tolist())
        rel = (TERM_ULPS + 2) * UNIT_ROUNDOFF
        return Enclosure(total * (1 - rel), total * (1 + rel))

    @property
    def three_plus_a1(self) -> Enclosure:
        return 3 + self.a1

    @cached_property
    def slack(self) -> Enclosure:
        """k/n + (3 + a1)/p0, the coefficient of h − log N_C."""
        return Enclosure.from_fraction(Fraction(self.k, self.n)) + self.three_plus_a1 / self.p0

    def constants(self) -> Dict[str, Enclosure]:
        return {"a1": self.a1, "a2": self.a2, "a3": self.a3}


def combiner_bound(params: CombinerParams, h: Enclosure, rad_log: Enclosure) -> Enclosure:
    """(3 + a1)·log rad N + a2 + k·h/n."""
    return params.three_plus_a1 * rad_log + params.a2 + Enclosure.coerce(h) * params.k / params.n


def combiner_bound_c(params: CombinerParams, h: Enclosure, h_C: Enclosure, rad_C_log: Enclosure) -> Enclosure:
    """(3 + a1)·log rad N_C + (k/n + (3+a1)/p0)(h − h_C) + a2 + (3 + a1)·a3."""
    return (
        params.three_plus_a1 * rad_C_log
        + params.slack * (Enclosure.coerce(h) - h_C)
        + params.a2
        + params.three_plus_a1 * params.a3
    )


# --- the combinatorial parts of the averaging lemma, on a concrete N ---

def k_of(S: Sequence[int], k: int) -> int:
    return math.prod(sorted(S)[:k])


def _checked_set(S: Sequence[int], k: int) -> List[int]:
    primes = sorted(set(int(l) for l in S))
    if len(primes) < 2:
        raise DomainError("S needs at least two primes", S=primes)
    for l in primes:
        if l < 5 or not isprime(l):
            raise DomainError("S must consist of primes >= 5", l=l)
    if not 2 <= k <= len(primes):
        raise DomainError("k must satisfy 2 <= k <= |S|", k=k, n=len(primes))
    return primes


def _require_hypothesis(N: FactoredInteger, primes: List[int], k: int):
    kS = k_of(primes, k)
    if not require_lt(N.h, Enclosure.from_int(kS) * LOG2, "k(S) log 2 above h", k_of_S=str(kS)):
        raise DomainError("k(S) <= h/log 2: the averaging lemma does not apply", k_of_S=str(kS), h=N.h.to_dict())


def partition(N: FactoredInteger, S: Sequence[int]) -> Tuple[Set[int], Set[int], Set[int]]:
    """A = S ∩ supp N, B = {p | N : some l ∈ S divides v_p(N)}, C = the rest."""
    S = set(S)
    A = {p for p in N.primes if p in S}
    B = {p for p, e in N.factors.items() if any(e % l == 0 for l in S)}
    C = {p for p in N.primes if p not in A and p not in B}
    return A, B, C


def _part(N: FactoredInteger, primes: Set[int]) -> int:
    return N.restrict(primes).value


def lemma31_part_i_check(N: FactoredInteger, S: Sequence[int], k: int) -> bool:
    primes = _checked_set(S, k)
    _require_hypothesis(N, primes, k)
    A, B, _ = partition(N, primes)
    N_A, N_B = _part(N, A), _part(N, B)
    identity = math.prod(l ** N.v(l) for l in primes) == N_A
    bound = math.prod(N.N_l(l) for l in primes) <= N_B ** (k - 1)
    return identity and bound


def lemma31_part_ii_check(N: FactoredInteger, S: Sequence[int], k: int) -> bool:
    """log N_A/n + (k−1)·log N_B/n ≤ k·h/n, i.e. N_A·N_B^(k−1) ≤ N^k."""
    primes = _checked_set(S, k)
    _require_hypothesis(N, primes, k)
    A, B, _ = partition(N, primes)
    return _part(N, A) * _part(N, B) ** (k - 1) <= N.value**k


def lemma31_part_iii_check(N: FactoredInteger, S: Sequence[int], k: int) -> bool:
    """
    rad N ≤ rad N_C · N_B^(1/p0) · ΠS (raised to p0), and N_A, N_B ≤ N/N_C.
    """
    primes = _checked_set(S, k)
    _require_hypothesis(N, primes, k)
    A, B, C = partition(N, primes)
    N_A, N_B, N_C = _part(N, A), _part(N, B), _part(N, C)
    rad_C = math.prod(C)
    p0 = primes[0]
    radical = N.rad**p0 <= rad_C**p0 * N_B * math.prod(primes) ** p0
    return radical and N_A * N_C <= N.value and N_B * N_C <= N.value


# --- certificates ---

def exclusion_certificate(
    params: CombinerParams,
    lower: float,
    upper: float,
    check_kind: CheckKind,
    margins: Mapping[str, Enclosure],
    selection: Optional[dict] = None,
    b1: Optional[Enclosure] = None,
    b2: Optional[Enclosure] = None,
    signature: Optional[dict] = None,
) -> ExclusionCertificateModel:
    explicit = params.explicit
    cert = ExclusionCertificateModel(
        check_kind=check_kind,
        lower=float(lower),
        upper=float(upper),
        S=params.S.tolist() if explicit else [],
        k=params.k,
        allow_13=params.allow_13,
        vols=list(params.vol_records or []) if explicit else [],
        a1=EnclosureModel.of(params.a1),
        a2=EnclosureModel.of(params.a2),
        a3=EnclosureModel.of(params.a3),
        b1=EnclosureModel.of(b1) if b1 is not None else None,
        b2=EnclosureModel.of(b2) if b2 is not None else None,
        k_of_S=str(params.k_of_S),
        margins={name: EnclosureModel.of(m) for name, m in margins.items()},
        signature=signature,
        selection=dict(selection or {}),
    )
    cert.digest = CanonicalHasher.digest_certificate(cert.model_dump(mode="json"))
    return cert
