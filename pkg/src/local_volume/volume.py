"""
Vol of a ramification dataset, exactly or through one of three upper bounds.
"""
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Dict, Iterable, Optional, Tuple

import numpy as np

from src.analytic_bounds.functions import f1, f2, prefactor
from src.analytic_bounds.sweep import f1_upper_at
from src.core.enclosure import LOG2, LOG_PI, UNIT_ROUNDOFF, Enclosure, log_of
from src.core.errors import DomainError, OutOfRangeError
from src.core.logger import get_logger
from src.core.types import EnclosureModel, VolRecord
from src.prime_tables.sieve import simple_sieve
from src.prime_tables.tables import PrimeTables

from .datasets import RamificationDataset, make_family
from .indices import B2, B2_relaxed, v_p

logger = get_logger(__name__)

LOG3 = log_of(3)
LOG_288 = log_of(288)
LOG_24 = log_of(24)
# relative widening (in units of 2^-53) for the vectorized f2_bound
ARRAY_SLACK = 64

F2_CHAIN_NOTE = (
    "f2_bound = max(f2(l), unabsorbed chain); the chain keeps log(pi) + log(288 l^2) + log(24 l), "
    "whose constant part exceeds the absorbed constant 9"
)


class VolMethod(str, Enum):
    EXACT = "exact"
    PER_J_RELAXED = "per_j_relaxed"
    CLOSED_FORM = "closed_form"
    F2_BOUND = "f2_bound"


METHOD_ALIASES = {
    "exact": VolMethod.EXACT,
    "relaxed": VolMethod.PER_J_RELAXED,
    "per_j_relaxed": VolMethod.PER_J_RELAXED,
    "closed": VolMethod.CLOSED_FORM,
    "closed_form": VolMethod.CLOSED_FORM,
    "f2": VolMethod.F2_BOUND,
    "f2_bound": VolMethod.F2_BOUND,
}

VARIANT_OF_FAMILY = {"R_l": "rl", "R'_l": "rlprime"}


def parse_method(name: str) -> VolMethod:
    try:
        return METHOD_ALIASES[name]
    except KeyError:
        raise DomainError("unknown Vol method", method=name)


@dataclass(frozen=True)
class VolResult:
    """
    value encloses the exact Vol for method=exact; for the bounding methods
    value.hi is an upper bound of Vol and value.lo = 0.
    """
    value: Enclosure
    method: VolMethod
    dataset_id: str
    l: int
    family: str
    note: Optional[str] = None

    def to_record(self) -> VolRecord:
        return VolRecord(
            l=self.l,
            variant=VARIANT_OF_FAMILY.get(self.family, "rl"),
            method=self.method.value,
            value=EnclosureModel.of(self.value),
            dataset_id=self.dataset_id,
            note=self.note,
        )

    def to_dict(self) -> dict:
        return {
            "l": self.l,
            "family": self.family,
            "method": self.method.value,
            "value": self.value.to_dict(),
            "dataset_id": self.dataset_id,
            "note": self.note,
        }


def relevant_primes(dataset: RamificationDataset) -> Iterable[int]:
    """p ≤ e₀·l₀ + 1 together with S₀; B2 vanishes at every other prime."""
    e0, l0 = dataset.base_index, dataset.base_prime
    head = {int(p) for p in simple_sieve(e0 * l0 + 1)}
    return sorted(head | set(dataset.special_primes))


def b2_profile(dataset: RamificationDataset, relaxed: bool = False) -> Dict[int, Fraction]:
    fn = B2_relaxed if relaxed else B2
    return {p: fn(dataset, p) for p in relevant_primes(dataset)}


def _assemble(dataset: RamificationDataset, profile: Dict[int, Fraction]) -> Enclosure:
    total = LOG_PI
    for p, b in profile.items():
        if b:
            total = total + Enclosure.from_fraction(b) * log_of(p)
    return (prefactor(dataset.base_prime) * total).max0()


def _upper_only(value: Enclosure) -> Enclosure:
    return Enclosure(0.0, max(0.0, value.hi))


def _closed_form(dataset: RamificationDataset, tables: PrimeTables) -> Enclosure:
    """
    Iverson-bracket bound: every generic p ≤ E + 1 (E = e₀·l₀) contributes
    (1/(p−1) + 1 − (p−1)/E)·log p, plus log(E/(p−1)) when E > p(p−1); each special
    p contributes its own bracket with E_p = max(S_p^good ∪ S_p^multi) and d₀(p)·log p.
    """
    l0, e0 = dataset.base_prime, dataset.base_index
    E = e0 * l0
    if tables.limit < E + 1:
        raise OutOfRangeError("tables too small for closed_form", need=E + 1, limit=tables.limit)

    inv_E = Enclosure.from_fraction(Fraction(1, E))
    th = tables.theta(E + 1)
    # Σ_{p ≤ E+1} (1/(p−1) + 1 − (p−1)/E)·log p = S1 + θ − (Σ p log p − θ)/E
    generic = tables.sum_logp_over_pm1(E + 1) + th - (tables.sum_plogp(E + 1) - th) * inv_E

    def bracket(p: int, cap: int) -> Enclosure:
        return Enclosure.from_fraction(Fraction(1, p - 1) + 1 - Fraction(p - 1, cap)) * log_of(p)

    special = sorted(dataset.special_primes)
    for p in special:
        if p <= E + 1:
            generic = generic - bracket(p, E)

    total = LOG_PI + generic
    for p in tables.primes_in(1, math.isqrt(E) + 1):
        if E > p * (p - 1) and p not in dataset.special_primes:
            total = total + log_of(Fraction(E, p - 1))

    for p in special:
        local = dataset.local_sets(p)
        Ep = max(local)
        if Ep >= p - 1:
            total = total + bracket(p, Ep)
        d0 = max(1 + v_p(p, e) for e in local)
        total = total + Enclosure.from_int(d0) * log_of(p)
        if Ep > p * (p - 1):
            total = total + log_of(Fraction(Ep, p - 1))
    return _upper_only(prefactor(l0) * total)


def _f2_bound(dataset: RamificationDataset, tables: PrimeTables) -> Tuple[Enclosure, str]:
    if dataset.family not in VARIANT_OF_FAMILY:
        raise DomainError("f2_bound applies to the R_l and R'_l families only", family=dataset.family)
    l = dataset.base_prime
    if tables.limit < 3 * l:
        raise OutOfRangeError("tables too small for f2_bound", need=3 * l, limit=tables.limit)
    chain_const = (
        LOG_PI
        + (log_of(2) + 2 * log_of(3) + Enclosure.from_int(l - 1) * log_of(l)) / (3 * l)
        + log_of(288 * l * l)
        + log_of(24 * l)
    )
    chain = prefactor(l) * (f1(3 * l, tables) + chain_const)
    value = f2(l, tables).maximum(chain)
    return _upper_only(value), F2_CHAIN_NOTE


def vol(dataset: RamificationDataset, method: VolMethod = VolMethod.EXACT, tables: Optional[PrimeTables] = None) -> VolResult:
    method = VolMethod(method)
    note = None
    if method == VolMethod.EXACT:
        value = _assemble(dataset, b2_profile(dataset))
    elif method == VolMethod.PER_J_RELAXED:
        value = _upper_only(_assemble(dataset, b2_profile(dataset, relaxed=True)))
    elif method == VolMethod.CLOSED_FORM:
        if tables is None:
            raise OutOfRangeError("closed_form needs prime tables")
        value = _closed_form(dataset, tables)
    else:
        if tables is None:
            raise OutOfRangeError("f2_bound needs prime tables")
        value, note = _f2_bound(dataset, tables)

    logger.debug("vol_computed", l=dataset.base_prime, family=dataset.family, method=method.value, hi=value.hi)
    return VolResult(
        value=value,
        method=method,
        dataset_id=dataset.dataset_id,
        l=dataset.base_prime,
        family=dataset.family,
        note=note,
    )


def vol_of(l: int, variant: str, method: VolMethod, tables: Optional[PrimeTables] = None) -> VolResult:
    return vol(make_family(l, variant), method, tables)


def f2_bound_array(ls: np.ndarray, tables: PrimeTables) -> np.ndarray:
    """
    Float upper bounds of the f2_bound value for a sorted array of primes l.
    Every term is positive, so one relative widening covers the roundings.
    """
    ls = np.asarray(ls, dtype=np.int64)
    if ls.size == 0:
        return np.zeros(0, dtype=np.float64)
    if tables.limit < 3 * int(ls[-1]):
        raise OutOfRangeError("tables too small for f2_bound", need=3 * int(ls[-1]), limit=tables.limit)
    f1_hi = f1_upper_at(3 * ls, tables)
    lf = ls.astype(np.float64)
    logl = np.log(lf)
    pref = (lf * lf + 5 * lf) / (lf * lf + lf - 12)

    small = LOG2.hi + 2 * LOG3.hi
    chain = (
        f1_hi
        + LOG_PI.hi
        + small / (3 * lf)
        + (lf - 1) / (3 * lf) * logl
        + LOG_288.hi
        + LOG_24.hi
        + 3 * logl
    )
    absorbed = f1_hi + (10.0 / 3.0) * logl + 9.0
    return pref * np.maximum(chain, absorbed) * (1 + ARRAY_SLACK * UNIT_ROUNDOFF)


class VolCache:
    """Memoized vol_of per (l, variant, method)."""

    def __init__(self, tables: Optional[PrimeTables] = None):
        self.tables = tables
        self._store: Dict[Tuple[int, str, VolMethod], VolResult] = {}

    def get(self, l: int, variant: str = "rl", method: VolMethod = VolMethod.EXACT) -> VolResult:
        key = (int(l), variant, VolMethod(method))
        hit = self._store.get(key)
        if hit is None:
            hit = vol_of(key[0], variant, key[2], self.tables)
            self._store[key] = hit
        return hit

    def __len__(self) -> int:
        return len(self._store)
