"""
Ramification datasets and the two fixed families used downstream.
"""
from typing import Dict, FrozenSet, Literal

from pydantic import BaseModel, ConfigDict, ValidationError, model_validator
from sympy import isprime

from src.core.errors import DomainError
from src.core.hasher import CanonicalHasher

Family = Literal["custom", "R_l", "R'_l"]


class RamificationDataset(BaseModel):
    model_config = ConfigDict(frozen=True)

    base_prime: int
    base_index: int
    gen_multi: FrozenSet[int]
    special_primes: FrozenSet[int] = frozenset()
    good_sets: Dict[int, FrozenSet[int]] = {}
    multi_sets: Dict[int, FrozenSet[int]] = {}
    family: Family = "custom"

    @model_validator(mode="after")
    def _validate(self):
        l0, e0 = self.base_prime, self.base_index
        if l0 < 5 or not isprime(l0):
            raise ValueError(f"base prime must be a prime >= 5, got {l0}")
        if e0 < 1:
            raise ValueError(f"base index must be positive, got {e0}")
        if not self.gen_multi:
            raise ValueError("gen_multi must be nonempty")
        for g in self.gen_multi:
            e = g // l0 if g % l0 == 0 else g
            if not (1 <= e <= e0) or e % l0 == 0:
                raise ValueError(f"gen_multi element {g} is not e or e*l0 with 1 <= e <= e0, l0 not dividing e")
        for p in self.special_primes:
            if not isprime(p):
                raise ValueError(f"special prime {p} is not prime")
        for name, sets in (("good_sets", self.good_sets), ("multi_sets", self.multi_sets)):
            for p, values in sets.items():
                if p not in self.special_primes:
                    raise ValueError(f"{name} key {p} is not a special prime")
                if any(v < 1 for v in values):
                    raise ValueError(f"{name}[{p}] holds a non-positive index")
        for p in self.special_primes:
            if not self.good_sets.get(p) and not self.multi_sets.get(p):
                raise ValueError(f"special prime {p} has empty good and multi sets")
        return self

    @property
    def l(self) -> int:
        return self.base_prime

    def local_sets(self, p: int) -> FrozenSet[int]:
        return self.good_sets.get(p, frozenset()) | self.multi_sets.get(p, frozenset())

    def canonical(self) -> dict:
        """Sets as sorted arrays, map keys as decimal strings."""
        return {
            "base_prime": self.base_prime,
            "base_index": self.base_index,
            "gen_multi": sorted(self.gen_multi),
            "special_primes": sorted(self.special_primes),
            "good_sets": {str(p): sorted(v) for p, v in sorted(self.good_sets.items())},
            "multi_sets": {str(p): sorted(v) for p, v in sorted(self.multi_sets.items())},
            "family": self.family,
        }

    @property
    def dataset_id(self) -> str:
        return CanonicalHasher.short(self.canonical())


def make_dataset(**fields) -> RamificationDataset:
    try:
        return RamificationDataset(**fields)
    except ValidationError as e:
        raise DomainError("invalid ramification dataset", reason=str(e.errors()[0].get("msg")))


def _require_family_prime(l: int):
    if l < 11 or not isprime(l):
        raise DomainError("family datasets need a prime l >= 11", l=l)


def make_Rl(l: int) -> RamificationDataset:
    """The Frey–Hellegouarch dataset attached to an l-th power abc triple."""
    _require_family_prime(l)
    return make_dataset(
        base_prime=l,
        base_index=3,
        gen_multi=frozenset({1, 3, l, 3 * l}),
        special_primes=frozenset({2, 3, l}),
        good_sets={
            2: frozenset(e for e in range(2, 49, 2) if 48 % e == 0),
            3: frozenset({2, 6, 8}),
            l: frozenset({l - 1, l * (l - 1), l * l - 1}),
        },
        multi_sets={
            2: frozenset({2, 6, 2 * l, 6 * l}),
            3: frozenset({2, 6, 2 * l, 6 * l}),
            l: frozenset({l - 1, 3 * (l - 1), l * (l - 1), 3 * l * (l - 1)}),
        },
        family="R_l",
    )


def make_Rl_prime(l: int) -> RamificationDataset:
    """As make_Rl but with good reduction at 2 restricted to index 2 (usable when 16 | abc)."""
    base = make_Rl(l)
    good = dict(base.good_sets)
    good[2] = frozenset({2})
    return make_dataset(
        base_prime=l,
        base_index=3,
        gen_multi=base.gen_multi,
        special_primes=base.special_primes,
        good_sets=good,
        multi_sets=base.multi_sets,
        family="R'_l",
    )


def make_family(l: int, variant: str) -> RamificationDataset:
    if variant == "rl":
        return make_Rl(l)
    if variant == "rlprime":
        return make_Rl_prime(l)
    raise DomainError("unknown dataset variant", variant=variant)
