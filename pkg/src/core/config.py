"""
Run configuration, numeric precision tier and the deterministic RNG.

All randomized choices (cache spot re-verification, sampled checks) flow
through DeterministicRNG so a run is reproducible from its seed.
"""
import hashlib
import os
import random
from typing import Literal, Optional

import mpmath
import orjson
from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field

TABLE_CACHE_ENV = "ABCV_TABLE_CACHE"
DEFAULT_TABLE_CACHE = ".abcv_cache"

PRECISION_BITS = {
    "standard": 53,
    "extended": 128,
}


def default_table_cache() -> str:
    """
    Table cache directory: $ABCV_TABLE_CACHE (a .env file is honoured), else ./.abcv_cache.
    """
    load_dotenv()
    return os.environ.get(TABLE_CACHE_ENV, DEFAULT_TABLE_CACHE)


def init_precision(tier: str = "standard") -> int:
    """
    Sets the working precision of the mpmath layer. Call ONCE at startup.
    """
    bits = PRECISION_BITS[tier]
    mpmath.mp.prec = bits
    mpmath.iv.prec = bits
    return bits


class RunConfig(BaseModel):
    """
    Immutable configuration for a CLI run.
    """
    model_config = ConfigDict(frozen=True)

    command: str
    precision: Literal["standard", "extended"] = "standard"
    workers: int = Field(default=1, ge=1)
    table_cache: str = Field(default_factory=default_table_cache)
    out: Optional[str] = None
    resume: bool = False
    seed: int = 42

    def config_hash(self) -> str:
        # paths and the worker count never change a verdict
        data = self.model_dump(exclude={"table_cache", "out", "resume", "workers"})
        return hashlib.sha256(orjson.dumps(data, option=orjson.OPT_SORT_KEYS)).hexdigest()[:16]


class DeterministicRNG:
    """
    Wrapper around random.Random with explicit seed.
    Provides reproducible randomness.
    """
    def __init__(self, seed: int):
        self._seed = seed
        self._rng = random.Random(seed)

    def randint(self, a: int, b: int) -> int:
        return self._rng.randint(a, b)

    def random(self) -> float:
        return self._rng.random()

    def uniform(self, a: float, b: float) -> float:
        return self._rng.uniform(a, b)

    def choice(self, seq):
        return self._rng.choice(seq)

    def sample(self, population, k: int):
        return self._rng.sample(population, k)

    def get_seed(self) -> int:
        return self._seed
