"""
Binary table cache.

File layout (little-endian):
    magic   6 bytes  b"ABCPT1"
    header  <QQQQ    limit, stride, n_blocks, n_primes
    cp_pi   <i8 × (n_blocks + 1)
    cp_theta, cp_plogp, cp_lpm1   <f8 × (n_blocks + 1) each
    primes  <u4 × n_primes
"""
import glob
import math
import os
import re
import struct
from typing import Optional

import numpy as np

from src.core.config import DeterministicRNG
from src.core.errors import CertificateError
from src.core.logger import get_logger

from .sieve import simple_sieve
from .tables import PrimeTables, recompute_block

logger = get_logger(__name__)

MAGIC = b"ABCPT1"
HEADER = struct.Struct("<QQQQ")
VERIFY_FRACTION = 0.01


def cache_filename(limit: int) -> str:
    return f"primes_{limit}.abcpt"


def save_tables(tables: PrimeTables, path: str) -> str:
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    tmp = path + ".tmp"
    with open(tmp, "wb") as f:
        f.write(MAGIC)
        f.write(HEADER.pack(tables.limit, tables.stride, tables.n_blocks, tables.primes.size))
        f.write(tables.cp_pi.astype("<i8").tobytes())
        f.write(tables.cp_theta.astype("<f8").tobytes())
        f.write(tables.cp_plogp.astype("<f8").tobytes())
        f.write(tables.cp_lpm1.astype("<f8").tobytes())
        f.write(tables.primes.astype("<u4").tobytes())
    os.replace(tmp, path)
    logger.info("tables_saved", path=path, limit=tables.limit)
    return path


def load_tables(path: str, rng: Optional[DeterministicRNG] = None, verify_fraction: float = VERIFY_FRACTION) -> PrimeTables:
    """
    Load a cache file and re-verify a random sample of checkpoint blocks
    against a fresh sieve of those blocks.
    """
    with open(path, "rb") as f:
        data = f.read()
    if data[: len(MAGIC)] != MAGIC:
        raise CertificateError("not a prime table cache file", path=path)
    offset = len(MAGIC)
    limit, stride, n_blocks, n_primes = HEADER.unpack_from(data, offset)
    offset += HEADER.size

    def take(dtype: str, count: int) -> np.ndarray:
        nonlocal offset
        arr = np.frombuffer(data, dtype=dtype, count=count, offset=offset)
        offset += arr.nbytes
        return arr.astype(np.dtype(dtype).newbyteorder("="), copy=False)

    try:
        cp_pi = take("<i8", n_blocks + 1)
        cp_theta = take("<f8", n_blocks + 1)
        cp_plogp = take("<f8", n_blocks + 1)
        cp_lpm1 = take("<f8", n_blocks + 1)
        primes = take("<u4", n_primes)
    except ValueError as e:
        raise CertificateError("truncated prime table cache file", path=path, reason=str(e))

    tables = PrimeTables(limit, stride, primes, cp_pi, cp_theta, cp_plogp, cp_lpm1)
    verify_checkpoints(tables, rng or DeterministicRNG(limit), verify_fraction)
    logger.info("tables_loaded", path=path, limit=limit)
    return tables


def verify_checkpoints(tables: PrimeTables, rng: DeterministicRNG, fraction: float = VERIFY_FRACTION) -> int:
    """
    Recompute ~fraction of the blocks; each must reproduce its primes and the
    sequential prefix step cp[b] + block == cp[b + 1] bit for bit.
    """
    n = max(1, int(math.ceil(tables.n_blocks * fraction)))
    blocks = sorted(rng.sample(range(tables.n_blocks), min(n, tables.n_blocks)))
    base = simple_sieve(math.isqrt(tables.limit))
    for b in blocks:
        primes, count, theta, plogp, lpm1 = recompute_block(tables, b, base)
        stored = tables.block_primes(b)
        ok = (
            np.array_equal(primes, stored.astype(np.int64))
            and int(tables.cp_pi[b]) + count == int(tables.cp_pi[b + 1])
            and float(tables.cp_theta[b]) + theta == float(tables.cp_theta[b + 1])
            and float(tables.cp_plogp[b]) + plogp == float(tables.cp_plogp[b + 1])
            and float(tables.cp_lpm1[b]) + lpm1 == float(tables.cp_lpm1[b + 1])
        )
        if not ok:
            raise CertificateError("cached checkpoint does not match recomputation", block=b, limit=tables.limit)
    return len(blocks)


def find_cached_tables(directory: str, limit: int, rng: Optional[DeterministicRNG] = None) -> Optional[PrimeTables]:
    """
    Smallest cached table in `directory` whose limit is at least `limit`.
    """
    best = None
    for path in glob.glob(os.path.join(directory, "primes_*.abcpt")):
        m = re.search(r"primes_(\d+)\.abcpt$", path)
        if not m:
            continue
        cached = int(m.group(1))
        if cached >= limit and (best is None or cached < best[0]):
            best = (cached, path)
    if best is None:
        return None
    return load_tables(best[1], rng)
