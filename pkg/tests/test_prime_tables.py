import math
import os
import tempfile
import unittest

import numpy as np

from src.core.config import DeterministicRNG
from src.core.errors import CapacityError, CertificateError, OutOfRangeError
from src.prime_tables import (
    build_tables,
    find_cached_tables,
    load_tables,
    prime_pi,
    primes_in,
    save_tables,
    sum_logp_over_pm1,
    sum_plogp,
    theta,
)
from src.prime_tables.cache import cache_filename
from src.prime_tables.sieve import segment_plan, sieve_segment, simple_sieve
from src.prime_tables.tables import extended_plogp

LIMIT = 100_000


def trial_division_primes(n):
    out = []
    for k in range(2, n + 1):
        if all(k % p for p in out if p * p <= k):
            out.append(k)
    return out


class TestSieve(unittest.TestCase):
    def test_simple_sieve(self):
        self.assertEqual(simple_sieve(30).tolist(), [2, 3, 5, 7, 11, 13, 17, 19, 23, 29])
        self.assertEqual(simple_sieve(1).size, 0)

    def test_segment_matches_full_sieve(self):
        base = simple_sieve(math.isqrt(5000))
        joined = np.concatenate([sieve_segment(lo, hi, base) for _, lo, hi in segment_plan(5000, 256)])
        self.assertEqual(joined.tolist(), trial_division_primes(5000))

    def test_plan_covers_range(self):
        plan = segment_plan(1000, 128)
        self.assertEqual(plan[0][1], 0)
        self.assertEqual(plan[-1][2], 1001)
        self.assertTrue(all(a[2] == b[1] for a, b in zip(plan, plan[1:])))


class TestPrimeTables(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.tables = build_tables(LIMIT, stride=1024, segment_size=8192)
        cls.oracle = trial_division_primes(2000)

    def test_prime_pi(self):
        self.assertEqual(prime_pi(self.tables, 10), 4)
        self.assertEqual(prime_pi(self.tables, 1000), 168)
        self.assertEqual(prime_pi(self.tables, 100_000), 9592)
        self.assertEqual(prime_pi(self.tables, 1), 0)

    def test_primes_in(self):
        self.assertEqual(primes_in(self.tables, 10, 30), [11, 13, 17, 19, 23, 29])
        self.assertEqual(primes_in(self.tables, 0, 2000), self.oracle)

    def test_sums_enclose_direct_values(self):
        for x in (2, 97, 1000, 1024, 1999, 54321, LIMIT):
            ps = primes_in(self.tables, 0, x)
            th = math.fsum(math.log(p) for p in ps)
            pl = math.fsum(p * math.log(p) for p in ps)
            lp = math.fsum(math.log(p) / (p - 1) for p in ps)
            self.assertTrue(theta(self.tables, x).contains(th), x)
            self.assertTrue(sum_plogp(self.tables, x).contains(pl), x)
            self.assertTrue(sum_logp_over_pm1(self.tables, x).contains(lp), x)

    def test_fractional_argument(self):
        self.assertEqual(prime_pi(self.tables, 10.5), 4)
        self.assertEqual(theta(self.tables, 11.9), theta(self.tables, 11))

    def test_weighted_sum(self):
        value = self.tables.weighted_sum(lambda p: np.log(p) / p, 1000)
        direct = math.fsum(math.log(p) / p for p in self.oracle if p <= 1000)
        self.assertTrue(value.contains(direct))

    def test_extended_accumulation(self):
        extended = float(extended_plogp(self.tables, 5000))
        self.assertTrue(sum_plogp(self.tables, 5000).contains(extended))

    def test_out_of_range(self):
        with self.assertRaises(OutOfRangeError):
            theta(self.tables, LIMIT + 1)

    def test_worker_count_does_not_change_tables(self):
        parallel = build_tables(LIMIT, workers=3, stride=1024, segment_size=8192)
        self.assertTrue(np.array_equal(parallel.cp_theta, self.tables.cp_theta))
        self.assertTrue(np.array_equal(parallel.primes, self.tables.primes))

    def test_capacity(self):
        with self.assertRaises(CapacityError):
            build_tables(1)


class TestCache(unittest.TestCase):
    def test_round_trip_and_lookup(self):
        tables = build_tables(50_000, stride=1024, segment_size=8192)
        with tempfile.TemporaryDirectory() as d:
            save_tables(tables, os.path.join(d, cache_filename(50_000)))
            loaded = find_cached_tables(d, 20_000, DeterministicRNG(1))
            self.assertIsNotNone(loaded)
            self.assertEqual(loaded.limit, 50_000)
            self.assertEqual(prime_pi(loaded, 50_000), prime_pi(tables, 50_000))
            self.assertIsNone(find_cached_tables(d, 60_000))

    def test_corrupt_file(self):
        with tempfile.TemporaryDirectory() as d:
            path = os.path.join(d, cache_filename(10))
            with open(path, "wb") as f:
                f.write(b"garbage")
            with self.assertRaises(CertificateError):
                load_tables(path)

    def test_tampered_checkpoint(self):
        tables = build_tables(20_000, stride=1024, segment_size=4096)
        with tempfile.TemporaryDirectory() as d:
            path = save_tables(tables, os.path.join(d, cache_filename(20_000)))
            with open(path, "r+b") as f:
                # cp_theta[5]: past the magic, the header and cp_pi
                offset = 6 + 32 + 8 * (tables.n_blocks + 1) + 8 * 5
                f.seek(offset)
                f.write(np.float64(1.0).tobytes())
            with self.assertRaises(CertificateError):
                load_tables(path, verify_fraction=1.0)


if __name__ == '__main__':
    unittest.main()
