import importlib
import math
import random
import unittest
from unittest.mock import patch

import gmpy2

from src.core.errors import CapacityError, DomainError
from src.core.verdict import VerdictStatus
from src.power_search import (
    CATALOG,
    audit_pruning,
    build_power_index,
    is_power_at_least,
    one_plus_power_scan,
    run_search,
    search,
    verify_catalog,
)
from src.power_search.index import iroot_floor
from src.power_search.search import dyadic_ranges, search_caps

H_MAX = 30.0


def naive_solutions(h_max, k_min):
    """Primitive x^r + y^s = z^t, x^r ≤ y^s, by direct enumeration over bases and exponents."""
    budget = math.exp(h_max)
    # a^3 ≤ abc and 4b² ≤ abc
    a_max = int(budget ** (1 / 3)) + 1
    b_max = int(math.sqrt(budget / 2**k_min)) + 1

    def powers(limit):
        out = []
        r = k_min
        while 2**r <= limit:
            x = 2
            while x**r <= limit:
                out.append((x**r, x, r))
                x += 1
            r += 1
        return out

    found = set()
    for a, x, r in powers(a_max):
        for b, y, s in powers(b_max):
            if b < a:
                continue
            c = a + b
            if math.log(a) + math.log(b) + math.log(c) >= h_max:
                continue
            for z, t in is_power_at_least(c, k_min):
                if math.gcd(math.gcd(x, y), z) == 1:
                    found.add((x, y, z, r, s, t))
    return found


def direct_roots(v, k_min):
    """(m, k) with m^k = v, m ≥ 2, k ≥ k_min, by exact integer roots."""
    reps = []
    for k in range(k_min, max(k_min, v.bit_length()) + 1):
        root, exact = gmpy2.iroot(gmpy2.mpz(v), k)
        if exact and root >= 2:
            reps.append((int(root), k))
    return reps


class TestCatalog(unittest.TestCase):
    def test_identities(self):
        cert = verify_catalog()
        self.assertEqual(cert.status, VerdictStatus.PASS)
        self.assertEqual(cert.points_checked, len(CATALOG))
        self.assertTrue(all(e["hyperbolic"] for e in cert.details["solutions"]))

    def test_largest_height(self):
        cert = verify_catalog()
        top = max(CATALOG, key=lambda s: s.x**s.r * s.y**s.s * s.z**s.t)
        h = math.log(top.x**top.r) + math.log(top.y**top.s) + math.log(top.z**top.t)
        self.assertAlmostEqual(cert.worst_margin.hi, h, places=6)


class TestPowerIndex(unittest.TestCase):
    def test_high_exponents(self):
        index = build_power_index(20, 2**30)
        self.assertEqual(len(index), 11)
        self.assertEqual(index.representations(2**30), [(2, 30)])
        self.assertNotIn(3**20, index)

    def test_all_representations(self):
        index = build_power_index(2, 100)
        self.assertEqual(index.representations(64), [(8, 2), (4, 3), (2, 6)])
        self.assertEqual(index.representations(81), [(9, 2), (3, 4)])
        self.assertEqual(index.values_between(10, 30), [16, 25, 27])
        self.assertEqual(index.representations(50), [])

    def test_direct_root_test(self):
        self.assertEqual(is_power_at_least(64, 3), [(4, 3), (2, 6)])
        self.assertEqual(is_power_at_least(63, 2), [])
        self.assertEqual(is_power_at_least(1, 2), [])

    def test_completeness_against_direct_roots(self):
        rng = random.Random(2024)
        for k_min, v_max in ((2, 10**10), (3, 10**12)):
            index = build_power_index(k_min, v_max)
            for _ in range(5000):
                if rng.random() < 0.5:
                    v = rng.randint(1, v_max)
                else:
                    k = rng.randint(k_min, 12)
                    m = rng.randint(2, max(2, iroot_floor(v_max, k)))
                    v = min(m**k + rng.choice((-1, 0, 0, 1)), v_max)
                self.assertEqual(index.representations(v), direct_roots(v, k_min), v)
                self.assertEqual(v in index, bool(direct_roots(v, k_min)), v)

    def test_limits(self):
        with self.assertRaises(DomainError):
            build_power_index(1, 100)
        with self.assertRaises(CapacityError):
            build_power_index(2, 10**20, max_entries=1000)


class TestSearch(unittest.TestCase):
    def test_matches_naive_enumeration(self):
        solutions = search(H_MAX, 2)
        got = {(s.x, s.y, s.z, s.r, s.s, s.t) for s in solutions}
        self.assertEqual(got, naive_solutions(H_MAX, 2))
        self.assertIn((2, 7, 3, 5, 2, 4), got)
        self.assertIn((3, 4, 5, 2, 2, 2), got)
        self.assertTrue(all(s.h.hi < H_MAX for s in solutions))

    def test_workers_agree(self):
        self.assertEqual(search(25.0, 2, workers=3), search(25.0, 2))

    def test_non_primitive(self):
        every = search(20.0, 2, primitive_only=False)
        self.assertTrue(any(not s.primitive for s in every))
        self.assertTrue(set(map(str, search(20.0, 2))) <= set(map(str, every)))

    def test_report(self):
        report = run_search(H_MAX, 2)
        self.assertEqual(report.status, VerdictStatus.FAIL)
        self.assertTrue(report.exhaustive)
        self.assertEqual(int(report.caps["z_cap"]), search_caps(H_MAX, 2)["z_cap"])
        quiet = run_search(H_MAX, 5)
        self.assertEqual(quiet.status, VerdictStatus.PASS)
        self.assertEqual(quiet.solutions, [])

    def test_one_plus_power(self):
        scan = one_plus_power_scan(H_MAX, 2)
        self.assertEqual(len(scan["hits"]), 1)
        hit = scan["hits"][0]
        self.assertEqual((hit["y"], hit["s"], hit["z"], hit["t"]), (2, 3, 3, 2))
        self.assertEqual(one_plus_power_scan(H_MAX, 4)["hits"], [])

    def test_base_one_hit_fails_run(self):
        hit = {"y": 2, "s": 3, "z": 3, "t": 2}
        scan = {"c_cap_bits": 0, "scanned": 1, "hits": [hit], "duration_ms": 0}
        search_module = importlib.import_module("src.power_search.search")
        with patch.object(search_module, "one_plus_power_scan", return_value=scan):
            report = run_search(H_MAX, 5)
        self.assertEqual(report.solutions, [])
        self.assertEqual(report.status, VerdictStatus.FAIL)
        self.assertEqual(run_search(H_MAX, 5).status, VerdictStatus.PASS)

    def test_pruning_is_sound(self):
        self.assertEqual(audit_pruning(H_MAX, 2, samples=5000), 0)
        self.assertEqual(audit_pruning(H_MAX, 5, samples=5000, seed=7), 0)

    def test_dyadic_ranges(self):
        ranges = dyadic_ranges(4, 100)
        self.assertEqual(ranges[0], (4, 8))
        self.assertEqual(ranges[-1], (64, 101))

    def test_caps(self):
        with self.assertRaises(CapacityError):
            search(701.0, 20)
        with self.assertRaises(DomainError):
            search(H_MAX, 1)


if __name__ == '__main__':
    unittest.main()
