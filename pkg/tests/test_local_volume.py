import unittest
from fractions import Fraction

from src.analytic_bounds import f2
from src.core.enclosure import LOG_PI
from src.core.errors import DomainError, OutOfRangeError
from src.local_volume import (
    B0,
    B1,
    B2,
    B2_bruteforce,
    VolCache,
    VolMethod,
    a_p,
    b_p,
    d_p,
    local_indices,
    make_dataset,
    make_Rl,
    make_Rl_prime,
    parse_method,
    vol,
)
from src.local_volume.indices import admissible_u, v_p_2p
from src.local_volume.volume import b2_profile, relevant_primes
from src.prime_tables import build_tables


class TestLocalIndices(unittest.TestCase):
    def test_examples(self):
        self.assertEqual(a_p(5, 1), 1)
        self.assertEqual(b_p(5, 1), -1)
        self.assertEqual(d_p(7, 3), Fraction(2, 3))
        self.assertEqual(d_p(3, 6), 2)

    def test_tame_indices_cancel(self):
        for p in (5, 7, 11, 13):
            for e in range(1, p - 1):
                self.assertEqual(a_p(p, e) + b_p(p, e), 0, (p, e))

    def test_b_is_the_supremum(self):
        for p in (2, 3, 5):
            for e in range(1, 40):
                direct = max(n - Fraction(p**n, e) for n in range(0, 12))
                self.assertEqual(b_p(p, e), direct, (p, e))
                self.assertGreaterEqual(b_p(p, e), Fraction(-1, e))

    def test_bad_index(self):
        with self.assertRaises(DomainError):
            local_indices(5, 0)


class TestB(unittest.TestCase):
    def test_b0_lower_bound(self):
        l = 11
        for p in (2, 3, 5, 11):
            for e in (1, 2, 3, 6, 11, 22):
                for delta in (0, 1):
                    for u in admissible_u(e, delta, l):
                        for j in range(1, (l - 1) // 2 + 1):
                            floor = (j + 1) * (v_p_2p(p) + b_p(p, e))
                            self.assertGreaterEqual(B0(p, e, delta, u, j, l), floor)
                            self.assertGreaterEqual(floor, 0)

    def test_inadmissible_pairs(self):
        with self.assertRaises(DomainError):
            B0(5, 1, 1, 3, 1, 11)
        with self.assertRaises(DomainError):
            B0(5, 1, 0, 1, 1, 11)
        with self.assertRaises(DomainError):
            B1(5, 1, 2, 0, 11, 3)
        with self.assertRaises(DomainError):
            B0(5, 1, 0, 0, 6, 11)

    def test_b2_vanishes_on_large_generic_primes(self):
        R = make_Rl(11)
        for p in (37, 41, 101):
            self.assertEqual(B2(R, p), 0)

    def test_b2_lower_bounds(self):
        R = make_Rl(11)
        for p in relevant_primes(R):
            self.assertGreaterEqual(B2(R, p), -1)
            # every good set of R_l is nonempty
            self.assertGreaterEqual(B2(R, p), 0)

    def test_b2_matches_bruteforce(self):
        for l in (11, 13):
            for R in (make_Rl(l), make_Rl_prime(l)):
                for p in relevant_primes(R):
                    self.assertEqual(B2(R, p), B2_bruteforce(R, p), (l, R.family, p))


class TestDatasets(unittest.TestCase):
    def test_rl(self):
        R = make_Rl(11)
        self.assertEqual(R.special_primes, frozenset({2, 3, 11}))
        self.assertEqual(R.good_sets[11], frozenset({10, 110, 120}))
        self.assertEqual(R.good_sets[2], frozenset({2, 4, 6, 8, 12, 16, 24, 48}))
        self.assertEqual(R.gen_multi, frozenset({1, 3, 11, 33}))
        self.assertEqual(make_Rl_prime(11).good_sets[2], frozenset({2}))

    def test_family_requires_prime(self):
        for l in (7, 9, 15):
            with self.assertRaises(DomainError):
                make_Rl(l)

    def test_invalid_dataset(self):
        with self.assertRaises(DomainError):
            make_dataset(base_prime=5, base_index=2, gen_multi=frozenset({3}))
        with self.assertRaises(DomainError):
            make_dataset(base_prime=5, base_index=2, gen_multi=frozenset({1}), special_primes=frozenset({7}))
        with self.assertRaises(DomainError):
            make_dataset(base_prime=4, base_index=2, gen_multi=frozenset({1}))

    def test_empty_special_primes(self):
        R = make_dataset(base_prime=5, base_index=1, gen_multi=frozenset({1}))
        self.assertEqual(relevant_primes(R), [2, 3, 5])
        self.assertGreaterEqual(vol(R).value.lo, 0.0)

    def test_dataset_id(self):
        self.assertEqual(make_Rl(11).dataset_id, make_Rl(11).dataset_id)
        self.assertNotEqual(make_Rl(11).dataset_id, make_Rl_prime(11).dataset_id)


class TestVol(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.tables = build_tables(20_000, stride=1024, segment_size=8192)

    def test_exact_exceeds_log_pi(self):
        result = vol(make_Rl(11), VolMethod.EXACT)
        self.assertTrue(result.value.definitely_gt(LOG_PI))
        self.assertEqual(result.method, VolMethod.EXACT)
        self.assertEqual(result.to_record().variant, "rl")

    def test_bounds_dominate_exact(self):
        for l in (11, 13, 17):
            R = make_Rl(l)
            exact = vol(R, VolMethod.EXACT).value
            for method in (VolMethod.PER_J_RELAXED, VolMethod.CLOSED_FORM, VolMethod.F2_BOUND):
                bound = vol(R, method, self.tables).value
                self.assertGreaterEqual(bound.hi, exact.hi, (l, method))
                self.assertEqual(bound.lo, 0.0)

    def test_prime_variant_is_smaller(self):
        for l in (11, 17, 19):
            rl, rlp = make_Rl(l), make_Rl_prime(l)
            self.assertLessEqual(b2_profile(rlp)[2], b2_profile(rl)[2])
            self.assertLessEqual(vol(rlp).value.lo, vol(rl).value.hi)

    def test_exact_below_f2(self):
        for l in (11, 17, 19, 23, 29):
            self.assertLess(vol(make_Rl(l)).value.lo, f2(l, self.tables).hi, l)

    def test_methods_need_tables(self):
        with self.assertRaises(OutOfRangeError):
            vol(make_Rl(11), VolMethod.F2_BOUND)

    def test_parse_method(self):
        self.assertEqual(parse_method("closed"), VolMethod.CLOSED_FORM)
        self.assertEqual(parse_method("f2"), VolMethod.F2_BOUND)
        with self.assertRaises(DomainError):
            parse_method("guess")

    def test_cache(self):
        cache = VolCache(self.tables)
        a = cache.get(11, "rl", VolMethod.EXACT)
        b = cache.get(11, "rl", VolMethod.EXACT)
        self.assertIs(a, b)
        cache.get(11, "rlprime", VolMethod.EXACT)
        self.assertEqual(len(cache), 2)


if __name__ == '__main__':
    unittest.main()
