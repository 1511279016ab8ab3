import math
import os
import random
import tempfile
import unittest
from fractions import Fraction

import numpy as np
from sympy import primerange

from src.abc_verifier import (
    CombinerParams,
    FactoredInteger,
    VolProvider,
    combiner_bound,
    corollary33_check,
    covers,
    lemma31_part_i_check,
    lemma31_part_ii_check,
    lemma31_part_iii_check,
    partition,
    revalidate_certificate,
    sweep_summary,
    sweep_theorem32,
    tail_constants_check,
    theorem32_margin,
)
from src.abc_verifier.combiner import local_slope
from src.abc_verifier.sweep import geometric_grid
from src.core.enclosure import Enclosure
from src.core.errors import CertificateError, DomainError
from src.core.journal import CertificateJournal
from src.core.types import CheckKind, ExclusionCertificateModel
from src.core.verdict import VerdictStatus
from src.prime_tables import build_tables

H_LO, H_HI = 680.0, 1000.0


class TestFactoredInteger(unittest.TestCase):
    def test_from_int(self):
        n = FactoredInteger.from_int(2**11 * 3**11 * 7)
        self.assertEqual(dict(n.factors), {2: 11, 3: 11, 7: 1})
        self.assertEqual(n.rad, 42)
        self.assertEqual(n.N_l(11), 6**11)
        self.assertEqual(n.value, 2**11 * 3**11 * 7)

    def test_merge_and_restrict(self):
        a = FactoredInteger.from_factors({2: 3, 5: 1})
        b = FactoredInteger.from_factors({2: 1, 7: 2})
        self.assertEqual(dict((a * b).factors), {2: 4, 5: 1, 7: 2})
        self.assertEqual(a.restrict([5]).value, 5)

    def test_rejects_bad_input(self):
        with self.assertRaises(DomainError):
            FactoredInteger.from_int(0)
        with self.assertRaises(DomainError):
            FactoredInteger.from_factors({4: 1})


SMALL_PRIMES = list(primerange(2, 101))
S_PRIMES = [p for p in SMALL_PRIMES if p >= 5]


def part_i_oracle(factors, S, k):
    """Part (i) straight from the definitions; None when N ≥ 2^k(S) (hypothesis fails)."""
    N = math.prod(p**e for p, e in factors.items())
    if N >= 2 ** math.prod(sorted(S)[:k]):
        return None
    N_A = 1
    for l in S:
        N_A *= l ** factors.get(l, 0)
    N_B = 1
    for p, e in factors.items():
        if any(e % l == 0 for l in S):
            N_B *= p**e
    lhs = 1
    for l in S:
        for p, e in factors.items():
            if e % l == 0:
                lhs *= p**e
    in_A = math.prod(p**e for p, e in factors.items() if p in S)
    return in_A == N_A and lhs <= N_B ** (k - 1)


class TestAveragingBound(unittest.TestCase):
    def test_pure_power(self):
        N = FactoredInteger.from_factors({2: 11, 3: 11})
        S = [11, 17]
        A, B, C = partition(N, S)
        self.assertEqual((A, B, C), (set(), {2, 3}, set()))
        self.assertTrue(lemma31_part_i_check(N, S, 2))
        self.assertTrue(lemma31_part_ii_check(N, S, 2))
        self.assertTrue(lemma31_part_iii_check(N, S, 2))

    def test_support_meets_S(self):
        N = FactoredInteger.from_int(35)
        self.assertEqual(partition(N, [5, 7])[0], {5, 7})
        self.assertTrue(lemma31_part_i_check(N, [5, 7], 2))
        self.assertTrue(lemma31_part_iii_check(N, [5, 7], 2))

    def test_mixed_exponents(self):
        N = FactoredInteger.from_factors({2: 22, 5: 3, 11: 1, 29: 1})
        for check in (lemma31_part_i_check, lemma31_part_ii_check, lemma31_part_iii_check):
            self.assertTrue(check(N, [11, 13, 17], 2))

    def test_part_i_matches_definitions(self):
        rng = random.Random(31)
        outcomes = {True: 0, False: 0, None: 0}
        for _ in range(10_000):
            S = sorted(rng.sample(S_PRIMES, rng.randint(2, 4)))
            k = rng.randint(2, len(S))
            factors = {}
            for p in rng.sample(SMALL_PRIMES, rng.randint(1, 6)):
                if rng.random() < 0.5:
                    l = rng.choice(S)
                    factors[p] = l * rng.randint(1, 50 // l)
                else:
                    factors[p] = rng.randint(1, 50)
            N = math.prod(p**e for p, e in factors.items())
            if N == 2 ** math.prod(S[:k]):
                continue
            expected = part_i_oracle(factors, S, k)
            outcomes[expected] += 1
            fi = FactoredInteger.from_factors(factors)
            if expected is None:
                with self.assertRaises(DomainError):
                    lemma31_part_i_check(fi, S, k)
            else:
                self.assertEqual(lemma31_part_i_check(fi, S, k), expected, (factors, S, k))
        self.assertGreater(outcomes[True], 0)
        self.assertGreater(outcomes[None], 0)

    def test_hypothesis_required(self):
        N = FactoredInteger.from_factors({2: 200})
        with self.assertRaises(DomainError):
            lemma31_part_i_check(N, [5, 7], 2)
        with self.assertRaises(DomainError):
            lemma31_part_ii_check(N, [4, 7], 2)


class TestCombinerParams(unittest.TestCase):
    def _params(self, S, vol=1.0, **kw):
        S = np.array(S, dtype=np.int64)
        return CombinerParams(S=S, k=2, vol_hi=np.full(S.size, vol), **kw)

    def test_constants(self):
        params = self._params([11, 17, 19])
        expected = (local_slope(11) + local_slope(17) + local_slope(19)) / 3
        self.assertTrue(params.a1.contains(expected))
        self.assertTrue(params.a2.contains(3.0))
        self.assertEqual(params.k_of_S, 187)
        self.assertEqual(params.a2.lo, 0.0)

    def test_invalid_sets(self):
        with self.assertRaises(DomainError):
            self._params([11])
        with self.assertRaises(DomainError):
            self._params([7, 11])
        with self.assertRaises(DomainError):
            self._params([11, 13])
        with self.assertRaises(DomainError):
            self._params([17, 11])
        with self.assertRaises(DomainError):
            self._params([11, 17], vol=-1.0)
        self._params([11, 13], allow_13=True)

    def test_bound_covers_a_real_triple(self):
        # 3 + 125 = 128: rad(abc) = 30
        params = self._params([11, 17, 19, 23])
        h = Enclosure.from_int(128).log()
        bound = combiner_bound(params, h, Enclosure.from_int(30).log())
        self.assertTrue(bound.definitely_gt(h - 3 * Enclosure.from_int(30).log()))

    def test_margin_sign(self):
        params = self._params([37, 41, 43, 47, 53, 59, 61, 67, 71, 73], vol=0.0)
        self.assertLess(theorem32_margin(params, 1000.0).hi, 0.0)


class TestSweep(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.tables = build_tables(10_000, stride=1024, segment_size=4096)
        cls.provider = VolProvider.constant(Fraction(10))
        cls.certs = sweep_theorem32(cls.tables, H_LO, H_HI, step_ratio=1.1, provider=cls.provider)

    def test_grid(self):
        grid = geometric_grid(H_LO, H_HI, 1.1)
        self.assertEqual(grid[0], H_LO)
        self.assertEqual(grid[-1], H_HI)
        with self.assertRaises(DomainError):
            geometric_grid(H_LO, H_HI, 1.0)

    def test_sweep_covers_range(self):
        self.assertTrue(covers(self.certs, H_LO, H_HI))
        self.assertFalse(covers(self.certs[1:], H_LO, H_HI))
        for cert in self.certs:
            self.assertEqual(cert.check_kind, CheckKind.ABC_SWEEP)
            self.assertTrue(all(m.hi < 0 for m in cert.margins.values()))
            self.assertGreater(int(cert.k_of_S) * 0.6931, cert.upper)

    def test_summary_marks_external_input(self):
        summary = sweep_summary(self.certs, H_LO, H_HI, 1.1, tables_limit=self.tables.limit)
        self.assertEqual(summary.status, VerdictStatus.PASS)
        self.assertEqual(summary.details["intervals"], len(self.certs))
        self.assertTrue(summary.external_inputs)

    def test_revalidate(self):
        for cert in self.certs:
            self.assertTrue(revalidate_certificate(cert, self.tables))

    def test_tampered_certificate(self):
        cert = self.certs[0]
        bad = cert.model_copy(update={"a1": cert.a1.model_copy(update={"lo": cert.a1.lo / 2})})
        with self.assertRaises(CertificateError):
            revalidate_certificate(bad, self.tables)
        wrong_kind = cert.model_copy(update={"check_kind": CheckKind.FERMAT_CASE})
        with self.assertRaises(CertificateError):
            revalidate_certificate(wrong_kind, self.tables)

    def test_journal_and_resume(self):
        with tempfile.TemporaryDirectory() as d:
            path = os.path.join(d, "abc.jsonl")
            with CertificateJournal(path) as journal:
                first = sweep_theorem32(self.tables, H_LO, H_HI, 1.1, provider=self.provider, journal=journal)
            replayed = list(CertificateJournal.replay_typed(path, ExclusionCertificateModel))
            self.assertEqual(len(replayed), len(first))
            resumed = sweep_theorem32(self.tables, H_LO, H_HI, 1.1, provider=self.provider, resume_from=replayed)
            self.assertEqual([c.digest for c in resumed], [c.digest for c in first])

    def test_workers_agree(self):
        parallel = sweep_theorem32(self.tables, H_LO, H_HI, 1.1, provider=self.provider, workers=2)
        self.assertEqual([c.digest for c in parallel], [c.digest for c in self.certs])


class TestConstantChecks(unittest.TestCase):
    def test_epsilon_form(self):
        cert = corollary33_check()
        self.assertEqual(cert.status, VerdictStatus.PASS)
        self.assertEqual(cert.details["u0"], "7744")
        self.assertTrue(cert.details["identity"])
        self.assertFalse(cert.details["derivative_failures"])

    def test_tail_constants(self):
        cert = tail_constants_check(x_hi=2000)
        self.assertEqual(cert.status, VerdictStatus.PASS)


if __name__ == '__main__':
    unittest.main()
