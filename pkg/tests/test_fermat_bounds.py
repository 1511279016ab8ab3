import unittest
from fractions import Fraction

import numpy as np

from src.abc_verifier import CombinerParams, VolProvider
from src.core.errors import DomainError
from src.core.verdict import VerdictStatus
from src.fermat_bounds import (
    TABLE1_ROWS,
    SignatureClass,
    b1_b2,
    best_b1,
    cap_check,
    chain_covers,
    class_b1,
    cor48_33n_check,
    flt_contradiction,
    radical_bound_check,
    radical_bounds,
    revalidate_exclusion,
    row_report,
    table1,
    table1_report,
    tuple_b1,
)
from src.fermat_bounds.signature import min_class, table1_row
from src.power_search import CATALOG, search
from src.power_search.catalog import KnownSolution
from src.fermat_bounds.radical import is_catalan_exception, reduced_N
from src.prime_tables import build_tables

LARGE_S = [101, 103, 107, 109, 113, 127, 131, 137, 139, 149]


def make_params(S=LARGE_S, vol=1.0, **kw):
    S = np.array(S, dtype=np.int64)
    return CombinerParams(S=S, k=2, vol_hi=np.full(S.size, vol), **kw)


class TestTupleB1(unittest.TestCase):
    def setUp(self):
        self.params = make_params()
        self.T = self.params.three_plus_a1

    def test_equal_exponents_case_c(self):
        value = tuple_b1(3, 3, 3, self.params, "c")
        self.assertAlmostEqual(value.hi, self.T.hi / 3, places=9)
        best, _ = best_b1(3, 3, 3, self.params)
        self.assertAlmostEqual(best.hi, self.T.hi / 3, places=9)

    def test_best_is_smallest_applicable(self):
        for rp, sp, t in ((3, 5, 4), (4, 9, 5), (5, 5, 5), (3, 20, 3)):
            best, case = best_b1(rp, sp, t, self.params)
            for c in ("a", "b", "c"):
                try:
                    value = tuple_b1(rp, sp, t, self.params, c)
                except DomainError:
                    continue
                self.assertLessEqual(best.hi, value.hi)
            self.assertEqual(best.hi, tuple_b1(rp, sp, t, self.params, case).hi)

    def test_inapplicable_case(self):
        with self.assertRaises(DomainError):
            tuple_b1(3, 5, 4, self.params, "b")
        with self.assertRaises(DomainError):
            tuple_b1(5, 3, 4, self.params, "a")


class TestSignatureClasses(unittest.TestCase):
    def test_rows(self):
        self.assertEqual(len(TABLE1_ROWS), 10)
        cls, bound = table1_row("min>=8")
        self.assertEqual(bound, 573)
        self.assertTrue(cls.contains(8, 100, 9))
        first, _ = table1_row("(3,3)")
        self.assertFalse(first.contains(3, 3, 3))
        self.assertTrue(first.contains(3, 4, 3))
        with self.assertRaises(DomainError):
            table1_row("(2,2)")

    def test_min_class_widens(self):
        self.assertTrue(min_class(5).contains(6, 7, 8))
        self.assertEqual(min_class(5).variant, "rlprime")
        self.assertEqual(SignatureClass("(3,4)", r_lo=3, r_hi=3, t_lo=4, t_hi=4).variant, "rl")

    def test_class_dominates_its_tuples(self):
        params = make_params()
        cls, _ = table1_row("(3,4)")
        value, extremal = class_b1(cls, params)
        for sp in range(3, 60):
            tuple_value, _ = best_b1(3, sp, 4, params)
            self.assertGreaterEqual(value.hi, tuple_value.hi * (1 - 1e-12), sp)
        self.assertEqual(extremal["t"], 4)

    def test_tail_row_bounds_far_tuples(self):
        params = make_params()
        value, _ = class_b1(min_class(8, at_least=True), params)
        for rp, sp, t in ((8, 100, 60), (70, 80, 9), (200, 200, 200)):
            self.assertGreaterEqual(value.hi, best_b1(rp, sp, t, params)[0].hi)

    def test_preconditions(self):
        cls, _ = table1_row("(3,4)")
        with self.assertRaises(DomainError):
            b1_b2(cls, make_params([13, 17, 19], allow_13=True))
        with self.assertRaises(DomainError):
            b1_b2(cls, make_params(vol_variant="rlprime"))
        b1, b2 = b1_b2(min_class(4), make_params([13, 17, 19], allow_13=True))
        self.assertGreater(b2.lo, 0.0)
        self.assertLess(b1.lo, b1.hi)


class TestTable1(unittest.TestCase):
    CAP = 5e4

    @classmethod
    def setUpClass(cls):
        cls.tables = build_tables(10_000, stride=1024, segment_size=4096)
        cls.cls, cls.published = table1_row("min>=8")
        cls.row = row_report(
            cls.cls, cls.published, cls.tables, VolProvider.constant(Fraction(1), cls.cls.variant), cap=cls.CAP
        )

    def test_row_chain(self):
        chain = self.row.certificates
        self.assertTrue(chain)
        self.assertTrue(self.row.extremal["covered"])
        self.assertEqual(self.row.extremal["cap"], self.CAP)
        self.assertTrue(chain_covers(chain, self.row.h_bound.hi, self.CAP))
        self.assertFalse(chain_covers(chain, self.row.h_bound.hi, 10 * chain[0].upper))
        self.assertFalse(chain_covers([], 1.0, self.CAP))

    def test_certificates_revalidate(self):
        for cert in self.row.certificates:
            self.assertTrue(revalidate_exclusion(cert, self.tables))
            self.assertLess(cert.b1.hi, 1.0)
            self.assertLess(cert.lower, cert.upper)

    def test_computed_bound(self):
        self.assertGreater(self.row.computed_bound.lo, self.row.h_bound.hi)
        self.assertEqual(self.row.passed, self.row.computed_bound.hi <= 1.1 * self.published)

    def test_parallel_rows_and_report(self):
        rows = table1(self.tables, rows=["min>=8"], cap=self.CAP, vol_constant=Fraction(1), workers=2)
        self.assertEqual(rows[0].computed_bound, self.row.computed_bound)
        report = table1_report(rows, cap_check())
        expected = VerdictStatus.PASS if rows[0].passed else VerdictStatus.FAIL
        self.assertEqual(report["status"], expected.value)
        self.assertEqual(report["summary"][0]["row"], "min>=8")

    def test_cap(self):
        self.assertEqual(cap_check().status, VerdictStatus.PASS)
        self.assertEqual(cap_check(1e4).status, VerdictStatus.FAIL)


class TestRadicalBounds(unittest.TestCase):
    def test_catalog(self):
        for sol in CATALOG:
            if is_catalan_exception(*sol.as_tuple):
                continue
            self.assertTrue(radical_bound_check(sol.as_tuple), str(sol))

    def test_toy_search_solutions(self):
        solutions = search(30, 2)
        self.assertTrue(solutions)
        for sol in solutions:
            self.assertTrue(radical_bound_check((sol.x, sol.y, sol.z, sol.r, sol.s, sol.t)))

    def test_reduced_N_drops_sixteen(self):
        # 3^2 + 4^2 = 5^2: abc = 2^4 3^2 5^2
        self.assertEqual(dict(reduced_N(3, 4, 5, 2, 2, 2).factors), {3: 2, 5: 2})

    def test_cases_follow_exponents(self):
        names = {b.name for b in radical_bounds(3, 4, 5, 2, 2, 2)}
        self.assertTrue({"i", "ii", "iii", "iii_sharp", "iv"} <= names)
        sol = KnownSolution(2, 5, 7, 2, 3, 4)
        names = {b.name for b in radical_bounds(*sol.as_tuple, subset=[3])}
        self.assertIn("i", names)
        self.assertNotIn("iii", names)

    def test_bad_input(self):
        with self.assertRaises(DomainError):
            radical_bound_check((2, 3, 4, 2, 2, 2))
        with self.assertRaises(DomainError):
            radical_bound_check((6, 8, 10, 2, 2, 2))
        with self.assertRaises(DomainError):
            radical_bounds(3, 4, 5, 2, 2, 2, subset=[7])


class TestCorollaries(unittest.TestCase):
    def test_flt(self):
        for p in (11, 13):
            cert = flt_contradiction(p, grid_hi=2000)
            self.assertEqual(cert.status, VerdictStatus.PASS, p)
            self.assertFalse(cert.details["slope_failures"])

    def test_flt_bound_too_large(self):
        self.assertEqual(flt_contradiction(11, 1000, grid_hi=100).status, VerdictStatus.FAIL)
        with self.assertRaises(DomainError):
            flt_contradiction(7)
        with self.assertRaises(DomainError):
            flt_contradiction(12)

    def test_cor48(self):
        cert = cor48_33n_check(24626)
        self.assertEqual(cert.status, VerdictStatus.PASS)
        self.assertTrue(cert.details["below_1e5"])
        self.assertEqual(cor48_33n_check(Fraction(7 * 10**8)).status, VerdictStatus.FAIL)
        with self.assertRaises(DomainError):
            cor48_33n_check(0)


if __name__ == '__main__':
    unittest.main()
