import math
import os
import tempfile
import time
import unittest
from fractions import Fraction

import structlog

from src.core.clock import Clock, Stopwatch
from src.core.config import DeterministicRNG, RunConfig, init_precision
from src.core.enclosure import LOG2, LOG_PI, Enclosure, log_of, require_lt
from src.core.errors import CertificateError, DomainError, IndecisiveVerdictError
from src.core.hasher import CanonicalHasher
from src.core.journal import CertificateJournal, dumps
from src.core.logger import bind_run, configure_logging
from src.core.types import EnclosureModel, SweepCertificate, Table1RowModel
from src.core.verdict import EXIT_CODES, Verdict, VerdictStatus, combine
from src.core.workers import ordered_map


def _square(x):
    return x * x


class TestEnclosure(unittest.TestCase):
    def test_contains_true_values(self):
        self.assertTrue(LOG2.contains(math.log(2)))
        self.assertTrue(LOG_PI.contains(math.log(math.pi)))
        third = Enclosure.from_fraction(Fraction(1, 3))
        self.assertTrue(third.contains(Fraction(1, 3)))
        self.assertLess(third.lo, third.hi)

    def test_arithmetic_is_outward(self):
        a = Enclosure.from_fraction(Fraction(1, 10))
        s = a + a + a
        self.assertTrue(s.contains(Fraction(3, 10)))
        p = Enclosure.exact(3.0) * a
        self.assertTrue(p.contains(Fraction(3, 10)))
        q = Enclosure.exact(1.0) / Enclosure.exact(3.0)
        self.assertTrue(q.contains(Fraction(1, 3)))

    def test_huge_integer_log(self):
        n = 10**400
        e = log_of(n)
        self.assertAlmostEqual(e.mid, 400 * math.log(10), places=9)
        self.assertLess(e.lo, e.hi)
        self.assertEqual(log_of(1), Enclosure(0.0, 0.0))

    def test_log_of_rational(self):
        e = log_of(Fraction(3, 2))
        self.assertTrue(e.lo <= math.log(1.5) <= e.hi)

    def test_domain_errors(self):
        with self.assertRaises(DomainError):
            log_of(0)
        with self.assertRaises(DomainError):
            Enclosure(-1.0, 1.0).log()
        with self.assertRaises(ZeroDivisionError):
            Enclosure.exact(1.0) / Enclosure(-1.0, 1.0)

    def test_require_lt(self):
        self.assertTrue(require_lt(Enclosure(0.0, 1.0), Enclosure(2.0, 3.0), "ordered"))
        self.assertFalse(require_lt(Enclosure(2.0, 3.0), Enclosure(0.0, 1.0), "reversed"))
        with self.assertRaises(IndecisiveVerdictError) as ctx:
            require_lt(Enclosure(0.0, 2.0), Enclosure(1.0, 3.0), "overlap", point=7)
        self.assertEqual(ctx.exception.kind, "indecisive")
        self.assertEqual(ctx.exception.details["point"], 7)

    def test_invalid_enclosure(self):
        with self.assertRaises(ValueError):
            Enclosure(1.0, 0.0)


class TestVerdict(unittest.TestCase):
    def test_exit_codes(self):
        self.assertEqual(EXIT_CODES[VerdictStatus.PASS], 0)
        self.assertEqual(EXIT_CODES[VerdictStatus.FAIL], 2)
        self.assertEqual(EXIT_CODES[VerdictStatus.ERROR], 1)

    def test_combine(self):
        self.assertEqual(combine([VerdictStatus.PASS, VerdictStatus.PASS]), VerdictStatus.PASS)
        self.assertEqual(combine([VerdictStatus.PASS, VerdictStatus.FAIL]), VerdictStatus.FAIL)
        self.assertEqual(combine([VerdictStatus.FAIL, VerdictStatus.ERROR]), VerdictStatus.ERROR)

    def test_summary(self):
        ok = Verdict(VerdictStatus.PASS, "flt", items_checked=3)
        self.assertTrue(ok.is_pass())
        self.assertEqual(ok.exit_code, 0)
        self.assertIn("flt verified 3", ok.summary())
        err = Verdict(VerdictStatus.ERROR, "domain", error_message="p must be a prime >= 11")
        self.assertEqual(err.exit_code, 1)
        self.assertTrue(err.summary().startswith("ERROR"))


class TestConfig(unittest.TestCase):
    def test_frozen(self):
        config = RunConfig(command="flt", table_cache="/tmp/x")
        with self.assertRaises(Exception):
            config.workers = 4

    def test_hash_ignores_paths(self):
        a = RunConfig(command="flt", table_cache="/tmp/a", workers=1)
        b = RunConfig(command="flt", table_cache="/tmp/b", workers=8, out="x.jsonl")
        c = RunConfig(command="flt", table_cache="/tmp/a", seed=7)
        self.assertEqual(a.config_hash(), b.config_hash())
        self.assertNotEqual(a.config_hash(), c.config_hash())
        self.assertEqual(len(a.config_hash()), 16)

    def test_rng_reproducible(self):
        a, b = DeterministicRNG(5), DeterministicRNG(5)
        self.assertEqual([a.randint(0, 1000) for _ in range(10)], [b.randint(0, 1000) for _ in range(10)])

    def test_precision_tiers(self):
        self.assertEqual(init_precision("extended"), 128)
        self.assertEqual(init_precision("standard"), 53)


class TestClock(unittest.TestCase):
    def test_monotonic(self):
        t1 = Clock.now_us()
        time.sleep(0.001)
        t2 = Clock.now_us()
        self.assertIsInstance(t1, int)
        self.assertGreater(t2, t1)
        self.assertGreaterEqual(Stopwatch().elapsed_ms(), 0)


class TestLogging(unittest.TestCase):
    def test_levels(self):
        configure_logging("debug")
        with self.assertRaises(ValueError):
            configure_logging("chatty")
        configure_logging("INFO")

    def test_run_context(self):
        bind_run("flt", "0123456789abcdef")
        self.assertEqual(structlog.contextvars.get_contextvars()["command"], "flt")
        structlog.contextvars.clear_contextvars()


class TestJournal(unittest.TestCase):
    def _cert(self, kind="flt"):
        return SweepCertificate(kind=kind, status=VerdictStatus.PASS, worst_margin=EnclosureModel(lo=1.0, hi=2.0))

    def test_append_and_replay(self):
        with tempfile.TemporaryDirectory() as d:
            path = os.path.join(d, "certs.jsonl")
            with CertificateJournal(path) as journal:
                journal.append(self._cert("flt"))
                journal.append(self._cert("catalog"))
            records = list(CertificateJournal.replay(path))
            self.assertEqual([r.kind for r in records], ["flt", "catalog"])
            self.assertTrue(all(r.schema_version == "abcv/1" for r in records))

    def test_composite_report_expands(self):
        row = Table1RowModel(
            row="min>=8",
            published_bound=573,
            tolerance=1.1,
            h_bound=EnclosureModel(lo=500.0, hi=500.0),
            computed_bound=EnclosureModel(lo=502.0, hi=503.0),
            passed=True,
        )
        with tempfile.TemporaryDirectory() as d:
            path = os.path.join(d, "report.json")
            with open(path, "wb") as f:
                f.write(dumps({"kind": "table1", "rows": [row.model_dump(mode="json")]}))
            records = list(CertificateJournal.replay_typed(path, Table1RowModel))
            self.assertEqual(len(records), 1)
            self.assertEqual(records[0].row, "min>=8")

    def test_malformed_record(self):
        with tempfile.TemporaryDirectory() as d:
            path = os.path.join(d, "bad.jsonl")
            with open(path, "w") as f:
                f.write('{"kind": "exclusion", "lower": 1.0}\n')
            with self.assertRaises(CertificateError):
                list(CertificateJournal.replay(path))


class TestHasher(unittest.TestCase):
    def test_key_order_independent(self):
        self.assertEqual(CanonicalHasher.digest({"a": 1, "b": 2}), CanonicalHasher.digest({"b": 2, "a": 1}))

    def test_fraction_and_digest_field(self):
        a = CanonicalHasher.digest_certificate({"x": Fraction(1, 3), "digest": "abc"})
        b = CanonicalHasher.digest_certificate({"x": Fraction(1, 3), "digest": "def"})
        self.assertEqual(a, b)


class TestWorkers(unittest.TestCase):
    def test_order_independent_of_workers(self):
        tasks = list(range(20))
        self.assertEqual(ordered_map(_square, tasks, workers=1), ordered_map(_square, tasks, workers=3))


if __name__ == '__main__':
    unittest.main()
