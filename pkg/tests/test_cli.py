import contextlib
import io
import math
import os
import tempfile
import unittest
from unittest.mock import patch

import orjson

from src.analytic_bounds import CONSTANTS
from src.cli.__main__ import build_parser, main
from src.cli.commands import parse_exponent, parse_height, parse_log_x
from src.core.errors import DomainError
from src.core.types import EnclosureModel, SweepCertificate
from src.core.verdict import VerdictStatus


def run_cli(*argv):
    out = io.StringIO()
    with contextlib.redirect_stdout(out):
        code = main(list(argv))
    lines = [line for line in out.getvalue().splitlines() if line.strip()]
    return code, lines


class TestArgumentHelpers(unittest.TestCase):
    def test_exponent_forms(self):
        self.assertEqual(parse_exponent("e31"), 31)
        self.assertEqual(parse_exponent("e^31"), 31)
        self.assertIsNone(parse_exponent("600"))

    def test_height_rounds_up(self):
        self.assertGreaterEqual(parse_height("e31"), math.exp(31))
        self.assertEqual(parse_height("680"), 680.0)

    def test_log_x(self):
        self.assertEqual(parse_log_x("e31"), 31)
        with self.assertRaises(DomainError):
            parse_log_x("0.5")

    def test_every_command_parses(self):
        parser = build_parser()
        for argv in (
            ["flt"],
            ["cor48", "--bound", "3406"],
            ["sieve", "--limit", "1000"],
            ["vol", "--l", "11", "--method", "f2"],
            ["sweep-abc", "--h-max", "e31", "--variant", "rlprime"],
            ["table1", "--rows", "min>=8", "(3,4)"],
            ["search", "--h-max", "600", "--min-exp", "20"],
            ["recheck", "--cert", "x.jsonl"],
        ):
            self.assertEqual(parser.parse_args(argv).command, argv[0])


class TestCommands(unittest.TestCase):
    def setUp(self):
        self._dir = tempfile.TemporaryDirectory()
        self.dir = self._dir.name
        self.cache = ["--table-cache", os.path.join(self.dir, "tables")]

    def tearDown(self):
        self._dir.cleanup()

    def test_flt_passes(self):
        code, lines = run_cli(*self.cache, "flt", "--p", "11")
        self.assertEqual(code, 0)
        self.assertEqual(len(lines), 1)
        doc = orjson.loads(lines[0])
        self.assertEqual(doc["status"], "PASS")
        self.assertEqual(doc["kind"], "flt")
        self.assertEqual(len(doc["config_hash"]), 16)

    def test_sweep_f1_defaults_to_ten_a(self):
        cert = SweepCertificate(kind="f1_sweep", status=VerdictStatus.PASS, worst_margin=EnclosureModel(lo=1.0, hi=1.0))
        with patch("src.cli.commands.obtain_tables") as tables, patch("src.cli.commands.sweep_f1", return_value=cert) as sweep:
            code, lines = run_cli(*self.cache, "sweep-f1")
        self.assertEqual(code, 0)
        self.assertEqual(sweep.call_args.args[:2], (200_000, 10 * CONSTANTS.A))
        self.assertEqual(tables.call_args.args[1], 10 * CONSTANTS.A)
        self.assertEqual(orjson.loads(lines[0])["kind"], "f1_sweep")

    def test_cor48_violation_exits_two(self):
        code, lines = run_cli(*self.cache, "cor48", "--bound", "700000000")
        self.assertEqual(code, 2)
        self.assertEqual(orjson.loads(lines[0])["status"], "FAIL")

    def test_usage_error_is_json(self):
        code, lines = run_cli("no-such-command")
        self.assertEqual(code, 1)
        doc = orjson.loads(lines[0])
        self.assertEqual(doc["error"], "usage")
        self.assertIn("schema", doc)

    def test_domain_error_is_json(self):
        code, lines = run_cli(*self.cache, "flt", "--p", "7")
        self.assertEqual(code, 1)
        self.assertEqual(orjson.loads(lines[0])["error"], "domain")

    def test_catalog_and_radical_bounds(self):
        code, lines = run_cli(*self.cache, "verify-catalog")
        self.assertEqual(code, 0)
        doc = orjson.loads(lines[0])
        self.assertTrue(all(doc["details"]["radical_bounds"].values()))

    def test_exact_vol(self):
        code, lines = run_cli(*self.cache, "vol", "--l", "11")
        self.assertEqual(code, 0)
        doc = orjson.loads(lines[0])
        self.assertTrue(doc["above_log_pi"])
        self.assertEqual(doc["method"], "exact")

    def test_sieve_then_vol_from_cache(self):
        code, _ = run_cli(*self.cache, "sieve", "--limit", "20000")
        self.assertEqual(code, 0)
        self.assertTrue(os.listdir(self.cache[1]))
        code, lines = run_cli(*self.cache, "vol", "--l", "13", "--method", "closed")
        self.assertEqual(code, 0)
        self.assertEqual(orjson.loads(lines[0])["method"], "closed_form")

    def test_recheck_round_trip(self):
        out = os.path.join(self.dir, "certs.jsonl")
        self.assertEqual(run_cli(*self.cache, "--out", out, "flt")[0], 0)
        self.assertEqual(run_cli(*self.cache, "--out", out, "verify-catalog")[0], 0)
        self.assertEqual(run_cli(*self.cache, "--out", out, "vol", "--l", "11")[0], 0)
        code, lines = run_cli(*self.cache, "recheck", "--cert", out)
        self.assertEqual(code, 0)
        doc = orjson.loads(lines[0])
        self.assertEqual(doc["records"], 3)
        self.assertEqual(doc["verified"], 2)
        self.assertEqual(len(doc["skipped"]), 1)

    def test_recheck_detects_changed_verdict(self):
        out = os.path.join(self.dir, "cor48.json")
        code, lines = run_cli(*self.cache, "cor48", "--bound", "3406")
        self.assertEqual(code, 0)
        doc = orjson.loads(lines[0])
        doc["status"] = "FAIL"
        with open(out, "wb") as f:
            f.write(orjson.dumps(doc))
        code, lines = run_cli(*self.cache, "recheck", "--cert", out)
        self.assertEqual(code, 2)
        self.assertEqual(len(orjson.loads(lines[0])["failed"]), 1)

    def test_missing_certificate_file(self):
        code, lines = run_cli(*self.cache, "recheck", "--cert", os.path.join(self.dir, "absent.jsonl"))
        self.assertEqual(code, 1)
        self.assertEqual(orjson.loads(lines[0])["error"], "certificate")


if __name__ == '__main__':
    unittest.main()
