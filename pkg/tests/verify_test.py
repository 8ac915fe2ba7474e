import unittest

import pytest

from nltlab.errors import NltParameterError
from nltlab.spectral import Grid
from nltlab.verify import CHECKS, OperatorTable, run_suite


class TestSuite(unittest.TestCase):
    def test_quick_suite_passes(self):
        report = run_suite("quick")
        self.assertEqual(report.n, 256)
        self.assertEqual([check.name for check in report.checks], list(CHECKS))
        self.assertTrue(report.passed, report.as_dict())
        self.assertEqual(report.as_dict()["failed"], [])

    def test_reproducible(self):
        a = run_suite("quick", only=["commutators"], seed=4)
        b = run_suite("quick", only=["commutators"], seed=4)
        self.assertEqual(a.checks[0].value, b.checks[0].value)

    def test_unknown_names(self):
        with pytest.raises(NltParameterError):
            run_suite("medium")
        with pytest.raises(NltParameterError):
            run_suite("quick", only=["parseval"])


class TestFaultInjection(unittest.TestCase):
    def setUp(self):
        self.table = OperatorTable(Grid(256))

    def test_corrupted_hilbert_symbol(self):
        report = run_suite(
            "quick",
            table=self.table.corrupt("hilbert"),
            only=["hilbert_square", "lambda_equals_h_dx", "hardy_identity"],
        )
        self.assertFalse(report.passed)
        self.assertIn("hilbert_square", report.failed)

    def test_corrupted_lambda_symbol(self):
        report = run_suite("quick", table=self.table.corrupt("lambda"))
        self.assertEqual(report.failed, ["lambda_equals_h_dx"])

    def test_nonzero_mean_symbol(self):
        report = run_suite(
            "quick", table=self.table.corrupt("hilbert", index=0), only=["symbol_tables"]
        )
        self.assertEqual(report.failed, ["symbol_tables"])

    def test_unknown_table(self):
        with pytest.raises(NltParameterError):
            self.table.corrupt("riesz")
