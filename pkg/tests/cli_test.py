import json
import os
import tempfile
import unittest

from nltlab.checkpoint import write_checkpoint
from nltlab.cli import main
from nltlab.experiment import FINAL_CHECKPOINT, ExitCode
from nltlab.spectral import Grid, SpectralField
from tests.shared_data import constant_yml


class TestCli(unittest.TestCase):
    def setUp(self):
        self._tmpdir = tempfile.TemporaryDirectory()
        self.tmpdir = self._tmpdir.name

    def tearDown(self):
        self._tmpdir.cleanup()

    def _write(self, name, text):
        path = os.path.join(self.tmpdir, name)
        with open(path, "w") as handle:
            handle.write(text)
        return path

    def test_usage(self):
        self.assertEqual(main([]), ExitCode.USAGE)
        self.assertEqual(main(["simulate"]), ExitCode.USAGE)
        self.assertEqual(main(["--version"]), ExitCode.OK)

    def test_config_errors(self):
        missing = os.path.join(self.tmpdir, "missing.yml")
        self.assertEqual(main(["simulate", "--config", missing]), ExitCode.USAGE)
        bad = self._write("bad.yml", constant_yml + "colour: blue\n")
        self.assertEqual(main(["simulate", "--config", bad]), ExitCode.USAGE)

    def test_simulate(self):
        path = self._write("constant.yml", constant_yml)
        out = os.path.join(self.tmpdir, "run")
        self.assertEqual(main(["simulate", "--config", path, "--out", out]), ExitCode.OK)
        self.assertTrue(os.path.isfile(os.path.join(out, FINAL_CHECKPOINT)))

        resumed = os.path.join(self.tmpdir, "resumed")
        code = main(
            [
                "simulate",
                "--config",
                path,
                "--out",
                resumed,
                "--resume",
                os.path.join(out, FINAL_CHECKPOINT),
            ]
        )
        self.assertEqual(code, ExitCode.OK)

    def test_verify_ops(self):
        report = os.path.join(self.tmpdir, "report.json")
        self.assertEqual(main(["verify-ops", "--out", report]), ExitCode.OK)
        with open(report) as handle:
            self.assertTrue(json.load(handle)["passed"])
        self.assertEqual(
            main(["verify-ops", "--corrupt", "hilbert", "--out", report]),
            ExitCode.VERIFICATION_FAILED,
        )

    def test_checkpoint_inspect(self):
        path = os.path.join(self.tmpdir, "theta.chk")
        write_checkpoint(path, SpectralField.from_physical(Grid(16), [1.0] * 16), 0.5)
        self.assertEqual(main(["checkpoint", "inspect", path]), ExitCode.OK)

        with open(path, "r+b") as handle:
            handle.seek(30)
            handle.write(b"\xff")
        self.assertEqual(main(["checkpoint", "inspect", path]), ExitCode.CORRUPT_CHECKPOINT)
