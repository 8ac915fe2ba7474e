import math
import os
import tempfile
import unittest

import numpy as np
import pytest

from nltlab.checkpoint import (
    Checkpoint,
    inspect_checkpoint,
    read_checkpoint,
    write_checkpoint,
)
from nltlab.errors import NltCheckpointError
from nltlab.spectral import Grid, SpectralField


class TestCheckpoint(unittest.TestCase):
    def setUp(self):
        self.tmpdir = tempfile.TemporaryDirectory()
        self.path = os.path.join(self.tmpdir.name, "theta.chk")
        grid = Grid(32, 32.0 * math.pi)
        rng = np.random.default_rng(11)
        self.theta = SpectralField.from_physical(grid, rng.standard_normal(grid.n))
        write_checkpoint(self.path, self.theta, 0.125)

    def tearDown(self):
        self.tmpdir.cleanup()

    def _corrupt(self, transform):
        with open(self.path, "rb") as handle:
            data = handle.read()
        with open(self.path, "wb") as handle:
            handle.write(transform(data))

    def test_bit_exact(self):
        chk = read_checkpoint(self.path)
        self.assertEqual(chk.n, 32)
        self.assertEqual(chk.period, 32.0 * math.pi)
        self.assertEqual(chk.t, 0.125)
        np.testing.assert_array_equal(chk.values, self.theta.physical)
        self.assertEqual(chk.to_field().grid, self.theta.grid)

    def test_file_size(self):
        # header, n doubles and the checksum
        self.assertEqual(os.path.getsize(self.path), 26 + 8 * 32 + 8)
        self.assertFalse(os.path.exists(self.path + ".tmp"))

    def test_truncated(self):
        self._corrupt(lambda data: data[:-9])
        with pytest.raises(NltCheckpointError):
            read_checkpoint(self.path)
        self._corrupt(lambda data: data[:10])
        with pytest.raises(NltCheckpointError):
            read_checkpoint(self.path)

    def test_bad_magic(self):
        self._corrupt(lambda data: b"XXXX" + data[4:])
        with pytest.raises(NltCheckpointError) as info:
            read_checkpoint(self.path)
        self.assertIn("magic", str(info.value))

    def test_flipped_payload_bit(self):
        def flip(data):
            data = bytearray(data)
            data[40] ^= 0x01
            return bytes(data)

        self._corrupt(flip)
        with pytest.raises(NltCheckpointError) as info:
            read_checkpoint(self.path)
        self.assertIn("checksum", str(info.value))

    def test_unsupported_version(self):
        data = Checkpoint(4, 1.0, 0.0, np.zeros(4), version=9).to_bytes()
        with pytest.raises(NltCheckpointError):
            Checkpoint.from_bytes(data)

    def test_missing_file(self):
        with pytest.raises(NltCheckpointError):
            read_checkpoint(os.path.join(self.tmpdir.name, "missing.chk"))

    def test_inspect(self):
        info = inspect_checkpoint(self.path)
        self.assertEqual(info["n"], 32)
        self.assertEqual(info["t"], 0.125)
        self.assertEqual(info["checksum"], "ok")
        self.assertEqual(info["max"], float(self.theta.physical.max()))
