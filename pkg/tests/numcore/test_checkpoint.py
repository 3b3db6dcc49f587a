import os
import tempfile
import unittest

import numpy as np

from crlkit import exception
from crlkit.numcore import DenseNet, checkpoint


class TestCheckpoint(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.path = os.path.join(self.tmp.name, "ckpt.bin")

    def tearDown(self):
        self.tmp.cleanup()

    def test_save_and_load(self):
        rng = np.random.default_rng(1)
        net = DenseNet.create([3, 4, 2], rng, activation="relu", layer_norm_first=True)
        z = np.array([0.02, -0.5])
        checkpoint.save(self.path, nets={"policy": net}, arrays={"z": z, "alpha": np.array(0.02)})
        nets, arrays = checkpoint.load(self.path)
        loaded = nets["policy"]
        self.assertEqual(net.layer_sizes, loaded.layer_sizes)
        self.assertEqual("relu", loaded.activation)
        self.assertTrue(loaded.layer_norm_first)
        for a, b in zip(net.params(), loaded.params()):
            np.testing.assert_array_equal(a, b)
        np.testing.assert_array_equal(z, arrays["z"])
        self.assertEqual((), arrays["alpha"].shape)

    def test_header(self):
        checkpoint.save(self.path, arrays={"x": np.zeros(1)})
        with open(self.path, "rb") as fp:
            self.assertEqual(b"CRLKCKPT", fp.read(8))

    def test_not_a_checkpoint(self):
        with open(self.path, "wb") as fp:
            fp.write(b"garbage!garbage!")
        self.assertRaises(exception.ConfigurationError, checkpoint.load, self.path)

    def test_truncated(self):
        checkpoint.save(self.path, arrays={"x": np.arange(10.0)})
        with open(self.path, "rb") as fp:
            data = fp.read()
        with open(self.path, "wb") as fp:
            fp.write(data[:-8])
        self.assertRaises(exception.ConfigurationError, checkpoint.load, self.path)

    def test_missing(self):
        self.assertRaises(exception.ConfigurationError, checkpoint.load, self.path)
