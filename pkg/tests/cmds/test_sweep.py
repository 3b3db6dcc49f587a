import os
import tempfile
import unittest
from unittest import mock

from click.testing import CliRunner
import pandas as pd

from crlkit import baseline, cli_helper
from crlkit.cmds import sweep  # noqa
from crlkit.main import cli

from .. import fake


class TestSweepCommand(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.config_file = fake.fake_config_file(self.tmp.name)
        self.out = os.path.join(self.tmp.name, "sweep")

    def tearDown(self):
        self.tmp.cleanup()

    @mock.patch("crlkit.log.log.setup_logging")
    def test_sweep(self, mock_logging):
        result = CliRunner().invoke(
            cli, ["sweep", "--out", self.out, "--seed", "2", "--steps", "30", self.config_file],
            catch_exceptions=False,
        )
        assert result.exit_code == 0, result.output
        assert "2 cells x 1 seeds" in result.output
        df = pd.read_csv(os.path.join(self.out, baseline.SWEEP_FILE))
        assert list(df["seed"]) == [2, 2]
        assert list(df["w_in_lava"]) == [0.0, 1.0]

    @mock.patch("crlkit.log.log.setup_logging")
    def test_swept_constraint_not_in_task(self, mock_logging):
        text = fake.FAKE_CONF.replace(
            "[sweep]\nconstraints = in_lava", "[sweep]\nconstraints = below_energy",
        ) + "\n[constraint_below_energy]\nthreshold = 0.01\n"
        config_file = fake.fake_config_file(self.tmp.name, text, name="bad.conf")
        result = CliRunner().invoke(cli, ["sweep", config_file], catch_exceptions=False)
        assert result.exit_code == cli_helper.EXIT_CONFIG_ERROR

    @mock.patch("crlkit.log.log.setup_logging")
    def test_negative_weight(self, mock_logging):
        text = fake.FAKE_CONF.replace("weights = 0, 1", "weights = -1, 1")
        config_file = fake.fake_config_file(self.tmp.name, text, name="bad.conf")
        result = CliRunner().invoke(
            cli, ["sweep", "--out", self.out, config_file], catch_exceptions=False,
        )
        assert result.exit_code == cli_helper.EXIT_CONFIG_ERROR
