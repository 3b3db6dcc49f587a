import os
import tempfile
import unittest
from unittest import mock

from click.testing import CliRunner

from crlkit import cli_helper
from crlkit.cmds import evaluate, train  # noqa
from crlkit.experiment import runner
from crlkit.main import cli

from .. import fake


class TestEvalCommand(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.config_file = fake.fake_config_file(self.tmp.name)
        self.out = os.path.join(self.tmp.name, "out")

    def tearDown(self):
        self.tmp.cleanup()

    @mock.patch("crlkit.log.log.setup_logging")
    def test_eval_checkpoint(self, mock_logging):
        cli_runner = CliRunner()
        result = cli_runner.invoke(
            cli, ["train", "--out", self.out, self.config_file], catch_exceptions=False,
        )
        assert result.exit_code == 0, result.output
        checkpoint = os.path.join(self.out, "seed_0", runner.CHECKPOINT_FILE)
        for name in ("eval", "evaluate"):
            result = cli_runner.invoke(
                cli, [name, "--episodes", "2", checkpoint, self.config_file],
                catch_exceptions=False,
            )
            assert result.exit_code == 0, result.output
            assert "2 greedy episodes" in result.output

    @mock.patch("crlkit.log.log.setup_logging")
    def test_missing_checkpoint(self, mock_logging):
        result = CliRunner().invoke(
            cli, ["eval", os.path.join(self.tmp.name, "none.bin"), self.config_file],
            catch_exceptions=False,
        )
        assert result.exit_code == cli_helper.EXIT_CONFIG_ERROR
