import os
import tempfile
import unittest
from unittest import mock

from click.testing import CliRunner
import pandas as pd

from crlkit import cli_helper
from crlkit.cmds import diagnose  # noqa
from crlkit.experiment import runner
from crlkit.main import cli

from .. import fake


DIAGNOSTIC_CONF = fake.FAKE_CONF.replace(
    "constraints = in_lava\nsuccess_constraint", "constraints = diagnostic\nsuccess_constraint",
).replace("[constraint_in_lava]", "[constraint_diagnostic]").replace(
    "[sweep]\nconstraints = in_lava", "[sweep]\nconstraints = diagnostic",
) + """
[diagnostic]
enabled = true
switch_step = 40
"""


class TestDiagnoseCommand(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.out = os.path.join(self.tmp.name, "diag")

    def tearDown(self):
        self.tmp.cleanup()

    @mock.patch("crlkit.log.log.setup_logging")
    def test_diagnose(self, mock_logging):
        config_file = fake.fake_config_file(self.tmp.name, DIAGNOSTIC_CONF)
        result = CliRunner().invoke(
            cli, ["diagnose", "--out", self.out, config_file], catch_exceptions=False,
        )
        assert result.exit_code == 0, result.output
        df = pd.read_csv(os.path.join(self.out, runner.COMPARISON_FILE))
        assert sorted(df["mode"].unique()) == ["normalized", "unnormalized"]
        assert "normalized" in result.output

    @mock.patch("crlkit.log.log.setup_logging")
    def test_needs_diagnostic_section(self, mock_logging):
        config_file = fake.fake_config_file(self.tmp.name)
        result = CliRunner().invoke(
            cli, ["diagnose", "--out", self.out, config_file], catch_exceptions=False,
        )
        assert result.exit_code == cli_helper.EXIT_CONFIG_ERROR
