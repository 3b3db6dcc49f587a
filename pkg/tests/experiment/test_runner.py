import os
import tempfile
import unittest
from unittest import mock

import numpy as np
import pandas as pd

from crlkit import cmdp, exception, multipliers
from crlkit.experiment import metrics, runner
from crlkit.multipliers import MultiplierConfig
from crlkit.numcore import checkpoint
from crlkit.utils import json as crl_json

from .. import fake


class RunnerTestCase(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.root = self.tmp.name

    def tearDown(self):
        self.tmp.cleanup()

    def path(self, *parts):
        return os.path.join(self.root, *parts)


class TestRunTraining(RunnerTestCase):

    def test_writes_run_directory(self):
        config = fake.fake_experiment()
        result = runner.run_training(config, run_dir=self.path("run"))
        self.assertEqual([60, 120], [r.step for r in result.reports])
        for name in (metrics.METRICS_FILE, metrics.MULTIPLIERS_FILE,
                     runner.CONFIG_FILE, runner.CHECKPOINT_FILE):
            self.assertTrue(os.path.exists(self.path("run", name)), name)
        df = pd.read_csv(self.path("run", metrics.METRICS_FILE))
        self.assertEqual(metrics.metric_columns(config.task), list(df.columns))
        self.assertEqual(2, len(df))
        saved = crl_json.load(self.path("run", runner.CONFIG_FILE))
        self.assertEqual(fake.FAKE_SEED, saved["seeds"][0])

    def test_identical_seed_identical_bytes(self):
        config = fake.fake_experiment()
        runner.run_training(config, run_dir=self.path("a"))
        runner.run_training(config, run_dir=self.path("b"))
        for name in (metrics.METRICS_FILE, metrics.MULTIPLIERS_FILE):
            with open(self.path("a", name), "rb") as fp:
                a = fp.read()
            with open(self.path("b", name), "rb") as fp:
                b = fp.read()
            self.assertEqual(a, b)

    def test_multiplier_log_rows(self):
        config = fake.fake_experiment()
        result = runner.run_training(config, run_dir=self.path("run"))
        df = pd.read_csv(self.path("run", metrics.MULTIPLIERS_FILE))
        self.assertEqual(len(result.multiplier_trace), len(df))
        self.assertEqual([20, 40, 60, 80, 100, 120], list(df["step"]))
        lam = df[["lambda_0", "lambda_in_lava", "lambda_success"]].to_numpy()
        np.testing.assert_allclose(np.ones(len(df)), lam.sum(axis=1), atol=1e-12)

    def test_divergence_postmortem(self):
        config = fake.fake_experiment(
            multipliers=MultiplierConfig(learning_rate=float("inf")),
        )
        with self.assertRaises(exception.DivergenceError) as ctx:
            runner.run_training(config, run_dir=self.path("run"))
        self.assertEqual("multipliers", ctx.exception.where)
        post = crl_json.load(self.path("run", runner.DIVERGENCE_FILE))
        self.assertEqual(20, post["step"])
        self.assertEqual("multipliers", post["where"])
        self.assertEqual([], post["rows"])
        self.assertIsInstance(post["log"], list)

    def test_divergence_as_outcome(self):
        config = fake.fake_experiment(
            multipliers=MultiplierConfig(learning_rate=float("inf")),
        )
        result = runner.run_training(config, run_dir=None, raise_on_divergence=False)
        self.assertTrue(result.diverged)
        self.assertIsNone(result.final)

    def test_reward_wrapper(self):
        config = fake.fake_experiment()
        calls = []

        def reward_fn(r, indicators):
            calls.append(indicators)
            return r - 1.0

        task = config.task.without_constraints()
        result = runner.run_training(config, task=task, eval_task=config.task, reward_fn=reward_fn)
        self.assertEqual(120, len(calls))
        self.assertEqual(2, len(result.final.rates))
        self.assertTrue(np.all(np.isnan(result.final.lambdas)))


class TestResume(RunnerTestCase):

    def test_carries_on_the_run_directory(self):
        short = fake.fake_experiment(total_steps=60)
        runner.run_training(short, run_dir=self.path("run"))
        config = fake.fake_experiment()
        result = runner.run_training(
            config, run_dir=self.path("run"), resume=self.path("run", runner.CHECKPOINT_FILE),
        )
        self.assertEqual([120], [r.step for r in result.reports])
        df = pd.read_csv(self.path("run", metrics.METRICS_FILE))
        self.assertEqual([60, 120], list(df["step"]))
        df = pd.read_csv(self.path("run", metrics.MULTIPLIERS_FILE))
        self.assertEqual([20, 40, 60], list(df["step"])[:3])
        self.assertTrue(np.all(np.diff(df["step"]) > 0))
        _, arrays = checkpoint.load(self.path("run", runner.CHECKPOINT_FILE))
        self.assertEqual(120, int(arrays["step"][0]))

    def test_finished_checkpoint(self):
        config = fake.fake_experiment()
        runner.run_training(config, run_dir=self.path("run"))
        self.assertRaises(
            exception.ConfigurationError, runner.run_training, config,
            run_dir=self.path("again"), resume=self.path("run", runner.CHECKPOINT_FILE),
        )

    def test_checkpoint_every_evaluation(self):
        config = fake.fake_experiment()
        steps = []

        def save(loop, path):
            steps.append(loop.step)

        with mock.patch.object(runner.TrainingLoop, "save", autospec=True, side_effect=save):
            runner.run_training(config, run_dir=self.path("run"))
        self.assertEqual([60, 120], steps)

    def test_resume_needs_one_seed(self):
        config = fake.fake_experiment(seeds=[0, 1])
        self.assertRaises(
            exception.ConfigurationError, runner.train_all, config,
            root=self.root, resume=self.path("checkpoint.bin"),
        )


class TestEvaluate(RunnerTestCase):

    def test_checkpoint_evaluation(self):
        config = fake.fake_experiment()
        runner.run_training(config, run_dir=self.path("run"))
        report = runner.evaluate(self.path("run", runner.CHECKPOINT_FILE), config, n_episodes=3)
        self.assertEqual(3, report.episodes)
        self.assertEqual(2, len(report.rates))
        self.assertAlmostEqual(1.0, report.lambda_0 + np.sum(report.lambdas), places=12)

    def test_checkpoint_task_mismatch(self):
        config = fake.fake_experiment()
        runner.run_training(config, run_dir=self.path("run"))
        other = fake.fake_experiment(task=fake.fake_task(names=("in_lava", "not_looking")))
        self.assertRaises(
            exception.ConfigurationError,
            runner.evaluate, self.path("run", runner.CHECKPOINT_FILE), other,
        )

    def test_rates_match_offline_recount(self):
        config = fake.fake_experiment()
        def policy(obs):
            return np.array([0.5, -0.2, 0.3, -1.0])

        seen = []
        real_rollout = metrics.rollout

        def spy(policy, env, task, n, seeds, **kwargs):
            real_step = env.step

            def step(action):
                out = real_step(action)
                seen.append(task.indicator_vector(out.indicators))
                return out

            env.step = step
            return real_rollout(policy, env, task, n, seeds, **kwargs)

        with mock.patch("crlkit.experiment.runner.rollout", side_effect=spy):
            report = runner.evaluate_policy(policy, config, config.task, 3, seed=5)
        k = config.task.k
        np.testing.assert_allclose(np.mean(seen, axis=0)[:k], report.rates[:k], atol=1e-12)
        self.assertEqual(report.success_rate, report.rates[k])

    def test_eval_seeds_stable(self):
        self.assertEqual(runner.eval_seeds(3, 4), runner.eval_seeds(3, 4))
        self.assertNotEqual(runner.eval_seeds(3, 4), runner.eval_seeds(4, 4))


class TestTrainAll(RunnerTestCase):

    def test_seeds_and_summary(self):
        config = fake.fake_experiment(seeds=[1, 2], workers=2)
        summary = runner.train_all(config, root=self.path("exp"))
        self.assertEqual([1, 2], sorted(summary.results))
        self.assertFalse(summary.diverged)
        for seed in (1, 2):
            self.assertTrue(os.path.exists(self.path("exp", f"seed_{seed}", metrics.METRICS_FILE)))
        df = pd.read_csv(self.path("exp", runner.SUMMARY_FILE))
        self.assertEqual([60, 120], list(df["step"]))
        self.assertEqual([2, 2], list(df["n_seeds"]))
        self.assertIn("return_stderr", df.columns)

    def test_workers_dont_change_results(self):
        one = runner.train_all(fake.fake_experiment(seeds=[1, 2]), root=self.path("one"))
        two = runner.train_all(fake.fake_experiment(seeds=[1, 2], workers=2), root=self.path("two"))
        for seed in (1, 2):
            with open(self.path("one", f"seed_{seed}", metrics.METRICS_FILE), "rb") as fp:
                a = fp.read()
            with open(self.path("two", f"seed_{seed}", metrics.METRICS_FILE), "rb") as fp:
                b = fp.read()
            self.assertEqual(a, b)
        self.assertEqual(sorted(one.results), sorted(two.results))

    def test_divergence_reported(self):
        config = fake.fake_experiment(
            multipliers=MultiplierConfig(learning_rate=float("inf")),
        )
        summary = runner.train_all(config, root=self.path("exp"))
        self.assertTrue(summary.diverged)
        self.assertEqual({}, summary.results)


class TestDiagnostic(RunnerTestCase):

    def diagnostic_config(self):
        task = cmdp.TaskSpec(
            constraints=[fake.fake_constraint("diagnostic", 0.01)],
            success=fake.fake_success(),
        )
        return fake.fake_experiment(task=task, diagnostic=True, total_steps=160, eval_period=40)

    def test_paired_runs(self):
        result = runner.run_diagnostic(self.diagnostic_config(), root=self.path("diag"))
        self.assertEqual({multipliers.NORMALIZED, multipliers.UNNORMALIZED}, set(result.runs))
        df = pd.read_csv(self.path("diag", runner.COMPARISON_FILE))
        self.assertEqual(8, len(df))
        normalized = df[df["mode"] == multipliers.NORMALIZED]
        self.assertTrue(np.all(normalized["max_lambda"] <= 1.0))
        for mode in multipliers.MODES:
            self.assertTrue(os.path.exists(self.path("diag", mode, metrics.METRICS_FILE)))

    def test_impossible_phase_pushes_unnormalized_up(self):
        result = runner.run_diagnostic(self.diagnostic_config(), root=self.path("diag"))
        trace = result.runs[multipliers.UNNORMALIZED].multiplier_trace
        phase_one = [t.lambdas[0] for t in trace if t.step <= 100]
        self.assertTrue(np.all(np.diff(phase_one) >= 0.0))
        self.assertTrue(all(t.rates[0] == 1.0 for t in trace if t.step <= 100))

    def test_needs_diagnostic_env(self):
        self.assertRaises(
            exception.ConfigurationError, runner.run_diagnostic, fake.fake_experiment(),
        )
