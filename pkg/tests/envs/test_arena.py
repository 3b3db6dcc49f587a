import csv
import math
import os
import tempfile
import unittest
from unittest import mock

import numpy as np

from crlkit import exception
from crlkit.envs import (
    ACTION_DIM, DIAGNOSTIC_EVENT, ArenaConfig, DiagnosticArena, DiagnosticConfig,
    MiniArena, make_env,
)
from crlkit.experiment import metrics

from .. import fake


FUZZ_STEPS = 100000 if os.environ.get("CRLKIT_SLOW") == "1" else 10000


class ArenaTestCase(unittest.TestCase):

    def setUp(self):
        self.env = MiniArena(ArenaConfig())
        self.env.reset(seed=fake.FAKE_SEED)

    def place(self, position, velocity=(0.0, 0.0), heading=0.0, energy=1.0, goal=(0.9, 0.9)):
        s = self.env.state
        s.position = np.array(position, dtype=np.float64)
        s.velocity = np.array(velocity, dtype=np.float64)
        s.heading = heading
        s.energy = energy
        s.goal = np.array(goal, dtype=np.float64)


class TestSpecs(ArenaTestCase):

    def test_observation_dim(self):
        spec = self.env.observation_spec()
        self.assertEqual(sum(f.size for f in spec.fields), spec.dim)
        self.assertEqual(27, spec.dim)
        self.assertEqual(spec.dim, self.env.observation().shape[0])
        self.assertEqual((spec.dim,), spec.space().shape)

    def test_action_dim(self):
        self.assertEqual(4, ACTION_DIM)
        space = self.env.action_spec()
        self.assertEqual((4,), space.shape)
        np.testing.assert_array_equal(-np.ones(4), space.low)

    def test_diagnostic_adds_one_rate(self):
        env = DiagnosticArena(ArenaConfig(), DiagnosticConfig())
        self.assertEqual(28, env.obs_dim)
        self.assertIn(DIAGNOSTIC_EVENT, env.indicator_names)

    def test_make_env(self):
        self.assertIsInstance(make_env(ArenaConfig()), MiniArena)
        self.assertIsInstance(make_env(ArenaConfig(), DiagnosticConfig()), DiagnosticArena)

    def test_bad_config(self):
        self.assertRaises(exception.ConfigurationError, ArenaConfig, goal_radius=0.6)
        self.assertRaises(exception.ConfigurationError, ArenaConfig, episode_length=0)
        self.assertRaises(exception.ConfigurationError, ArenaConfig, lava=[(0.5, 0.5, 0.1, 0.1)])


class TestReset(ArenaTestCase):

    def test_same_seed_same_observation(self):
        a = MiniArena().reset(seed=3)
        b = MiniArena().reset(seed=3)
        np.testing.assert_array_equal(a, b)
        self.assertEqual(a.tobytes(), b.tobytes())

    def test_rates_and_time_at_reset(self):
        obs = self.env.reset(seed=4)
        slices = self.env.observation_spec().slices()
        np.testing.assert_array_equal(np.zeros(4), obs[slices["event_rates"]])
        self.assertEqual(1.0, obs[slices["remaining_time"]][0])

    def test_spawn_outside_lava_and_goal(self):
        for seed in range(200):
            self.env.reset(seed=seed)
            s = self.env.state
            self.assertFalse(self.env.in_lava(s.position))
            self.assertFalse(self.env.in_lava(s.goal))
            self.assertGreater(np.linalg.norm(s.goal - s.position), 2 * self.env.config.goal_radius)

    def test_step_before_reset(self):
        self.assertRaises(exception.InvalidArgumentError, MiniArena().step, np.zeros(4))


class TestEvents(ArenaTestCase):

    def test_in_lava(self):
        self.place((0.4, 0.2))
        out = self.env.step(np.zeros(4))
        self.assertEqual(1, out.indicators["in_lava"])
        self.assertEqual(1.0, out.next_observation[self.env.observation_spec().slices()["lava_occupancy"]][4])

    def test_looking_at_marker(self):
        self.place((0.2, 0.5), heading=0.0)
        self.assertEqual(0, self.env.step(np.zeros(4)).indicators["not_looking"])
        self.place((0.2, 0.5), heading=math.pi)
        self.assertEqual(1, self.env.step(np.zeros(4)).indicators["not_looking"])

    def test_above_speed(self):
        self.place((0.2, 0.5), velocity=(0.4, 0.0))
        out = self.env.step(np.zeros(4))
        self.assertAlmostEqual(0.36, self.env.state.velocity[0], places=12)
        self.assertEqual(1, out.indicators["above_speed"])

    def test_energy_uses_updated_velocity(self):
        self.place((0.2, 0.5), energy=0.5)
        self.env.step(np.array([1.0, 0.0, 0.0, -1.0]))
        np.testing.assert_allclose([0.15, 0.0], self.env.state.velocity, atol=1e-15)
        self.assertAlmostEqual(0.5 - 0.6 * 0.15 * 0.1, self.env.state.energy, places=12)

    def test_recharge_stops_and_refills(self):
        self.place((0.2, 0.5), velocity=(0.2, 0.1), energy=0.1)
        out = self.env.step(np.array([1.0, 1.0, 0.0, 1.0]))
        np.testing.assert_array_equal(np.zeros(2), self.env.state.velocity)
        np.testing.assert_array_equal([0.2, 0.5], self.env.state.position)
        self.assertAlmostEqual(0.2, self.env.state.energy, places=12)
        self.assertEqual(0, out.indicators["below_energy"])

    def test_wall_contact(self):
        self.place((0.999, 0.5), velocity=(0.5, 0.0))
        self.env.step(np.array([1.0, 0.0, 0.0, -1.0]))
        self.assertEqual(1.0, self.env.state.position[0])
        self.assertEqual(0.0, self.env.state.velocity[0])

    def test_success_is_terminal(self):
        self.place((0.5, 0.2), goal=(0.52, 0.2))
        out = self.env.step(np.zeros(4))
        self.assertEqual(1, out.indicators["success"])
        self.assertTrue(out.done)
        self.assertFalse(out.truncated)
        self.assertGreaterEqual(out.reward, 1.0)

    def test_time_limit_truncates(self):
        env = MiniArena(ArenaConfig(episode_length=3))
        env.reset(seed=0)
        env.state.goal = np.array([2.0, 2.0])
        outs = [env.step(np.array([0.0, 0.0, 0.0, 1.0])) for _ in range(3)]
        self.assertFalse(outs[1].episode_over)
        self.assertTrue(outs[2].truncated)
        self.assertFalse(outs[2].done)

    def test_episode_rates_in_observation(self):
        self.place((0.4, 0.2))
        self.env.step(np.zeros(4))
        self.place((0.2, 0.5))
        out = self.env.step(np.zeros(4))
        rates = out.next_observation[self.env.observation_spec().slices()["event_rates"]]
        self.assertEqual(0.5, rates[0])


class TestShaping(ArenaTestCase):

    def test_reward_matches_distance_recount(self):
        rng = fake.fake_rng()
        env = MiniArena(ArenaConfig())
        env.reset(seed=1)
        for _ in range(1000):
            before = math.hypot(*(env.state.goal - env.state.position))
            out = env.step(rng.uniform(-1.0, 1.0, size=4))
            after = math.hypot(*(env.state.goal - env.state.position))
            shaping = out.reward - (1.0 if out.done else 0.0)
            self.assertAlmostEqual(0.3 * (before - after), shaping, places=12)
            if abs(before - after) > 1e-12:
                self.assertEqual(np.sign(before - after), np.sign(shaping))
            if out.episode_over:
                env.reset(seed=int(rng.integers(1 << 30)))

    def test_shaping_bounded_per_episode(self):
        # The shaping telescopes to c * (d_0 - d_T) <= c * sqrt(2).
        self.assertLess(0.3 * math.sqrt(2.0), 0.5)


class TestFuzz(ArenaTestCase):

    def test_observations_in_range(self):
        rng = fake.fake_rng()
        env = MiniArena(ArenaConfig())
        obs = env.reset(seed=0)
        space = env.observation_spec().space()
        for _ in range(FUZZ_STEPS):
            self.assertTrue(np.all(np.isfinite(obs)))
            self.assertTrue(np.all(obs >= space.low - 1e-12))
            self.assertTrue(np.all(obs <= space.high + 1e-12))
            out = env.step(rng.uniform(-1.0, 1.0, size=4))
            obs = out.next_observation
            if out.episode_over:
                obs = env.reset(seed=int(rng.integers(1 << 30)))


class TestActions(ArenaTestCase):

    def test_clip_warns_once(self):
        with mock.patch("crlkit.envs.arena.LOG") as log:
            self.env.step(np.array([2.0, 0.0, 0.0, -1.0]))
            self.env.step(np.array([-3.0, 0.0, 0.0, -1.0]))
        self.assertEqual(1, log.warning.call_count)

    def test_non_finite(self):
        self.assertRaises(
            exception.InvalidArgumentError, self.env.step, np.array([np.nan, 0, 0, 0]),
        )

    def test_wrong_size(self):
        self.assertRaises(exception.ConfigurationError, self.env.step, np.zeros(3))


class TestPolicies(unittest.TestCase):

    def test_always_recharge(self):
        env = MiniArena(ArenaConfig())
        task = fake.fake_task(names=("below_energy",))
        out = metrics.rollout(
            lambda obs: np.array([0.0, 0.0, 0.0, 1.0]), env, task, 10, list(range(10)),
        )
        self.assertEqual(0.0, out.rates[0])
        self.assertEqual(0.0, out.rates[1])
        self.assertFalse(any(out.successes))

    def test_trajectory_dump(self):
        env = MiniArena(ArenaConfig(episode_length=5))
        env.record_trajectory()
        env.reset(seed=0)
        env.state.goal = np.array([2.0, 2.0])
        for _ in range(5):
            env.step(np.array([0.1, 0.1, 0.0, -1.0]))
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "trajectory.csv")
            self.assertEqual(5, env.dump_trajectory(path))
            with open(path) as fp:
                rows = list(csv.DictReader(fp))
        self.assertEqual(5, len(rows))
        self.assertEqual("5", rows[-1]["step"])


class TestDiagnosticArena(unittest.TestCase):

    def test_phases(self):
        env = DiagnosticArena(ArenaConfig(), DiagnosticConfig(switch_step=3))
        env.reset(seed=0)
        for _ in range(3):
            self.assertTrue(env.impossible_phase)
            out = env.step(np.array([0.0, 0.0, 0.0, -1.0]))
            self.assertEqual(1, out.indicators[DIAGNOSTIC_EVENT])
        self.assertFalse(env.impossible_phase)
        self.assertEqual(0, env.step(np.array([0.0, 0.0, 0.0, -1.0])).indicators[DIAGNOSTIC_EVENT])
        self.assertEqual(1, env.step(np.array([0.0, 0.0, 0.0, 1.0])).indicators[DIAGNOSTIC_EVENT])

    def test_phase_survives_reset(self):
        env = DiagnosticArena(ArenaConfig(), DiagnosticConfig(switch_step=2))
        env.reset(seed=0)
        env.step(np.zeros(4))
        env.step(np.zeros(4))
        env.reset(seed=1)
        self.assertFalse(env.impossible_phase)

    def test_set_global_step(self):
        env = DiagnosticArena(ArenaConfig(), DiagnosticConfig(switch_step=10))
        env.set_global_step(10)
        self.assertFalse(env.impossible_phase)
