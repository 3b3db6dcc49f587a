import unittest

import numpy as np

from crlkit.numcore import gaussian


class TestSquashedGaussian(unittest.TestCase):

    def test_mode_of_standard_case(self):
        head = gaussian.GaussianHead.from_raw(np.zeros(3), np.array([0.0, -1.0, 0.5]))
        sample = gaussian.sample_squashed(head, np.zeros(3))
        np.testing.assert_array_equal(np.zeros(3), sample.action)
        expected = np.sum(-head.log_std - 0.5 * np.log(2 * np.pi)) - 3 * np.log(1 + 1e-6)
        self.assertAlmostEqual(expected, float(sample.log_prob), places=12)

    def test_greedy_is_tanh_mean(self):
        head = gaussian.GaussianHead.from_raw(np.array([0.3, -2.0]), np.zeros(2))
        np.testing.assert_allclose(np.tanh([0.3, -2.0]), gaussian.greedy_action(head))

    def test_density_integrates_to_one(self):
        head = gaussian.GaussianHead.from_raw(np.array([0.4]), np.array([-0.3]))
        # Integrate in pre-tanh space to keep the grid dense where mass is.
        u = np.linspace(-12.0, 12.0, 400001)
        a = np.tanh(u)
        inside = np.abs(a) < 1.0
        logp = gaussian.squashed_log_density(head, a[inside, None])
        density_u = np.exp(logp) * (1.0 - a[inside] ** 2)
        trapezoid = getattr(np, "trapezoid", None) or np.trapz
        total = trapezoid(density_u, u[inside])
        self.assertLess(abs(total - 1.0), 1e-3)

    def test_sample_matches_density(self):
        rng = np.random.default_rng(3)
        head = gaussian.GaussianHead.from_raw(np.array([0.2, -0.1]), np.array([-0.5, 0.1]))
        sample = gaussian.sample_squashed(head, rng.normal(size=2))
        self.assertAlmostEqual(
            float(sample.log_prob),
            float(gaussian.squashed_log_density(head, sample.action)),
            places=8,
        )

    def test_log_std_clamp_masks_gradient(self):
        head = gaussian.GaussianHead.from_raw(np.zeros(2), np.array([5.0, 0.0]))
        self.assertEqual(2.0, head.log_std[0])
        sample = gaussian.sample_squashed(head, np.array([0.1, 0.1]))
        _, dlogp_dlogstd, _, da_dlogstd = gaussian.sample_grads(head, sample)
        self.assertEqual(0.0, dlogp_dlogstd[0])
        self.assertEqual(0.0, da_dlogstd[0])
        self.assertNotEqual(0.0, dlogp_dlogstd[1])

    def test_sample_grads_finite_differences(self):
        h = 1e-6
        for seed in range(100):
            rng = np.random.default_rng(seed)
            # |u| stays below 4.5, away from float saturation of tanh
            mean = rng.uniform(-1.0, 1.0, size=3)
            log_std = rng.uniform(-1.5, 0.5, size=3)
            noise = rng.uniform(-2.0, 2.0, size=3)

            def run(m, s):
                out = gaussian.sample_squashed(gaussian.GaussianHead.from_raw(m, s), noise)
                return float(np.sum(out.log_prob)), out.action

            head = gaussian.GaussianHead.from_raw(mean, log_std)
            analytic = gaussian.sample_grads(head, gaussian.sample_squashed(head, noise))
            lp_m, lp_s, a_m, a_s = (np.zeros(3) for _ in range(4))
            for i in range(3):
                e = np.zeros(3)
                e[i] = h
                (lp_up, a_up), (lp_down, a_down) = run(mean + e, log_std), run(mean - e, log_std)
                lp_m[i] = (lp_up - lp_down) / (2 * h)
                a_m[i] = (a_up[i] - a_down[i]) / (2 * h)
                (lp_up, a_up), (lp_down, a_down) = run(mean, log_std + e), run(mean, log_std - e)
                lp_s[i] = (lp_up - lp_down) / (2 * h)
                a_s[i] = (a_up[i] - a_down[i]) / (2 * h)
            for numeric, grad in zip((lp_m, lp_s, a_m, a_s), analytic):
                err = np.linalg.norm(numeric - grad) / max(np.linalg.norm(numeric), 1e-12)
                self.assertLess(err, 1e-4, f"seed {seed}")
