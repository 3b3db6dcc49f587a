import math
import unittest

import numpy as np

from crlkit import exception
from crlkit.numcore import AdamState, adam_step, soft_update


class TestAdam(unittest.TestCase):

    def test_zero_grads(self):
        params = [np.array([1.0, -2.0])]
        state = AdamState.zeros_like(params, lr=0.1)
        adam_step(params, [np.zeros(2)], state)
        np.testing.assert_array_equal(np.array([1.0, -2.0]), params[0])
        self.assertEqual(1, state.t)

    def test_hand_computed_scalar_step(self):
        lr, g = 0.0003, 0.37
        params = [np.array([2.0])]
        state = AdamState.zeros_like(params, lr=lr)
        adam_step(params, [np.array([g])], state)
        m_hat = (0.1 * g) / (1 - 0.9)
        v_hat = (0.001 * g * g) / (1 - 0.999)
        expected = 2.0 - lr * m_hat / (math.sqrt(v_hat) + 1e-8)
        self.assertAlmostEqual(expected, params[0][0], places=15)

    def test_two_steps(self):
        params = [np.array([0.0])]
        state = AdamState.zeros_like(params, lr=0.03)
        adam_step(params, [np.array([1.0])], state)
        adam_step(params, [np.array([-0.5])], state)
        m = 0.9 * 0.1 + 0.1 * -0.5
        v = 0.999 * 0.001 + 0.001 * 0.25
        step2 = 0.03 * (m / (1 - 0.81)) / (math.sqrt(v / (1 - 0.999 ** 2)) + 1e-8)
        step1 = 0.03 * 1.0 / (1.0 + 1e-8)
        self.assertAlmostEqual(-step1 - step2, params[0][0], places=12)

    def test_non_finite_gradient(self):
        params = [np.array([1.0])]
        state = AdamState.zeros_like(params, lr=0.1)
        with self.assertRaises(exception.DivergenceError) as ctx:
            adam_step(params, [np.array([np.nan])], state, where="critic")
        self.assertEqual("critic", ctx.exception.where)
        self.assertEqual(1.0, params[0][0])
        self.assertEqual(0, state.t)

    def test_shape_mismatch(self):
        params = [np.zeros(2)]
        state = AdamState.zeros_like(params, lr=0.1)
        self.assertRaises(
            exception.ConfigurationError, adam_step, params, [np.zeros(3)], state,
        )


class TestSoftUpdate(unittest.TestCase):

    def test_tau_one(self):
        target = [np.array([3.0, 4.0])]
        soft_update(target, [np.array([1.0, 2.0])], 1.0)
        np.testing.assert_array_equal(np.array([1.0, 2.0]), target[0])

    def test_tau_zero(self):
        target = [np.array([3.0, 4.0])]
        soft_update(target, [np.array([1.0, 2.0])], 0.0)
        np.testing.assert_array_equal(np.array([3.0, 4.0]), target[0])

    def test_polyak_value(self):
        target = [np.array([0.0])]
        soft_update(target, [np.array([1.0])], 0.005)
        self.assertAlmostEqual(0.005, target[0][0], places=15)

    def test_bad_tau(self):
        self.assertRaises(
            exception.ConfigurationError, soft_update, [np.zeros(1)], [np.zeros(1)], 1.5,
        )
