import unittest

import numpy as np

from crlkit import exception
from crlkit.numcore import DenseNet


def naive_forward(net, x):
    a = list(x)
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        h = []
        for r in range(w.shape[0]):
            total = b[r]
            for c in range(w.shape[1]):
                total += w[r, c] * a[c]
            h.append(total)
        if i < net.n_layers - 1:
            a = [np.tanh(v) if net.activation == "tanh" else max(v, 0.0) for v in h]
        else:
            a = h
    return np.array(a)


def pre_activations(net, x):
    """Hidden pre-activations of a net without layer norm."""
    a = np.asarray(x, dtype=np.float64)
    out = []
    for w, b in zip(net.weights[:-1], net.biases[:-1]):
        z = w @ a + b
        out.append(z)
        a = np.maximum(z, 0.0)
    return np.concatenate(out)


def loss(net, x, g):
    return float(np.sum(net.forward(x) * g))


class TestDenseNet(unittest.TestCase):

    def setUp(self):
        self.rng = np.random.default_rng(7)

    def test_param_count(self):
        net = DenseNet.create([5, 8, 3], self.rng)
        self.assertEqual(5 * 8 + 8 + 8 * 3 + 3, net.n_params)
        self.assertEqual(4, len(net.params()))

    def test_zero_net(self):
        net = DenseNet(
            [3, 4, 2],
            [np.zeros((4, 3)), np.zeros((2, 4))],
            [np.zeros(4), np.zeros(2)],
        )
        np.testing.assert_array_equal(np.zeros(2), net.forward(np.array([1.0, -2.0, 3.0])))

    def test_identity_layer(self):
        net = DenseNet([3, 3], [np.eye(3)], [np.zeros(3)])
        x = np.array([0.25, -1.5, 4.0])
        np.testing.assert_array_equal(x, net.forward(x))

    def test_matches_naive_oracle(self):
        for activation in ("tanh", "relu"):
            net = DenseNet.create([4, 6, 2], self.rng, activation=activation)
            for b in net.biases:
                b[:] = self.rng.normal(size=b.shape)
            x = self.rng.normal(size=4)
            np.testing.assert_allclose(naive_forward(net, x), net.forward(x), atol=1e-12)

    def test_batch_rows_match_single(self):
        net = DenseNet.create([4, 6, 2], self.rng)
        xs = self.rng.normal(size=(5, 4))
        batch = net.forward(xs)
        for i in range(5):
            np.testing.assert_allclose(net.forward(xs[i]), batch[i], atol=1e-14)

    def test_wrong_input_size(self):
        net = DenseNet.create([4, 2], self.rng)
        self.assertRaises(exception.ConfigurationError, net.forward, np.zeros(3))

    def test_layer_norm_statistics(self):
        net = DenseNet.create([4, 16, 2], self.rng, layer_norm_first=True)
        _, cache = net.forward_cached(self.rng.normal(size=(3, 4)))
        xhat, _ = cache["ln"]
        np.testing.assert_allclose(np.zeros(3), xhat.mean(axis=-1), atol=1e-12)
        np.testing.assert_allclose(np.ones(3), xhat.var(axis=-1), atol=1e-4)

    def test_linear_backward_closed_form(self):
        w = self.rng.normal(size=(2, 3))
        b = self.rng.normal(size=2)
        net = DenseNet([3, 2], [w], [b])
        x = self.rng.normal(size=3)
        g = np.array([0.5, -2.0])
        grads, input_grad = net.backward(x, g)
        np.testing.assert_allclose(np.outer(g, x), grads[0])
        np.testing.assert_allclose(g, grads[1])
        np.testing.assert_allclose(w.T @ g, input_grad)

    def test_finite_differences(self):
        h = 1e-4
        for activation, layer_norm in (("tanh", False), ("tanh", True), ("relu", False)):
            draws, seed = 0, 0
            while draws < 100:
                rng = np.random.default_rng(seed)
                seed += 1
                net = DenseNet.create([3, 5, 4, 2], rng, activation, layer_norm)
                for b in net.biases:
                    b[:] = rng.normal(scale=0.3, size=b.shape)
                x = rng.normal(size=3)
                g = rng.normal(size=2)
                # a relu kink inside the step makes the difference quotient meaningless
                if activation == "relu" and np.min(np.abs(pre_activations(net, x))) < 1e-2:
                    continue
                draws += 1
                self.check_gradients(net, x, g, h, f"{activation} layer_norm={layer_norm} seed {seed - 1}")

    def check_gradients(self, net, x, g, h, what):
        grads, input_grad = net.backward(x, g)
        for p, dp in zip(net.params(), grads):
            numeric = np.zeros_like(p)
            for idx in np.ndindex(p.shape):
                saved = p[idx]
                p[idx] = saved + h
                up = loss(net, x, g)
                p[idx] = saved - h
                down = loss(net, x, g)
                p[idx] = saved
                numeric[idx] = (up - down) / (2 * h)
            err = np.linalg.norm(numeric - dp) / max(np.linalg.norm(numeric), 1e-12)
            self.assertLess(err, 1e-4, what)
        numeric = np.zeros(3)
        for i in range(3):
            e = np.zeros(3)
            e[i] = h
            numeric[i] = (loss(net, x + e, g) - loss(net, x - e, g)) / (2 * h)
        err = np.linalg.norm(numeric - input_grad) / max(np.linalg.norm(numeric), 1e-12)
        self.assertLess(err, 1e-4, what)

    def test_relu_subgradient_at_zero(self):
        # Pre-activation exactly 0 for both hidden units.
        net = DenseNet(
            [1, 2, 1],
            [np.zeros((2, 1)), np.ones((1, 2))],
            [np.zeros(2), np.zeros(1)],
            activation="relu",
        )
        grads, _ = net.backward(np.array([1.0]), np.array([1.0]))
        np.testing.assert_array_equal(np.zeros((2, 1)), grads[0])
        np.testing.assert_array_equal(np.zeros(2), grads[1])

    def test_copy_is_independent(self):
        net = DenseNet.create([2, 3, 1], self.rng)
        other = net.copy()
        other.weights[0] += 1.0
        self.assertFalse(np.array_equal(net.weights[0], other.weights[0]))
