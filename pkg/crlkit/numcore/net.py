import copy
import logging
from typing import List, Optional

import numpy as np

from crlkit import exception


LOG = logging.getLogger("CRLKIT")

ACTIVATIONS = ("tanh", "relu")
LAYER_NORM_EPS = 1e-5


class DenseNet:
    """Feed-forward network with explicit parameters and analytic gradients.

    Weights are stored as (n_out, n_in) so a layer computes ``x @ W.T + b``
    on a batch of row vectors. Hidden layers use one of ``ACTIVATIONS``,
    the output layer is linear. With ``layer_norm_first`` the first hidden
    pre-activations are normalized per sample (no learned gain or bias)
    before the activation.
    """

    def __init__(
        self,
        layer_sizes: List[int],
        weights: List[np.ndarray],
        biases: List[np.ndarray],
        activation: str = "tanh",
        layer_norm_first: bool = False,
    ):
        if activation not in ACTIVATIONS:
            raise exception.ConfigurationError(
                f"Unknown activation '{activation}', pick one of {ACTIVATIONS}",
            )
        if len(layer_sizes) < 2 or any(int(n) < 1 for n in layer_sizes):
            raise exception.ConfigurationError(
                f"layer_sizes must hold at least two positive sizes, got {layer_sizes}",
            )
        self.layer_sizes = [int(n) for n in layer_sizes]
        self.activation = activation
        self.layer_norm_first = bool(layer_norm_first)
        self.weights = [np.asarray(w, dtype=np.float64) for w in weights]
        self.biases = [np.asarray(b, dtype=np.float64) for b in biases]
        for i, (n_in, n_out) in enumerate(zip(self.layer_sizes[:-1], self.layer_sizes[1:])):
            if self.weights[i].shape != (n_out, n_in) or self.biases[i].shape != (n_out,):
                raise exception.ConfigurationError(
                    f"Layer {i} parameters have shapes {self.weights[i].shape} / "
                    f"{self.biases[i].shape}, expected {(n_out, n_in)} / {(n_out,)}",
                )

    @classmethod
    def create(
        cls,
        layer_sizes: List[int],
        rng: np.random.Generator,
        activation: str = "tanh",
        layer_norm_first: bool = False,
    ) -> "DenseNet":
        """Weights uniform in +-1/sqrt(fan_in), biases zero."""
        weights, biases = [], []
        for n_in, n_out in zip(layer_sizes[:-1], layer_sizes[1:]):
            bound = 1.0 / np.sqrt(n_in)
            weights.append(rng.uniform(-bound, bound, size=(n_out, n_in)))
            biases.append(np.zeros(n_out))
        return cls(layer_sizes, weights, biases, activation, layer_norm_first)

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    @property
    def n_params(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def params(self) -> List[np.ndarray]:
        """Parameter arrays in W0, b0, W1, b1, ... order (live references)."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out.append(w)
            out.append(b)
        return out

    def copy(self) -> "DenseNet":
        return copy.deepcopy(self)

    def _check_input(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim not in (1, 2) or x.shape[-1] != self.layer_sizes[0]:
            raise exception.ConfigurationError(
                f"Input of shape {x.shape} doesn't fit a net expecting "
                f"{self.layer_sizes[0]} features",
            )
        return x

    def _activate(self, h):
        if self.activation == "tanh":
            return np.tanh(h)
        return np.maximum(h, 0.0)

    def forward(self, x: np.ndarray) -> np.ndarray:
        out, _ = self.forward_cached(x)
        return out

    def forward_cached(self, x: np.ndarray):
        """Forward pass that also returns what backward() needs."""
        x = self._check_input(x)
        single = x.ndim == 1
        a = x[None, :] if single else x
        cache = {"inputs": [], "hidden": [], "ln": None}
        last = self.n_layers - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            cache["inputs"].append(a)
            h = a @ w.T + b
            if i == last:
                a = h
                break
            if i == 0 and self.layer_norm_first:
                mu = h.mean(axis=-1, keepdims=True)
                std = np.sqrt(h.var(axis=-1, keepdims=True) + LAYER_NORM_EPS)
                h = (h - mu) / std
                cache["ln"] = (h, std)
            if self.activation == "relu":
                cache["hidden"].append(h)
            a = self._activate(h)
            if self.activation == "tanh":
                cache["hidden"].append(a)
        out = a[0] if single else a
        return out, cache

    def backward(
        self,
        x: np.ndarray,
        upstream_grad: np.ndarray,
        cache: Optional[dict] = None,
    ):
        """Gradients of L = <upstream_grad, forward(x)>.

        Returns ``(param_grads, input_grad)`` where ``param_grads`` follows the
        order of :meth:`params`. For a batch the parameter gradients are
        summed over the rows.
        """
        x = self._check_input(x)
        if cache is None:
            _, cache = self.forward_cached(x)
        single = x.ndim == 1
        g = np.asarray(upstream_grad, dtype=np.float64)
        if single:
            g = g[None, :]
        expected = (cache["inputs"][0].shape[0], self.layer_sizes[-1])
        if g.shape != expected:
            raise exception.ConfigurationError(
                f"Upstream gradient of shape {np.shape(upstream_grad)} doesn't "
                f"match the output shape {expected}",
            )

        grads: List[np.ndarray] = [None] * (2 * self.n_layers)
        for i in reversed(range(self.n_layers)):
            if i < self.n_layers - 1:
                hidden = cache["hidden"][i]
                if self.activation == "tanh":
                    g = g * (1.0 - hidden * hidden)
                else:
                    # subgradient 0 at exactly 0
                    g = g * (hidden > 0.0)
                if i == 0 and self.layer_norm_first:
                    xhat, std = cache["ln"]
                    g = (
                        g
                        - g.mean(axis=-1, keepdims=True)
                        - xhat * (g * xhat).mean(axis=-1, keepdims=True)
                    ) / std
            a_in = cache["inputs"][i]
            grads[2 * i] = g.T @ a_in
            grads[2 * i + 1] = g.sum(axis=0)
            g = g @ self.weights[i]
        input_grad = g[0] if single else g
        return grads, input_grad

    def __repr__(self):
        return (
            f"DenseNet(sizes={self.layer_sizes}, activation={self.activation}, "
            f"layer_norm_first={self.layer_norm_first})"
        )
