from dataclasses import dataclass, field
import logging
from typing import List, Sequence

import numpy as np

from crlkit import exception


LOG = logging.getLogger("CRLKIT")


@dataclass
class AdamState:
    """Moment accumulators shaped like the parameters they drive."""
    lr: float
    m: List[np.ndarray] = field(default_factory=list)
    v: List[np.ndarray] = field(default_factory=list)
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def zeros_like(cls, params: Sequence[np.ndarray], lr: float, **kwargs) -> "AdamState":
        return cls(
            lr=lr,
            m=[np.zeros_like(p, dtype=np.float64) for p in params],
            v=[np.zeros_like(p, dtype=np.float64) for p in params],
            **kwargs,
        )

    def reset(self):
        for m, v in zip(self.m, self.v):
            m.fill(0.0)
            v.fill(0.0)
        self.t = 0


def _check_shapes(a, b, what):
    if len(a) != len(b):
        raise exception.ConfigurationError(
            f"{what}: {len(a)} arrays vs {len(b)} arrays",
        )
    for x, y in zip(a, b):
        if np.shape(x) != np.shape(y):
            raise exception.ConfigurationError(
                f"{what}: shape {np.shape(x)} vs {np.shape(y)}",
            )


def adam_step(
    params: Sequence[np.ndarray],
    grads: Sequence[np.ndarray],
    state: AdamState,
    where: str = "adam",
):
    """One bias-corrected Adam descent step, in place.

    Raises DivergenceError on a non-finite gradient before anything is
    touched, so the parameters stay at their last finite value.
    """
    _check_shapes(params, grads, f"{where} params/grads")
    _check_shapes(params, state.m, f"{where} params/state")
    for g in grads:
        if not np.all(np.isfinite(g)):
            raise exception.DivergenceError(
                f"Non-finite gradient in {where} at Adam step {state.t + 1}",
                where=where,
            )

    state.t += 1
    b1, b2 = state.beta1, state.beta2
    c1 = 1.0 - b1 ** state.t
    c2 = 1.0 - b2 ** state.t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * (g * g)
        p -= state.lr * (m / c1) / (np.sqrt(v / c2) + state.eps)
    return params, state


def soft_update(
    target_params: Sequence[np.ndarray],
    online_params: Sequence[np.ndarray],
    tau: float,
):
    """target <- tau * online + (1 - tau) * target, in place."""
    if not 0.0 <= tau <= 1.0:
        raise exception.ConfigurationError(f"tau must be in [0, 1], got {tau}")
    _check_shapes(target_params, online_params, "soft_update")
    for t, o in zip(target_params, online_params):
        t *= 1.0 - tau
        t += tau * o
    return target_params


def adam_arrays(name: str, state: AdamState) -> dict:
    """The moments and step count of ``state`` as named checkpoint arrays."""
    out = {f"adam_{name}_t": np.array([float(state.t)])}
    for i, (m, v) in enumerate(zip(state.m, state.v)):
        out[f"adam_{name}_m{i}"] = m
        out[f"adam_{name}_v{i}"] = v
    return out


def restore_adam(name: str, state: AdamState, arrays: dict) -> bool:
    """Inverse of adam_arrays. False when the checkpoint has no such state."""
    if f"adam_{name}_t" not in arrays:
        return False
    for i, (m, v) in enumerate(zip(state.m, state.v)):
        for dst, key in ((m, f"adam_{name}_m{i}"), (v, f"adam_{name}_v{i}")):
            src = arrays.get(key)
            if src is None or src.shape != dst.shape:
                raise exception.ConfigurationError(
                    f"Checkpoint optimizer state '{key}' doesn't match shape {dst.shape}",
                )
            dst[...] = src
    state.t = int(arrays[f"adam_{name}_t"][0])
    return True
