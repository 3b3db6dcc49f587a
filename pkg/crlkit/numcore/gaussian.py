"""Diagonal Gaussian heads squashed through tanh.

The squashed log-density carries the usual log-det Jacobian correction
``-sum log(1 - a^2 + SQUASH_EPS)`` so entropy and target terms stay
defined up to the action bounds.
"""
from dataclasses import dataclass

import numpy as np

from crlkit import exception


LOG_STD_MIN = -20.0
LOG_STD_MAX = 2.0
SQUASH_EPS = 1e-6
HALF_LOG_2PI = 0.5 * np.log(2.0 * np.pi)


@dataclass
class GaussianHead:
    mean: np.ndarray
    log_std: np.ndarray
    # 1 where the raw log-std sat inside the clamp range, gradients are
    # zero elsewhere.
    log_std_mask: np.ndarray = None

    @classmethod
    def from_raw(cls, mean, raw_log_std, log_std_min=LOG_STD_MIN, log_std_max=LOG_STD_MAX):
        raw = np.asarray(raw_log_std, dtype=np.float64)
        mean = np.asarray(mean, dtype=np.float64)
        raw = np.broadcast_to(raw, mean.shape)
        mask = ((raw >= log_std_min) & (raw <= log_std_max)).astype(np.float64)
        return cls(
            mean=mean,
            log_std=np.clip(raw, log_std_min, log_std_max),
            log_std_mask=mask,
        )

    @property
    def std(self) -> np.ndarray:
        return np.exp(self.log_std)

    @property
    def dim(self) -> int:
        return self.mean.shape[-1]


@dataclass
class SquashedSample:
    action: np.ndarray
    log_prob: np.ndarray
    pre_tanh: np.ndarray
    noise: np.ndarray


def sample_squashed(head: GaussianHead, noise: np.ndarray) -> SquashedSample:
    """Reparameterized sample a = tanh(mean + std * noise) and its log-density."""
    noise = np.asarray(noise, dtype=np.float64)
    if noise.shape != head.mean.shape:
        raise exception.ConfigurationError(
            f"Noise of shape {noise.shape} doesn't match a head of shape {head.mean.shape}",
        )
    u = head.mean + head.std * noise
    action = np.tanh(u)
    gauss = -0.5 * noise * noise - head.log_std - HALF_LOG_2PI
    log_prob = np.sum(gauss - np.log(1.0 - action * action + SQUASH_EPS), axis=-1)
    return SquashedSample(action=action, log_prob=log_prob, pre_tanh=u, noise=noise)


def greedy_action(head: GaussianHead) -> np.ndarray:
    return np.tanh(head.mean)


def squashed_log_density(head: GaussianHead, action: np.ndarray) -> np.ndarray:
    """log pi(a) for an action strictly inside (-1, 1)."""
    action = np.asarray(action, dtype=np.float64)
    u = np.arctanh(action)
    z = (u - head.mean) / head.std
    gauss = -0.5 * z * z - head.log_std - HALF_LOG_2PI
    return np.sum(gauss - np.log(1.0 - action * action + SQUASH_EPS), axis=-1)


def sample_grads(head: GaussianHead, sample: SquashedSample):
    """Elementwise derivatives of a sample w.r.t. the head, noise held fixed.

    Returns ``(dlogp_dmean, dlogp_dlogstd, da_dmean, da_dlogstd)``. The
    log-std terms are already masked by the clamp.
    """
    a = sample.action
    one_minus = 1.0 - a * a
    # d/du of -log(1 - tanh(u)^2 + eps)
    dcorr_du = 2.0 * a * one_minus / (one_minus + SQUASH_EPS)
    du_dlogstd = head.std * sample.noise
    mask = head.log_std_mask if head.log_std_mask is not None else 1.0

    dlogp_dmean = dcorr_du
    dlogp_dlogstd = (-1.0 + dcorr_du * du_dlogstd) * mask
    da_dmean = one_minus
    da_dlogstd = one_minus * du_dlogstd * mask
    return dlogp_dmean, dlogp_dlogstd, da_dmean, da_dlogstd
