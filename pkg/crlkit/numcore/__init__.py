"""Small differentiable core: dense nets, Adam, squashed Gaussian heads."""
from crlkit.numcore.gaussian import (  # noqa: F401
    GaussianHead, SquashedSample, greedy_action, sample_squashed,
    squashed_log_density,
)
from crlkit.numcore.net import DenseNet  # noqa: F401
from crlkit.numcore.optim import AdamState, adam_step, soft_update  # noqa: F401
