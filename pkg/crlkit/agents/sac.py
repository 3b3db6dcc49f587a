"""Soft actor-critic with one twin critic pair per Lagrangian head.

Head 0 learns the main reward, heads 1..K the behavioral indicators and the
last head the success indicator when the task has one. All heads share the
policy but no critic parameters.
"""
from dataclasses import dataclass
import logging
from typing import List, Sequence, Tuple

from dataclasses_json import dataclass_json
import numpy as np

from crlkit import exception
from crlkit.numcore import checkpoint, gaussian, optim
from crlkit.numcore.net import DenseNet
from crlkit.utils import make_rng, trace


LOG = logging.getLogger("CRLKIT")

LOG_STD_STATE = "state"
LOG_STD_GLOBAL = "global"


@dataclass_json
@dataclass(frozen=True)
class AgentConfig:
    gamma: float = 0.9
    alpha: float = 0.02
    alpha_decay: float = 1.0
    tau: float = 0.005
    learning_rate: float = 0.0003
    batch_size: int = 256
    update_period: int = 200
    multiplier_batch_size: int = 2000
    multiplier_update_period: int = 2000
    random_steps: int = 10000
    warmup_steps: int = 2560
    buffer_size: int = 1000000
    hidden_size: int = 256
    log_std_mode: str = LOG_STD_STATE
    log_std_min: float = gaussian.LOG_STD_MIN
    log_std_max: float = gaussian.LOG_STD_MAX

    def __post_init__(self):
        if not 0.0 <= self.gamma < 1.0:
            raise exception.ConfigurationError(f"gamma must be in [0, 1), got {self.gamma}")
        if self.alpha < 0.0:
            raise exception.ConfigurationError(f"alpha must be >= 0, got {self.alpha}")
        if self.update_period < 1 or self.multiplier_update_period < 1:
            raise exception.ConfigurationError("Update periods must be >= 1")
        if self.log_std_mode not in (LOG_STD_STATE, LOG_STD_GLOBAL):
            raise exception.ConfigurationError(
                f"log_std_mode must be 'state' or 'global', got {self.log_std_mode}",
            )
        if self.log_std_min > self.log_std_max:
            raise exception.ConfigurationError("log_std_min is above log_std_max")

    @property
    def min_buffer(self) -> int:
        """Transitions needed before the first agent update."""
        return max(self.warmup_steps, self.batch_size, self.multiplier_batch_size)

    @classmethod
    def from_conf(cls, conf) -> "AgentConfig":
        return cls(
            gamma=conf.agent.gamma,
            alpha=conf.agent.alpha,
            alpha_decay=conf.agent.alpha_decay,
            tau=conf.agent.tau,
            learning_rate=conf.agent.learning_rate,
            batch_size=conf.agent.batch_size,
            update_period=conf.agent.update_period,
            multiplier_batch_size=conf.multipliers.batch_size,
            multiplier_update_period=conf.multipliers.update_period,
            random_steps=conf.agent.random_steps,
            warmup_steps=conf.agent.warmup_steps,
            buffer_size=conf.agent.buffer_size,
            hidden_size=conf.agent.hidden_size,
            log_std_mode=conf.agent.log_std_mode,
            log_std_min=conf.agent.log_std_min,
            log_std_max=conf.agent.log_std_max,
        )


def q_target(rewards, dones, gamma, alpha, next_log_prob, min_target_q):
    """Regression target r + (1 - done) * gamma * (min Q' - alpha * log pi')."""
    y = -alpha * np.asarray(next_log_prob) + np.asarray(min_target_q)
    return np.asarray(rewards) + (1.0 - np.asarray(dones, dtype=np.float64)) * gamma * y


class PolicyModel:
    """Tanh-squashed Gaussian policy on a layer-normalized tanh trunk."""

    def __init__(self, net: DenseNet, act_dim: int, log_std_mode=LOG_STD_STATE,
                 log_std=None, log_std_min=gaussian.LOG_STD_MIN,
                 log_std_max=gaussian.LOG_STD_MAX):
        self.net = net
        self.act_dim = act_dim
        self.log_std_mode = log_std_mode
        self.log_std_min = log_std_min
        self.log_std_max = log_std_max
        expected = 2 * act_dim if log_std_mode == LOG_STD_STATE else act_dim
        if net.layer_sizes[-1] != expected:
            raise exception.ConfigurationError(
                f"Policy net outputs {net.layer_sizes[-1]} values, "
                f"'{log_std_mode}' log-std needs {expected}",
            )
        if log_std_mode == LOG_STD_GLOBAL:
            self.log_std = np.zeros(act_dim) if log_std is None else np.asarray(log_std, dtype=np.float64)
        else:
            self.log_std = None

    @classmethod
    def create(cls, obs_dim: int, act_dim: int, config: AgentConfig, rng) -> "PolicyModel":
        h = config.hidden_size
        out = 2 * act_dim if config.log_std_mode == LOG_STD_STATE else act_dim
        net = DenseNet.create([obs_dim, h, h, out], rng, activation="tanh", layer_norm_first=True)
        return cls(net, act_dim, config.log_std_mode,
                   log_std_min=config.log_std_min, log_std_max=config.log_std_max)

    @property
    def obs_dim(self) -> int:
        return self.net.layer_sizes[0]

    def params(self) -> List[np.ndarray]:
        out = self.net.params()
        if self.log_std is not None:
            out.append(self.log_std)
        return out

    def head(self, observations):
        out, cache = self.net.forward_cached(observations)
        d = self.act_dim
        if self.log_std_mode == LOG_STD_STATE:
            mean, raw = out[..., :d], out[..., d:]
        else:
            mean, raw = out, self.log_std
        return gaussian.GaussianHead.from_raw(mean, raw, self.log_std_min, self.log_std_max), cache

    def param_grads(self, observations, cache, g_mean, g_log_std) -> List[np.ndarray]:
        """Push gradients on the head back to the parameters."""
        if self.log_std_mode == LOG_STD_STATE:
            upstream = np.concatenate((g_mean, g_log_std), axis=-1)
            grads, _ = self.net.backward(observations, upstream, cache)
            return grads
        grads, _ = self.net.backward(observations, g_mean, cache)
        g = np.asarray(g_log_std)
        grads.append(g.sum(axis=0) if g.ndim == 2 else g)
        return grads

    def act(self, observation, mode: str, rng: np.random.Generator) -> np.ndarray:
        if mode == "random":
            return rng.uniform(-1.0, 1.0, size=self.act_dim)
        head, _ = self.head(observation)
        if mode == "greedy":
            return gaussian.greedy_action(head)
        if mode == "explore":
            noise = rng.standard_normal(self.act_dim)
            return gaussian.sample_squashed(head, noise).action
        raise exception.InvalidArgumentError(f"Unknown action mode '{mode}'")

    def copy(self) -> "PolicyModel":
        return PolicyModel(
            self.net.copy(), self.act_dim, self.log_std_mode,
            log_std=None if self.log_std is None else self.log_std.copy(),
            log_std_min=self.log_std_min, log_std_max=self.log_std_max,
        )


@dataclass
class CriticHead:
    online: List[DenseNet]
    target: List[DenseNet]
    adam: List[optim.AdamState]

    @classmethod
    def create(cls, in_dim: int, hidden: int, lr: float, rngs) -> "CriticHead":
        online = [
            DenseNet.create([in_dim, hidden, hidden, 1], rng, activation="relu")
            for rng in rngs
        ]
        return cls(
            online=online,
            target=[q.copy() for q in online],
            adam=[optim.AdamState.zeros_like(q.params(), lr=lr) for q in online],
        )

    def min_target(self, sa) -> np.ndarray:
        q1 = self.target[0].forward(sa)[:, 0]
        q2 = self.target[1].forward(sa)[:, 0]
        return np.minimum(q1, q2)

    def min_online_with_input_grad(self, sa) -> Tuple[np.ndarray, np.ndarray]:
        """Per-row min of the online twins and its gradient w.r.t. the input."""
        q1, c1 = self.online[0].forward_cached(sa)
        q2, c2 = self.online[1].forward_cached(sa)
        first = q1[:, 0] <= q2[:, 0]
        _, g1 = self.online[0].backward(sa, first[:, None].astype(np.float64), c1)
        _, g2 = self.online[1].backward(sa, (~first)[:, None].astype(np.float64), c2)
        return np.where(first, q1[:, 0], q2[:, 0]), g1 + g2


class CriticBank:
    """Twin online and target critics for every head."""

    def __init__(self, heads: Sequence[CriticHead]):
        self.heads = list(heads)

    @classmethod
    def create(cls, n_heads, obs_dim, act_dim, config: AgentConfig, seed) -> "CriticBank":
        # one stream per network, so adding heads never changes the others
        return cls([
            CriticHead.create(
                obs_dim + act_dim,
                config.hidden_size,
                config.learning_rate,
                [make_rng(seed, "critic", k, j) for j in (0, 1)],
            )
            for k in range(n_heads)
        ])

    def __len__(self):
        return len(self.heads)

    def __getitem__(self, k) -> CriticHead:
        return self.heads[k]


class SACAgent:
    """Policy, critics and the update rules of the constrained soft actor-critic."""

    def __init__(self, obs_dim: int, act_dim: int, n_heads: int,
                 discounts: Sequence[float], config: AgentConfig, seed=0):
        if len(discounts) != n_heads:
            raise exception.ConfigurationError(
                f"{n_heads} critic heads need {n_heads} discounts, got {len(discounts)}",
            )
        self.config = config
        self.obs_dim = obs_dim
        self.act_dim = act_dim
        self.discounts = np.asarray(discounts, dtype=np.float64)
        self.alpha = config.alpha
        self.policy = PolicyModel.create(obs_dim, act_dim, config, make_rng(seed, "policy"))
        self.policy_adam = optim.AdamState.zeros_like(self.policy.params(), lr=config.learning_rate)
        self.critics = CriticBank.create(n_heads, obs_dim, act_dim, config, seed)
        self.n_updates = 0
        self.last_critic_losses = np.full(n_heads, np.nan)
        self.last_policy_loss = float("nan")

    @classmethod
    def for_task(cls, task, obs_dim, act_dim, config: AgentConfig, seed=0) -> "SACAgent":
        discounts = [task.gamma] + list(task.discounts)
        return cls(obs_dim, act_dim, 1 + task.n_indicators, discounts, config, seed)

    @property
    def n_heads(self) -> int:
        return len(self.critics)

    def act(self, observation, mode: str, rng) -> np.ndarray:
        return self.policy.act(observation, mode, rng)

    def head_rewards(self, batch, k) -> np.ndarray:
        """Head 0 regresses the reward, head k the (k-1)th indicator."""
        return batch.rewards if k == 0 else batch.indicators[:, k - 1]

    def next_action_sample(self, batch, rng) -> gaussian.SquashedSample:
        head, _ = self.policy.head(batch.next_observations)
        noise = rng.standard_normal(head.mean.shape)
        return gaussian.sample_squashed(head, noise)

    def compute_q_targets(self, batch, k, next_sample) -> np.ndarray:
        sa = np.concatenate((batch.next_observations, next_sample.action), axis=1)
        return q_target(
            self.head_rewards(batch, k),
            batch.dones,
            self.discounts[k],
            self.alpha,
            next_sample.log_prob,
            self.critics[k].min_target(sa),
        )

    def critic_update(self, batch, k, targets) -> Tuple[float, float]:
        """One Adam step per twin of head k, both on the same targets."""
        head = self.critics[k]
        sa = np.concatenate((batch.observations, batch.actions), axis=1)
        n = sa.shape[0]
        losses = []
        for j, (q, adam) in enumerate(zip(head.online, head.adam)):
            pred, cache = q.forward_cached(sa)
            err = pred[:, 0] - targets
            loss = float(np.mean(err * err))
            if not np.isfinite(loss):
                raise exception.DivergenceError(
                    f"Critic loss of head {k} twin {j} is {loss}",
                    where=f"critic_{k}",
                )
            grads, _ = q.backward(sa, (2.0 / n) * err[:, None], cache)
            optim.adam_step(q.params(), grads, adam, where=f"critic_{k}_{j}")
            losses.append(loss)
        for target, online in zip(head.target, head.online):
            optim.soft_update(target.params(), online.params(), self.config.tau)
        return losses[0], losses[1]

    def head_weights(self, reward_weight, lam_behavior, lam_success) -> np.ndarray:
        """Signed weight of every head in the policy objective."""
        w = np.zeros(self.n_heads)
        w[0] = reward_weight
        k = len(lam_behavior)
        w[1:1 + k] = -np.asarray(lam_behavior, dtype=np.float64)
        if self.n_heads > 1 + k:
            w[1 + k] = lam_success
        return w

    def policy_objective(self, observations, noise, weights):
        """Ascent objective and its gradient w.r.t. the policy parameters.

        J = mean(-alpha log pi(a|s) + sum_k w_k min_j Q_k,j(s, a)) with
        a = tanh(mean + std * noise). Critics are held fixed.
        """
        head, cache = self.policy.head(observations)
        sample = gaussian.sample_squashed(head, noise)
        n = observations.shape[0]
        sa = np.concatenate((observations, sample.action), axis=1)
        value = -self.alpha * sample.log_prob
        dj_da = np.zeros_like(sample.action)
        for k, w in enumerate(weights):
            if w == 0.0:
                continue
            q_min, g = self.critics[k].min_online_with_input_grad(sa)
            value = value + w * q_min
            dj_da += w * g[:, self.obs_dim:]
        dj_da /= n
        dj_dlogp = -self.alpha / n
        dlogp_dmean, dlogp_dlogstd, da_dmean, da_dlogstd = gaussian.sample_grads(head, sample)
        g_mean = dj_da * da_dmean + dj_dlogp * dlogp_dmean
        g_log_std = dj_da * da_dlogstd + dj_dlogp * dlogp_dlogstd
        grads = self.policy.param_grads(observations, cache, g_mean, g_log_std)
        return float(np.mean(value)), grads

    def policy_update(self, batch, weights, rng) -> float:
        """One Adam ascent step on the policy; returns the loss -J."""
        noise = rng.standard_normal((len(batch), self.act_dim))
        value, grads = self.policy_objective(batch.observations, noise, weights)
        if not np.isfinite(value):
            raise exception.DivergenceError(
                f"Policy objective is {value}", where="policy",
            )
        optim.adam_step(self.policy.params(), [-g for g in grads], self.policy_adam, where="policy")
        return -value

    @trace.trace
    def update(self, batch, weights, rng) -> dict:
        """Critics of every head, then the policy."""
        next_sample = self.next_action_sample(batch, rng)
        losses = np.zeros(self.n_heads)
        for k in range(self.n_heads):
            targets = self.compute_q_targets(batch, k, next_sample)
            l1, l2 = self.critic_update(batch, k, targets)
            losses[k] = 0.5 * (l1 + l2)
        policy_loss = self.policy_update(batch, weights, rng)
        self.alpha *= self.config.alpha_decay
        self.n_updates += 1
        self.last_critic_losses = losses
        self.last_policy_loss = policy_loss
        return {"critic_losses": losses, "policy_loss": policy_loss}

    # Persistence

    def _nets(self) -> dict:
        nets = {"policy": self.policy.net}
        for k, head in enumerate(self.critics.heads):
            for j in (0, 1):
                nets[f"q{k}_{j}"] = head.online[j]
                nets[f"q{k}_{j}_target"] = head.target[j]
        return nets

    def _optimizers(self) -> dict:
        out = {"policy": self.policy_adam}
        for k, head in enumerate(self.critics.heads):
            for j in (0, 1):
                out[f"q{k}_{j}"] = head.adam[j]
        return out

    def save(self, path, bank=None, extra=None) -> None:
        """Nets, optimizer state and, with ``bank``, the multipliers.

        ``extra`` arrays are stored alongside for the caller.
        """
        arrays = {
            "alpha": np.array([self.alpha]),
            "n_updates": np.array([float(self.n_updates)]),
        }
        if self.policy.log_std is not None:
            arrays["policy_log_std"] = self.policy.log_std
        for name, state in self._optimizers().items():
            arrays.update(optim.adam_arrays(name, state))
        if bank is not None:
            arrays["multiplier_params"] = bank.params
            arrays["multiplier_updates"] = np.array([float(bank.n_updates)])
            arrays.update(optim.adam_arrays("multipliers", bank.adam))
        arrays.update(extra or {})
        checkpoint.save(path, nets=self._nets(), arrays=arrays)
        LOG.debug(f"Saved agent checkpoint to {path}")

    def load(self, path, bank=None) -> dict:
        """Restore what save() wrote. Returns every stored array."""
        nets, arrays = checkpoint.load(path)
        mine = self._nets()
        if set(nets) != set(mine):
            raise exception.ConfigurationError(
                f"Checkpoint {path} holds {sorted(nets)}, agent has {sorted(mine)}",
            )
        for name, net in nets.items():
            if net.layer_sizes != mine[name].layer_sizes:
                raise exception.ConfigurationError(
                    f"Checkpoint net '{name}' has sizes {net.layer_sizes}, "
                    f"agent expects {mine[name].layer_sizes}",
                )
            for dst, src in zip(mine[name].params(), net.params()):
                dst[...] = src
        if self.policy.log_std is not None:
            self.policy.log_std[...] = arrays["policy_log_std"]
        self.alpha = float(arrays["alpha"][0])
        if "n_updates" in arrays:
            self.n_updates = int(arrays["n_updates"][0])
        for name, state in self._optimizers().items():
            optim.restore_adam(name, state, arrays)
        if bank is not None and "multiplier_params" in arrays:
            if arrays["multiplier_params"].shape != bank.params.shape:
                raise exception.ConfigurationError(
                    f"Checkpoint has {arrays['multiplier_params'].shape[0]} multipliers, "
                    f"task has {bank.n}",
                )
            bank.params[...] = arrays["multiplier_params"]
            if "multiplier_updates" in arrays:
                bank.n_updates = int(arrays["multiplier_updates"][0])
            optim.restore_adam("multipliers", bank.adam, arrays)
        return arrays

    def stats(self, serializable=False) -> dict:
        losses = self.last_critic_losses
        return {
            "updates": self.n_updates,
            "alpha": self.alpha,
            "policy_loss": self.last_policy_loss,
            "critic_losses": losses.tolist() if serializable else losses.copy(),
        }


def load_policy(path, obs_dim: int, act_dim: int, config: AgentConfig) -> PolicyModel:
    """Just the policy out of an agent checkpoint, for evaluation."""
    nets, arrays = checkpoint.load(path)
    if "policy" not in nets:
        raise exception.ConfigurationError(f"Checkpoint {path} has no policy")
    net = nets["policy"]
    if net.layer_sizes[0] != obs_dim:
        raise exception.ConfigurationError(
            f"Checkpoint policy expects {net.layer_sizes[0]} observation features, "
            f"the environment produces {obs_dim}",
        )
    mode = LOG_STD_GLOBAL if "policy_log_std" in arrays else LOG_STD_STATE
    return PolicyModel(
        net, act_dim, mode,
        log_std=arrays.get("policy_log_std"),
        log_std_min=config.log_std_min, log_std_max=config.log_std_max,
    )
