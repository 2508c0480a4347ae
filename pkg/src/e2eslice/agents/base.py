"""Shared pieces of the learning agents: hyper-parameters, update status, reward scaling."""
from __future__ import annotations

import collections
from dataclasses import dataclass, field

import numpy as np

from ..config import ScenarioConfig
from ..nn import Mlp

INSUFFICIENT = "insufficient samples"


@dataclass(frozen=True)
class AgentConfig:
    discount: float = 0.80
    batch_size: int = 64
    tau: float = 0.001
    hidden_layers: int = 2
    hidden_width: int = 512
    actor_lr: float = 1e-5
    critic_lr: float = 5e-5
    lr_decay: float = 1e-3
    buffer_size: int = 600000
    noise_scale: float = 0.1
    episode_batch: int = 16
    updates_per_episode: int = 1
    updates_per_step: int = 1
    update_every: int = 1
    normalize_rewards: bool = True
    # soft actor-critic
    init_temperature: float = 0.1
    temperature_lr: float = 3e-4
    fixed_temperature: float | None = None
    # recurrent agent: one update per episode, so it may need its own step sizes
    rdpg_actor_lr: float | None = None
    rdpg_critic_lr: float | None = None
    target_entropy: float | None = None  # None -> minus the action dimension
    final_scale: float = 1e-3

    def __post_init__(self):
        if self.actor_lr >= self.critic_lr:
            raise ValueError("actor learning rate must be below the critic's (two-timescale condition)")
        if min(self.batch_size, self.episode_batch, self.buffer_size, self.update_every) <= 0:
            raise ValueError("batch and buffer sizes must be positive")

    @classmethod
    def from_scenario(cls, cfg: ScenarioConfig, **overrides) -> "AgentConfig":
        base = dict(
            discount=cfg.discount, batch_size=cfg.batch_size, tau=cfg.tau, hidden_layers=cfg.hidden_layers,
            hidden_width=cfg.hidden_width, actor_lr=cfg.actor_lr, critic_lr=cfg.critic_lr,
            lr_decay=cfg.lr_decay, buffer_size=cfg.buffer_size, noise_scale=cfg.noise_scale,
            episode_batch=cfg.rdpg_batch_episodes, updates_per_episode=cfg.rdpg_updates_per_episode,
            updates_per_step=cfg.updates_per_step, update_every=cfg.update_every,
            normalize_rewards=cfg.normalize_rewards,
            fixed_temperature=cfg.sac_temperature if cfg.sac_temperature > 0 else None,
            rdpg_actor_lr=cfg.rdpg_actor_lr or None, rdpg_critic_lr=cfg.rdpg_critic_lr or None)
        return cls(**{**base, **overrides})

    def hidden(self) -> list[int]:
        return [self.hidden_width] * self.hidden_layers


@dataclass
class UpdateStats:
    status: str = "ok"
    critic_loss: float = float("nan")
    actor_loss: float = float("nan")
    extra: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status == "ok"


class RewardScaler:
    """Divides rewards by their standard deviation over the last ``window`` episodes.

    Only the scale is touched so that the sign of a reward, and hence the
    meaning of a penalty, is preserved.
    """

    def __init__(self, window: int = 100, enabled: bool = True):
        self.enabled = enabled
        self._episodes: collections.deque = collections.deque(maxlen=window)
        self.scale = 1.0

    def end_episode(self, rewards) -> None:
        if not self.enabled or len(rewards) == 0:
            return
        self._episodes.append(np.asarray(rewards, float))
        std = float(np.concatenate(self._episodes).std())
        self.scale = std if std > 1e-8 else 1.0

    def __call__(self, r):
        return np.asarray(r, float) / self.scale if self.enabled else np.asarray(r, float)


class Schedule:
    """Inverse-time decay shared by learning rates and exploration noise."""

    def __init__(self, decay: float):
        self.decay = decay
        self.step = 0

    @property
    def factor(self) -> float:
        return 1.0 / (1.0 + self.decay * self.step)


def perturb(action, noise_scale: float, rng, factor: float = 1.0):
    """Gaussian perturbation, clamped to the action box."""
    a = np.asarray(action, float)
    if noise_scale > 0:
        a = a + noise_scale * factor * rng.standard_normal(a.shape)
    return np.clip(a, -1.0, 1.0)


def make_actor(obs_dim: int, act_dim: int, cfg: AgentConfig, rng) -> Mlp:
    return Mlp([obs_dim, *cfg.hidden(), act_dim], "tanh", rng, cfg.final_scale)


def make_critic(obs_dim: int, act_dim: int, cfg: AgentConfig, rng) -> Mlp:
    return Mlp([obs_dim + act_dim, *cfg.hidden(), 1], "identity", rng)


class Agent:
    """Common driver hooks; subclasses implement ``act`` and ``update``."""

    name = "agent"

    def __init__(self, obs_dim: int, act_dim: int, cfg: AgentConfig, seed=None):
        self.obs_dim, self.act_dim, self.cfg = obs_dim, act_dim, cfg
        self.rng = np.random.default_rng(seed)
        self.schedule = Schedule(cfg.lr_decay)
        self.scaler = RewardScaler(enabled=cfg.normalize_rewards)
        self._steps = 0

    @property
    def actor_lr(self) -> float:
        return self.cfg.actor_lr * self.schedule.factor

    @property
    def critic_lr(self) -> float:
        return self.cfg.critic_lr * self.schedule.factor

    def begin_episode(self) -> None:
        """Reset any per-episode state (recurrent memory)."""

    def record(self, obs, action, reward, next_obs, done) -> list[UpdateStats]:
        """Store one transition and run the per-step updates, if any."""
        return []

    def _store_and_learn(self, obs, action, reward, next_obs, done) -> list[UpdateStats]:
        """Replay-buffer agents: ``updates_per_step`` updates after every ``update_every`` steps."""
        self.buffer.add(obs, action, reward, next_obs, done)
        self._steps += 1
        if self._steps % self.cfg.update_every:
            return []
        return [self.update() for _ in range(self.cfg.updates_per_step)]

    def end_episode(self, rewards) -> list[UpdateStats]:
        self.scaler.end_episode(rewards)
        self.schedule.step += 1
        return []

    def networks(self) -> dict:
        raise NotImplementedError

    def save(self, path) -> None:
        from ..nn import save_checkpoint
        save_checkpoint(path, self.networks())

    def load(self, path) -> None:
        from ..nn import load_checkpoint
        load_checkpoint(path, self.networks())
