"""Two independent SAC agents, one deciding the radio part and one the core part."""
from __future__ import annotations

import numpy as np

from ..env import SlicingEnv
from .base import Agent, AgentConfig, UpdateStats
from .sac import SacAgent


class DistributedAgent(Agent):
    """The RAN agent sees the channel gains and picks subchannels and powers.

    The core agent sees link, demand and node state plus the set of users the
    RAN decision serves, and picks placements and paths. Both receive the
    same scalar reward but keep separate networks and buffers.
    """

    name = "dist"

    def __init__(self, env: SlicingEnv, cfg: AgentConfig, seed=None):
        super().__init__(env.obs_dim, env.action_dim, cfg, seed)
        self.env = env
        seeds = np.random.SeedSequence(seed).spawn(2)
        ran_obs = env.I * env.C * env.K
        core_obs = env.obs_dim - ran_obs + env.C
        self.ran = SacAgent(ran_obs, env.ran_action_dim, cfg, seeds[0])
        self.core = SacAgent(core_obs, env.action_dim - env.ran_action_dim, cfg, seeds[1])

    def networks(self) -> dict:
        nets = {f"ran/{k}": v for k, v in self.ran.networks().items()}
        nets.update({f"core/{k}": v for k, v in self.core.networks().items()})
        return nets

    def served_mask(self, ran_action) -> np.ndarray:
        env = self.env
        padded = np.concatenate([ran_action, np.zeros(env.action_dim - env.ran_action_dim)])
        assign = env.decode_action(padded).assign
        mask = np.zeros(env.C)
        mask[assign[assign >= 0]] = 1.0
        return mask

    def _split(self, obs, ran_action):
        radio_obs, core_obs = self.env.split_observation(np.asarray(obs, float))
        return radio_obs, np.concatenate([core_obs, self.served_mask(ran_action)])

    def act(self, obs, explore: bool = False) -> np.ndarray:
        radio_obs, _ = self.env.split_observation(np.asarray(obs, float))
        ran_action = self.ran.act(radio_obs, explore)
        _, core_obs = self._split(obs, ran_action)
        core_action = self.core.act(core_obs, explore)
        return np.concatenate([ran_action, core_action])

    def record(self, obs, action, reward, next_obs, done) -> list[UpdateStats]:
        radio_obs, core_obs = self._split(obs, action[: self.env.ran_action_dim])
        # the next served set is unknown until the RAN agent acts; use its current greedy choice
        next_radio, _ = self.env.split_observation(np.asarray(next_obs, float))
        _, next_core = self._split(next_obs, self.ran.act(next_radio, explore=False))
        ran_action, core_action = np.split(np.asarray(action, float), [self.env.ran_action_dim])
        stats = self.ran.record(radio_obs, ran_action, reward, next_radio, done)
        stats += self.core.record(core_obs, core_action, reward, next_core, done)
        return stats

    def end_episode(self, rewards) -> list[UpdateStats]:
        self.ran.end_episode(rewards)
        self.core.end_episode(rewards)
        return super().end_episode(rewards)
