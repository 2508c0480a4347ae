"""Deterministic policy gradient agent with a feed-forward actor and critic."""
from __future__ import annotations

import copy

import numpy as np

from ..nn import Adam, soft_update
from .base import INSUFFICIENT, Agent, AgentConfig, UpdateStats, make_actor, make_critic, perturb
from .buffers import ReplayBuffer


class DdpgAgent(Agent):
    name = "ddpg"

    def __init__(self, obs_dim: int, act_dim: int, cfg: AgentConfig, seed=None):
        super().__init__(obs_dim, act_dim, cfg, seed)
        self.actor = make_actor(obs_dim, act_dim, cfg, self.rng)
        self.critic = make_critic(obs_dim, act_dim, cfg, self.rng)
        self.actor_target = copy.deepcopy(self.actor)
        self.critic_target = copy.deepcopy(self.critic)
        self.actor_opt = Adam(self.actor.params, cfg.actor_lr)
        self.critic_opt = Adam(self.critic.params, cfg.critic_lr)
        self.buffer = ReplayBuffer(cfg.buffer_size, obs_dim, act_dim, self.rng)

    def networks(self) -> dict:
        return {"actor": self.actor, "critic": self.critic,
                "actor_target": self.actor_target, "critic_target": self.critic_target}

    def act(self, obs, explore: bool = False) -> np.ndarray:
        a = self.actor(np.asarray(obs, float)[None])[0]
        if explore:
            return perturb(a, self.cfg.noise_scale, self.rng, self.schedule.factor)
        return a

    def record(self, obs, action, reward, next_obs, done) -> list[UpdateStats]:
        return self._store_and_learn(obs, action, reward, next_obs, done)

    def update(self) -> UpdateStats:
        cfg = self.cfg
        if len(self.buffer) < cfg.batch_size:
            return UpdateStats(INSUFFICIENT)
        s, a, r, s2, d = self.buffer.sample(cfg.batch_size)
        B = len(r)
        a2 = self.actor_target(s2)
        q2 = self.critic_target(np.concatenate([s2, a2], axis=1))[:, 0]
        y = self.scaler(r) + cfg.discount * (1.0 - d) * q2

        q, cache = self.critic.forward(np.concatenate([s, a], axis=1))
        err = q[:, 0] - y
        grads, _ = self.critic.backward(cache, (2.0 / B) * err[:, None], input_grad=False)
        self.critic_opt.step(self.critic.params, grads, self.critic_lr)

        mu, acache = self.actor.forward(s)
        qa, ccache = self.critic.forward(np.concatenate([s, mu], axis=1))
        _, dinp = self.critic.backward(ccache, np.full((B, 1), -1.0 / B), param_grad=False)
        agrads, _ = self.actor.backward(acache, dinp[:, self.obs_dim:], input_grad=False)
        self.actor_opt.step(self.actor.params, agrads, self.actor_lr)

        soft_update(self.actor_target, self.actor, cfg.tau)
        soft_update(self.critic_target, self.critic, cfg.tau)
        return UpdateStats("ok", float(np.mean(err ** 2)), float(-qa.mean()))
