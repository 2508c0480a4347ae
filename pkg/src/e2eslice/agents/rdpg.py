"""Recurrent deterministic policy gradient: LSTM actor and critic trained on whole episodes."""
from __future__ import annotations

import copy
from dataclasses import replace

import numpy as np

from ..nn import Adam, RecurrentNet, soft_update
from .base import INSUFFICIENT, Agent, AgentConfig, UpdateStats, perturb
from .buffers import EpisodeBuffer


class RdpgAgent(Agent):
    """Both networks read the history through ``[o_t, a_{t-1}]`` inputs.

    The critic's dense head additionally receives the action being scored.
    """

    name = "rdpg"

    def __init__(self, obs_dim: int, act_dim: int, cfg: AgentConfig, seed=None, episode_len: int = 50):
        if cfg.rdpg_actor_lr or cfg.rdpg_critic_lr:
            cfg = replace(cfg, actor_lr=cfg.rdpg_actor_lr or cfg.actor_lr,
                          critic_lr=cfg.rdpg_critic_lr or cfg.critic_lr)
        super().__init__(obs_dim, act_dim, cfg, seed)
        w = cfg.hidden_width
        head = [w] * (cfg.hidden_layers - 1)
        in_dim = obs_dim + act_dim
        self.actor = RecurrentNet(in_dim, w, head, act_dim, out_act="tanh", rng=self.rng,
                                  final_scale=cfg.final_scale)
        self.critic = RecurrentNet(in_dim, w, head, 1, extra_dim=act_dim, rng=self.rng)
        self.actor_target = copy.deepcopy(self.actor)
        self.critic_target = copy.deepcopy(self.critic)
        self.actor_opt = Adam(self.actor.params, cfg.actor_lr)
        self.critic_opt = Adam(self.critic.params, cfg.critic_lr)
        # the capacity is counted in transitions, as for the flat buffers
        self.buffer = EpisodeBuffer(max(cfg.buffer_size // episode_len, cfg.episode_batch), self.rng)
        self._state = None
        self._prev_action = np.zeros(act_dim)
        self._obs: list = []
        self._act: list = []
        self._rew: list = []

    def networks(self) -> dict:
        return {"actor": self.actor, "critic": self.critic,
                "actor_target": self.actor_target, "critic_target": self.critic_target}

    def begin_episode(self) -> None:
        self._state = self.actor.lstm.initial_state(1)
        self._prev_action = np.zeros(self.act_dim)
        self._obs, self._act, self._rew = [], [], []

    def act(self, obs, explore: bool = False) -> np.ndarray:
        """Advance the running history by ``obs`` and return the next action.

        Each call consumes one time step, so call it once per environment step.
        """
        if self._state is None:
            self.begin_episode()
        x = np.concatenate([np.asarray(obs, float), self._prev_action])[None]
        out, self._state = self.actor.step(x, self._state)
        a = out[0]
        if explore:
            a = perturb(a, self.cfg.noise_scale, self.rng, self.schedule.factor)
        self._prev_action = a
        return a

    def record(self, obs, action, reward, next_obs, done) -> list[UpdateStats]:
        if not self._obs:
            self._obs.append(np.asarray(obs, float))
        self._act.append(np.asarray(action, float))
        self._rew.append(float(reward))
        self._obs.append(np.asarray(next_obs, float))
        return []

    def end_episode(self, rewards) -> list[UpdateStats]:
        if self._act:
            self.buffer.add(self._obs, self._act, self._rew)
        stats = [self.update() for _ in range(self.cfg.updates_per_episode)]
        super().end_episode(rewards)
        self._state = None
        return stats

    @staticmethod
    def _inputs(obs, act):
        """History inputs ``[o_t, a_{t-1}]`` for t = 0..len(obs)-1."""
        prev = np.concatenate([np.zeros_like(act[:1]), act], axis=0)[: len(obs)]
        return np.concatenate([obs, prev], axis=-1)

    def update(self) -> UpdateStats:
        cfg = self.cfg
        if len(self.buffer) < cfg.episode_batch:
            return UpdateStats(INSUFFICIENT)
        obs, act, rew = self.buffer.sample(cfg.episode_batch)
        T, N = rew.shape
        X = self._inputs(obs, act)  # (T+1, N, in)
        done = np.zeros((T, N))
        done[-1] = 1.0

        mu_next = self.actor_target(X)
        q_next = self.critic_target(X, mu_next)[1:, :, 0]
        y = self.scaler(rew) + cfg.discount * (1.0 - done) * q_next

        q, cache = self.critic.forward(X[:T], act)
        err = q[..., 0] - y
        grads, _, _ = self.critic.backward(cache, (2.0 / (N * T)) * err[..., None])
        self.critic_opt.step(self.critic.params, grads, self.critic_lr)

        mu, acache = self.actor.forward(X[:T])
        qa, ccache = self.critic.forward(X[:T], mu)
        _, _, dmu = self.critic.backward(ccache, np.full((T, N, 1), -1.0 / (N * T)), through_memory=False)
        agrads, _, _ = self.actor.backward(acache, dmu)
        self.actor_opt.step(self.actor.params, agrads, self.actor_lr)

        soft_update(self.actor_target, self.actor, cfg.tau)
        soft_update(self.critic_target, self.critic, cfg.tau)
        return UpdateStats("ok", float(np.mean(err ** 2)), float(-qa.mean()))
