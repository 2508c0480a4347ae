"""Soft actor-critic with twin critics, tanh-squashed Gaussian policy and learned temperature."""
from __future__ import annotations

import copy

import numpy as np

from ..nn import Adam, Mlp, soft_update
from .base import INSUFFICIENT, Agent, AgentConfig, UpdateStats, make_critic
from .buffers import ReplayBuffer

LOG_STD_MIN, LOG_STD_MAX = -5.0, 2.0
_SQUASH_EPS = 1e-6
_HALF_LOG_2PI = 0.5 * np.log(2.0 * np.pi)


class GaussianPolicy:
    """Network emitting the mean and log standard deviation of a diagonal Gaussian."""

    def __init__(self, obs_dim: int, act_dim: int, cfg: AgentConfig, rng):
        self.act_dim = act_dim
        self.net = Mlp([obs_dim, *cfg.hidden(), 2 * act_dim], "identity", rng, cfg.final_scale)

    @property
    def params(self):
        return self.net.params

    def heads(self, obs):
        out, cache = self.net.forward(obs)
        mu, raw = out[:, :self.act_dim], out[:, self.act_dim:]
        log_std = np.clip(raw, LOG_STD_MIN, LOG_STD_MAX)
        inside = (raw > LOG_STD_MIN) & (raw < LOG_STD_MAX)
        return mu, log_std, inside, cache

    def sample(self, obs, rng):
        """Reparameterised draw; returns the action, its log-density and the pieces for backprop."""
        mu, log_std, inside, cache = self.heads(obs)
        std = np.exp(log_std)
        eps = rng.standard_normal(mu.shape)
        a = np.tanh(mu + std * eps)
        logp = np.sum(-0.5 * eps ** 2 - log_std - _HALF_LOG_2PI - np.log(1.0 - a ** 2 + _SQUASH_EPS), axis=1)
        return a, logp, (std, eps, inside, cache)

    def backward(self, parts, a, dlogp, da):
        """Gradients given dL/dlogp (B,) and dL/da (B, A) holding ``eps`` fixed."""
        std, eps, inside, cache = parts
        squash = 1.0 - a ** 2
        corr = 2.0 * a * squash / (squash + _SQUASH_EPS)  # d[-log(1-a^2)]/du
        dmu = dlogp[:, None] * corr + da * squash
        dlog_std = dlogp[:, None] * (-1.0 + corr * std * eps) + da * squash * std * eps
        dlog_std = dlog_std * inside
        grads, _ = self.net.backward(cache, np.concatenate([dmu, dlog_std], axis=1), input_grad=False)
        return grads


def gaussian_entropy(log_std) -> np.ndarray:
    """Entropy of a diagonal Gaussian, summed over the action dimensions."""
    return np.sum(log_std + 0.5 * np.log(2.0 * np.pi * np.e), axis=-1)


class SacAgent(Agent):
    name = "sac"

    def __init__(self, obs_dim: int, act_dim: int, cfg: AgentConfig, seed=None):
        super().__init__(obs_dim, act_dim, cfg, seed)
        self.policy = GaussianPolicy(obs_dim, act_dim, cfg, self.rng)
        self.critics = [make_critic(obs_dim, act_dim, cfg, self.rng) for _ in range(2)]
        self.targets = [copy.deepcopy(c) for c in self.critics]
        self.policy_opt = Adam(self.policy.params, cfg.actor_lr)
        self.critic_opts = [Adam(c.params, cfg.critic_lr) for c in self.critics]
        self.log_alpha = np.array([np.log(cfg.init_temperature)])
        self.alpha_opt = Adam([self.log_alpha], cfg.temperature_lr)
        self.target_entropy = -float(act_dim) if cfg.target_entropy is None else cfg.target_entropy
        self.buffer = ReplayBuffer(cfg.buffer_size, obs_dim, act_dim, self.rng)
        self.last_trace: dict = {}

    @property
    def alpha(self) -> float:
        if self.cfg.fixed_temperature is not None:
            return self.cfg.fixed_temperature
        return float(np.exp(self.log_alpha[0]))

    def networks(self) -> dict:
        nets = {"policy": self.policy}
        for n, (c, t) in enumerate(zip(self.critics, self.targets)):
            nets[f"critic{n}"], nets[f"target{n}"] = c, t
        return nets

    def act(self, obs, explore: bool = False) -> np.ndarray:
        obs = np.asarray(obs, float)[None]
        if explore:
            return self.policy.sample(obs, self.rng)[0][0]
        mu, _, _, _ = self.policy.heads(obs)
        return np.tanh(mu[0])

    def record(self, obs, action, reward, next_obs, done) -> list[UpdateStats]:
        return self._store_and_learn(obs, action, reward, next_obs, done)

    def _twin(self, nets, x):
        return [net.forward(x) for net in nets]

    def update(self) -> UpdateStats:
        cfg = self.cfg
        if len(self.buffer) < cfg.batch_size:
            return UpdateStats(INSUFFICIENT)
        s, a, r, s2, d = self.buffer.sample(cfg.batch_size)
        B = len(r)
        alpha = self.alpha

        a2, logp2, _ = self.policy.sample(s2, self.rng)
        x2 = np.concatenate([s2, a2], axis=1)
        q_next = np.minimum(*(t(x2)[:, 0] for t in self.targets))
        y = self.scaler(r) + cfg.discount * (1.0 - d) * (q_next - alpha * logp2)

        x = np.concatenate([s, a], axis=1)
        critic_loss = 0.0
        for critic, opt in zip(self.critics, self.critic_opts):
            q, cache = critic.forward(x)
            err = q[:, 0] - y
            grads, _ = critic.backward(cache, (2.0 / B) * err[:, None], input_grad=False)
            opt.step(critic.params, grads, self.critic_lr)
            critic_loss += float(np.mean(err ** 2))

        pa, logp, parts = self.policy.sample(s, self.rng)
        xp = np.concatenate([s, pa], axis=1)
        (q1, c1), (q2, c2) = self._twin(self.critics, xp)
        use_first = q1[:, 0] <= q2[:, 0]
        q_min = np.where(use_first, q1[:, 0], q2[:, 0])
        upstream = np.full((B, 1), -1.0 / B)
        _, d1 = self.critics[0].backward(c1, upstream * use_first[:, None], param_grad=False)
        _, d2 = self.critics[1].backward(c2, upstream * ~use_first[:, None], param_grad=False)
        da = (d1 + d2)[:, self.obs_dim:]
        grads = self.policy.backward(parts, pa, np.full(B, alpha / B), da)
        self.policy_opt.step(self.policy.params, grads, self.actor_lr)
        self.last_trace = {"target_q_min": q_next, "policy_q_min": q_min, "use_first": use_first}

        if cfg.fixed_temperature is None:
            grad_alpha = -np.mean(logp + self.target_entropy)
            self.alpha_opt.step([self.log_alpha], [np.array([grad_alpha])])

        for t, c in zip(self.targets, self.critics):
            soft_update(t, c, cfg.tau)
        actor_loss = float(np.mean(alpha * logp - q_min))
        return UpdateStats("ok", critic_loss / 2, actor_loss, {"alpha": alpha, "entropy": float(-logp.mean())})
