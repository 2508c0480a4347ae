"""Episode loops for training and exploration-free evaluation."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..config import ScenarioConfig
from ..env import SlicingEnv
from .base import Agent, AgentConfig
from .ddpg import DdpgAgent
from .distributed import DistributedAgent
from .greedy import greedy_allocate
from .rdpg import RdpgAgent
from .sac import SacAgent

ALGORITHMS = ("rdpg", "sac", "ddpg", "dist", "greedy")
LEARNERS = ("rdpg", "sac", "ddpg", "dist")


@dataclass
class LearningCurve:
    episode: np.ndarray
    mean_reward: np.ndarray
    utility: np.ndarray
    violations: np.ndarray

    def __len__(self) -> int:
        return len(self.episode)

    def final_decile_mean(self) -> float:
        if not len(self):
            raise ValueError("empty learning curve")
        n = max(1, len(self) // 10)
        return float(np.mean(self.mean_reward[-n:]))

    def to_csv(self, path) -> None:
        with open(Path(path), "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["episode", "mean_reward", "utility", "violations"])
            for row in zip(self.episode, self.mean_reward, self.utility, self.violations):
                writer.writerow([int(row[0]), *(repr(float(v)) for v in row[1:])])


def make_agent(kind: str, env: SlicingEnv, cfg: AgentConfig, seed=None) -> Agent:
    if kind == "ddpg":
        return DdpgAgent(env.obs_dim, env.action_dim, cfg, seed)
    if kind == "sac":
        return SacAgent(env.obs_dim, env.action_dim, cfg, seed)
    if kind == "rdpg":
        return RdpgAgent(env.obs_dim, env.action_dim, cfg, seed, env.episode_len)
    if kind == "dist":
        return DistributedAgent(env, cfg, seed)
    raise ValueError(f"unknown algorithm {kind!r}; choose from {LEARNERS}")


def run_episode(env: SlicingEnv, agent: Agent | None, explore: bool, seed=None, learn: bool = False):
    """Play one episode; ``agent=None`` runs the greedy heuristic.

    Returns per-step rewards, utilities, violation counts and evaluations.
    """
    obs = env.reset(seed)
    if agent is not None:
        agent.begin_episode()
    rewards, utilities, violations, evals = [], [], [], []
    while not env.done:
        action = greedy_allocate(env) if agent is None else agent.act(obs, explore)
        out = env.step(action)
        if learn:
            agent.record(obs, action, out.reward, out.observation, out.done)
        obs = out.observation
        rewards.append(out.reward)
        utilities.append(out.evaluation.utility)
        violations.append(len(out.evaluation.violations))
        evals.append(out.evaluation)
    if learn:
        agent.end_episode(rewards)
    return np.array(rewards), np.array(utilities), np.array(violations, float), evals


def train(kind: str, env: SlicingEnv, cfg: ScenarioConfig | AgentConfig, episodes: int | None = None,
          seed: int = 0, csv_path=None, agent: Agent | None = None) -> tuple[LearningCurve, Agent | None]:
    """Train one agent and return its per-episode learning curve.

    ``kind="greedy"`` produces the heuristic's curve on the same episode
    sequence, which is handy as a reference line.
    """
    if kind not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {kind!r}; choose from {ALGORITHMS}")
    if isinstance(cfg, ScenarioConfig):
        episodes = cfg.episodes if episodes is None else episodes
        cfg = AgentConfig.from_scenario(cfg)
    elif episodes is None:
        raise ValueError("episodes is required with an AgentConfig")
    if kind != "greedy" and agent is None:
        agent = make_agent(kind, env, cfg, seed)
    seeds = np.random.SeedSequence(seed).generate_state(max(episodes, 1))
    rows = []
    for ep in range(episodes):
        r, u, v, _ = run_episode(env, None if kind == "greedy" else agent, explore=True,
                                 seed=int(seeds[ep]), learn=kind != "greedy")
        rows.append((ep, r.mean(), u.mean(), v.mean()))
    arr = np.array(rows, float).reshape(-1, 4)
    curve = LearningCurve(arr[:, 0].astype(int), arr[:, 1], arr[:, 2], arr[:, 3])
    if csv_path is not None:
        curve.to_csv(csv_path)
    return curve, agent


def distributed_train(env: SlicingEnv, cfg: ScenarioConfig | AgentConfig, episodes: int | None = None,
                      seed: int = 0, csv_path=None):
    return train("dist", env, cfg, episodes, seed, csv_path)


def evaluate(env: SlicingEnv, agent: Agent | None, episodes: int = 20, seed: int = 10_000) -> dict:
    """Exploration-free averages over ``episodes`` evaluation episodes."""
    rewards, utilities, rates, costs, admitted, violations = [], [], [], [], [], []
    for ep in range(episodes):
        r, u, v, evals = run_episode(env, agent, explore=False, seed=seed + ep)
        rewards.append(r.mean())
        utilities.append(u.mean())
        violations.append(v.mean())
        rates.append(np.mean([e.sum_rate for e in evals]))
        costs.append(np.mean([e.total_cost for e in evals]))
        admitted.append(np.mean([e.admitted.sum() for e in evals]))
    return {"mean_reward": float(np.mean(rewards)), "utility": float(np.mean(utilities)),
            "sum_rate": float(np.mean(rates)), "cost": float(np.mean(costs)),
            "admitted": float(np.mean(admitted)), "violations": float(np.mean(violations))}
