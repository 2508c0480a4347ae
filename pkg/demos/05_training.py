"""Short training runs for the three learners, plus checkpoint round trip.

These runs are far too short to beat the greedy baseline; they show the
training loop, the learning-curve CSV and how a trained agent is saved,
reloaded and evaluated without exploration. The acceptance suite runs the
full 500-episode comparison.
"""
import tempfile
from pathlib import Path

import numpy as np

from e2eslice import SlicingEnv, generate_scenario, preset
from e2eslice.agents.base import AgentConfig
from e2eslice.agents.training import evaluate, make_agent, train

EPISODES = 20
cfg = preset("desk", seed=1)
env = SlicingEnv(generate_scenario(cfg, 1), 1)
acfg = AgentConfig.from_scenario(cfg)
out = Path(tempfile.mkdtemp())

greedy_curve, _ = train("greedy", env, acfg, EPISODES, seed=1)
print(f"greedy mean reward over the same episodes: {greedy_curve.mean_reward.mean():.3f}")

agents = {}
for kind in ("ddpg", "rdpg", "sac"):
    curve, agent = train(kind, env, acfg, EPISODES, seed=1, csv_path=out / f"{kind}.csv")
    quarters = [round(float(np.mean(q)), 3) for q in np.array_split(curve.mean_reward, 4)]
    print(f"{kind:5s} reward by quarter {quarters}, final decile {curve.final_decile_mean():.3f}")
    agents[kind] = agent

print("\nlearning curve CSV head:")
print("".join((out / "ddpg.csv").read_text().splitlines(keepends=True)[:3]), end="")

# save, reload into a fresh agent and check the greedy policy is unchanged
agents["ddpg"].save(out / "ddpg.npz")
clone = make_agent("ddpg", env, acfg, seed=99)
clone.load(out / "ddpg.npz")
obs = env.reset(123)
same = np.array_equal(agents["ddpg"].act(obs), clone.act(obs))
print(f"\nreloaded checkpoint acts identically: {same}")
stats = evaluate(env, clone, episodes=3)
print("exploration-free evaluation:", {k: round(v, 3) for k, v in stats.items()})
