"""One episode of the slicing environment driven by the greedy heuristic.

Every slot the environment draws fresh channels and demands, the agent
answers with an allocation, and the reward is the scaled InP utility minus a
penalty for any slice floor, deadline or link-capacity shortfall. A random
action vector is decoded alongside for contrast; decoding always yields a
structurally valid allocation, but the QoS constraints can still fail.
"""
import numpy as np

from e2eslice import SlicingEnv, generate_scenario, preset
from e2eslice.agents.greedy import greedy_allocate

env = SlicingEnv(generate_scenario(preset("desk"), seed=1), seed=1)
obs = env.reset(5)
print(f"observation dim {env.obs_dim}, action dim {env.action_dim}, {env.episode_len} slots")

rng = np.random.default_rng(0)
rows = []
while not env.done:
    # score a random action on the same slot before the greedy one is executed
    random_ev = env.evaluate(env.decode_action(rng.uniform(-1, 1, env.action_dim)))
    random_reward, _ = env.reward_of(random_ev)
    out = env.step(greedy_allocate(env))
    ev = out.evaluation
    rows.append((out.reward, ev.utility, ev.sum_rate, ev.admitted.sum(), random_reward))
    if env.t <= 5:
        print(f"slot {env.t:2d}: reward {out.reward:6.3f}  utility {ev.utility:7.2f}  "
              f"sum rate {ev.sum_rate / 1e3:7.1f} kbps  admitted {ev.admitted.sum()}  "
              f"violations {sorted(ev.violations) or '-'}")

rows = np.array(rows)
print("...")
print(f"episode mean reward (greedy) {rows[:, 0].mean():.3f}")
print(f"episode mean reward (random) {rows[:, 4].mean():.3f}")
print(f"mean utility {rows[:, 1].mean():.2f}, mean admitted users {rows[:, 3].mean():.2f} of {env.C}")

# the per-slot trace can be written out for offline inspection
env.export_trace("episode_trace.csv")
print("trace written to episode_trace.csv")
