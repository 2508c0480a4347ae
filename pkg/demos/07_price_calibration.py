"""How big are revenue and cost under the default unit prices?

Runs the greedy allocation for a few slots of each preset and reports the
revenue, RAN cost and core cost it earns, together with the unit-price scale
that would make each cost term match revenue. Use it to pick prices for a new
scenario; the defaults leave revenue dominant, so the utility mostly rewards
served rate.
"""
import numpy as np

from e2eslice import SlicingEnv, generate_scenario, preset
from e2eslice.agents.greedy import greedy_allocate

SLOTS = 5

for name in ("desk", "paper"):
    cfg = preset(name)
    env = SlicingEnv(generate_scenario(cfg, 1), 1)
    env.reset(1)
    rev, ran, core, util = [], [], [], []
    for _ in range(SLOTS):
        out = env.step(greedy_allocate(env))
        ev = out.evaluation
        rev.append(cfg.theta1 * ev.revenue.sum())
        ran.append(cfg.theta2 * ev.cost_ran.sum())
        core.append(cfg.theta2 * ev.cost_core.sum())
        util.append(ev.utility)
    rev, ran, core = np.mean(rev), np.mean(ran), np.mean(core)
    print(f"{name} preset ({env.C} users), greedy over {SLOTS} slots:")
    print(f"  weighted revenue {rev:10.4g}")
    print(f"  weighted RAN cost {ran:9.4g}   (price x{rev / max(ran, 1e-300):.3g} to match revenue)")
    print(f"  weighted core cost {core:8.4g}   (price x{rev / max(core, 1e-300):.3g} to match revenue)")
    print(f"  utility {np.mean(util):.4g}, reward scale {cfg.reward_coef} -> reward part "
          f"{cfg.reward_coef * np.mean(util):.3g}")
