"""Exhaustive search on a tiny instance, compared with the greedy heuristic.

The oracle enumerates every subchannel owner and power level on a small grid,
then the cheapest feasible VNF placement and routing for each radio choice.
It is only tractable for a handful of users and subchannels, which is exactly
what makes it useful as ground truth.
"""
import time
from pathlib import Path

from e2eslice import SlicingEnv, generate_scenario
from e2eslice import config
from e2eslice.agents.greedy import greedy_allocate
from e2eslice.oracle import enumerate_optimal, search_space_size

ini = Path(__file__).resolve().parents[1] / "tests" / "data" / "tiny_b.ini"
cfg = config.load(ini)
env = SlicingEnv(generate_scenario(cfg, cfg.seed), cfg.seed)
env.reset(cfg.seed)
print(f"{env.C} users, {env.I} BS x {env.K} subchannels, {env.N} routers, slices {env.S}")
print(f"radio grid size: {search_space_size(env)} combinations")

start = time.perf_counter()
best = enumerate_optimal(env)
print(f"oracle: utility {best.utility:.4f} (feasible {best.feasible}), "
      f"{best.feasible_count} of {best.radio_choices} radio choices completable, "
      f"{time.perf_counter() - start:.1f}s")
print("  owners:", best.allocation.assign.tolist())
print("  power :", [[round(p, 3) for p in row] for row in best.allocation.power.tolist()])

greedy = env.evaluate(greedy_allocate(env))
print(f"greedy: utility {greedy.utility:.4f} (feasible {greedy.feasible})")
print(f"greedy reaches {100 * greedy.utility / best.utility:.1f}% of the optimum on this slot")
