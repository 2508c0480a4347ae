"""The core side: the bundled Abilene backbone, candidate paths and delays.

Shows the k shortest simple paths between two routers, then breaks every
admitted user's end-to-end delay into its five parts next to the slice
deadline, first for the greedy allocation of one slot and then for a random
decoded action whose chains spread over several routers.
"""
import numpy as np

from e2eslice import SlicingEnv, enumerate_paths, generate_scenario, load_graph, preset
from e2eslice import corenet
from e2eslice.agents.greedy import greedy_allocate

graph = load_graph()  # Abilene
names = graph.labels or [str(n) for n in graph.nodes]
print(f"{graph.num_nodes} nodes, {graph.num_links} links")

src, dst = 0, graph.num_nodes - 1
for p in enumerate_paths(graph, src, dst, k_max=4):
    km = graph.distances()[list(p.links)].sum() / 1e3
    print(f"  {' -> '.join(names[n] for n in p.nodes)}  ({p.hops} hops, {km:.0f} km)")

env = SlicingEnv(generate_scenario(preset("desk"), seed=1), seed=1)
env.reset(1)
parts = ("proc_core", "prop_core", "trans_core", "prop_ran", "trans_ran")


def show(title, alloc):
    ev = env.evaluate(alloc)
    print(f"\n{title}")
    print("user slice  proc    core-prop core-tx  ran-prop  ran-tx   total   deadline  (ms)")
    for c in np.flatnonzero(ev.admitted):
        terms = [ev.delays[k][c] * 1e3 for k in parts]
        s = env.scenario.user_slice[c]
        print(f"{c:4d} {s:5d} " + " ".join(f"{t:8.3f}" for t in terms)
              + f" {ev.total_delay[c] * 1e3:8.3f} {env.scenario.tau_max_s[s] * 1e3:8.1f}")
    # the robust load keeps every link below capacity whatever the demand inside the box
    robust = corenet.robust_link_load(ev.usage, ev.admitted, env.scenario.demand)
    busiest = [lid for lid in np.argsort(robust / env.bandwidth)[::-1][:3] if robust[lid] > 0]
    for lid in busiest:
        a, b = graph.links[lid][:2]
        print(f"  link {names[a]}-{names[b]}: robust load {robust[lid] / 1e6:.1f} "
              f"of {env.bandwidth[lid] / 1e6:.0f} Mbps")
    print("feasible:", ev.feasible, "| violations:", sorted(ev.violations) or "none")


# greedy keeps each chain on the fastest VM with room, usually a single router
show("greedy allocation", greedy_allocate(env))
rng = np.random.default_rng(3)
show("random decoded action", env.decode_action(rng.uniform(-1, 1, env.action_dim)))
