"""Perfect versus worst-case downlink rates as the CSI error bound grows.

Builds the desk-scale scenario, draws one channel realisation, decodes a random
allocation and prints each served user's rate for a few error bounds. The
worst-case rate shrinks the desired gain and inflates every interferer, so it
can only fall as the bound widens.
"""
import numpy as np

from e2eslice import SlicingEnv, generate_scenario, preset
from e2eslice import radio

cfg = preset("desk")
env = SlicingEnv(generate_scenario(cfg, seed=1), seed=1)
env.reset(1)
sc = env.scenario.radio

rng = np.random.default_rng(7)
alloc = env.decode_action(rng.uniform(-1, 1, env.action_dim)).radio
print("subchannel owners per BS (-1 idle):")
print(alloc.assign)
print("power per subchannel (W):")
print(np.round(alloc.power, 3))

ch = env.channels
perfect = radio.user_rates(radio.link_rates(alloc, sc, ch.gain2), alloc.assign, env.C)
served = np.flatnonzero(perfect > 0)

print("\nrate in kbps per served user")
print("bound " + " ".join(f"{'user' + str(u):>7}" for u in served))
for gamma in (0.0, 0.02, 0.05, 0.10, 0.20):
    est = radio.ChannelState(ch.h_est, gamma)
    wc = radio.user_rates(radio.worst_case_link_rates(alloc, sc, est), alloc.assign, env.C)
    print(f"{gamma:5.2f} " + " ".join(f"{wc[u] / 1e3:7.1f}" for u in served))

# slice totals against the floors R_min * B_k
floor = env.scenario.r_min_bpshz * sc.subchannel_bw_hz
srate = radio.slice_rates(perfect, sc.user_slice, env.S)
for s in range(env.S):
    status = "met" if srate[s] >= floor[s] else "missed"
    print(f"slice {s}: {srate[s] / 1e3:8.1f} kbps vs floor {floor[s] / 1e3:.1f} kbps ({status})")
