"""Parameter sweeps and control-signalling overhead.

A sweep re-runs an algorithm for every value on one axis (users, demand or
CSI uncertainty, deadline, rate floor) and several seeds, then writes one CSV
per axis. The greedy heuristic needs no training, so it makes a quick demo.
The same sweeps are available from the shell as ``slice sim``.
"""
import tempfile
from pathlib import Path

import numpy as np

from e2eslice import preset
from e2eslice.overhead import signaling_overhead
from e2eslice.sweep import run_sweep

out = Path(tempfile.mkdtemp())
cfg = preset("desk")

for axis, values in (("delay", (0.06, 0.1, 0.3, 0.5)), ("csi", (0.0, 0.04, 0.1))):
    rows = run_sweep(cfg, axis, ["greedy"], seeds=[1, 2], out_dir=out, values=values, eval_episodes=2)
    print(f"axis {axis}:")
    for v in values:
        pick = [r for r in rows if r["value"] == v]
        print(f"  {v:<5g} utility {np.mean([r['utility'] for r in pick]):7.2f}  "
              f"admitted {np.mean([r['admitted'] for r in pick]):.2f}  "
              f"sum rate {np.mean([r['sum_rate'] for r in pick]) / 1e3:7.1f} kbps")
    print(f"  -> {out / f'sweep_{axis}.csv'}")

# how many bits of state each decision maker has to collect per slot
for name in ("desk", "paper"):
    o = signaling_overhead(preset(name))
    print(f"{name:5s} preset: RAN {o.ran_bits} bits + core {o.core_bits} bits = {o.total_bits} bits centralised; "
          f"the distributed agents each see only their own part")
