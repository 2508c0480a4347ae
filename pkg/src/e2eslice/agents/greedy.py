"""Deterministic admission heuristic used as the non-learning baseline."""
from __future__ import annotations

import numpy as np

from ..env import Allocation, Evaluation, SlicingEnv


def empty_allocation(env: SlicingEnv) -> Allocation:
    return Allocation(
        assign=np.full((env.I, env.K), -1, dtype=int),
        power=np.zeros((env.I, env.K)),
        placement=np.full((env.C, env.F, 2), -1, dtype=int),
        routing=np.full((env.C, max(env.F - 1, 0)), -1, dtype=int))


def _acceptable(env: SlicingEnv, ev: Evaluation, before: Evaluation | None, user: int) -> bool:
    sc = env.scenario
    floor = sc.r_min_bpshz * sc.radio.subchannel_bw_hz
    if ev.slice_rate[sc.user_slice[user]] < floor[sc.user_slice[user]]:
        return False
    if before is not None:
        met = before.slice_rate >= floor
        if np.any(met & (ev.slice_rate < floor)):
            return False
    if ev.slacks["C7"].size and np.min(ev.slacks["C7"]) < 0:
        return False
    if np.min(ev.slacks["C8"]) < 0:
        return False
    return ev.structural_ok


def greedy_allocate(env: SlicingEnv, channels=None, w_real=None) -> Allocation:
    """Admit users one at a time in decreasing order of slice revenue rate.

    A user gets the free subchannel with the best estimated gain at its BS at
    power ``P_max/K``. Its VNFs go to the VM with room that adds the least
    processing delay (ties: least loaded, then lowest index) and each virtual
    hop takes the first candidate path. The user is rolled back when its
    slice misses the rate floor once it joins, when a slice that met its
    floor would drop below it, or when any delay or robust link-capacity
    check fails.
    """
    sc = env.scenario
    channels = env.channels if channels is None else channels
    w_real = env.w_real if w_real is None else w_real
    gain2 = channels.gain2
    price = np.asarray(sc.prices.rev_per_mbps)[sc.user_slice]
    order = sorted(range(env.C), key=lambda c: (-price[c], c))
    pmax = sc.radio.p_max_w
    alloc = empty_allocation(env)
    occupancy = np.zeros(env.N * env.V, dtype=int)
    cpu = env.vm_cpu.ravel()
    before = None
    for c in order:
        i = sc.radio.user_bs[c]
        free = np.flatnonzero(alloc.assign[i] < 0)
        if free.size == 0:
            continue
        k = free[np.argmax(gain2[i, c, free])]
        trial = alloc.copy()
        trial.assign[i, k] = c
        trial.power[i, k] = pmax / env.K
        occ = occupancy.copy()
        placed = True
        for j in range(env.chain_len[c]):
            room = np.flatnonzero(occ < env.vm_capacity)
            if room.size == 0:
                placed = False
                break
            delay = sc.demand.packet_bits[c] * env.q[c, j] / cpu[room]
            idx = room[np.lexsort((room, occ[room], delay))[0]]
            occ[idx] += 1
            trial.placement[c, j] = divmod(int(idx), env.V)
        if not placed:
            continue
        for j in range(env.chain_len[c] - 1):
            trial.routing[c, j] = 0
        ev = env.evaluate(trial, channels, w_real)
        if _acceptable(env, ev, before, c):
            alloc, occupancy, before = trial, occ, ev
    return alloc
