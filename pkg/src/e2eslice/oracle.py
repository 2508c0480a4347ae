"""Exhaustive solver for tiny instances, used as ground truth in tests.

Powers are restricted to a grid of fractions of ``P_max/K``. Everything else
(subchannel owners, VM per VNF, candidate path per virtual hop) is searched
exactly. The radio part is enumerated outright; for each radio choice the core
part is the cheapest product of per-user options that passes the delay,
robust link-capacity and VM-capacity checks.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import corenet, economics, radio
from .corenet import Placement, Routing
from .env import Allocation, SlicingEnv
from .radio import IDLE

DEFAULT_LEVELS = (0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0)
MAX_SEARCH_SPACE = 10 ** 7
LIMITS = {"I": 2, "C": 3, "K": 3, "levels": 4, "N": 4, "V": 2, "F": 2}
_TIE_RTOL = 1e-12


class InstanceTooLarge(ValueError):
    pass


@dataclass
class OracleResult:
    allocation: Allocation
    utility: float
    feasible: bool
    radio_choices: int  # radio combinations enumerated
    feasible_count: int  # radio combinations with at least one feasible core completion


@dataclass
class _CoreOption:
    vm: tuple  # ((node, vm), ...) per VNF
    paths: tuple  # candidate index per virtual hop
    usage: np.ndarray  # (L,)
    core_delay: float  # processing + core propagation + core transmission
    cost: float


def _core_options(env: SlicingEnv, user: int, w_real) -> list[_CoreOption]:
    sc = env.scenario
    n_len = int(env.chain_len[user])
    vms = [divmod(i, env.V) for i in range(env.N * env.V)]
    one = np.zeros(env.C, dtype=bool)
    one[user] = True
    out = []
    for placed in itertools.product(vms, repeat=n_len):
        hop_counts = [sc.paths.counts[placed[j][0], placed[j + 1][0]] for j in range(n_len - 1)]
        for paths in itertools.product(*(range(int(n)) for n in hop_counts)):
            vm = np.zeros((env.C, env.F, 2), dtype=int)
            vm[user, :n_len] = placed
            route = np.zeros((env.C, max(env.F - 1, 0)), dtype=int)
            route[user, : n_len - 1] = paths
            length = np.where(one, env.chain_len, 0)
            usage = corenet.link_usage(Placement(vm), Routing(route), length, sc.paths)
            proc = corenet.processing_delay(Placement(vm), length, env.q, sc.demand.packet_bits, env.vm_cpu)
            cprop = corenet.core_prop_delay(usage, env.link_prop)
            ctrans = corenet.core_trans_delay(usage, w_real, env.bandwidth)
            cost = economics.cost_core(one, sc.demand.packet_bits, env.cycles * 1.0, usage,
                                       sc.user_slice, sc.prices, env.S).sum()
            out.append(_CoreOption(tuple(placed), tuple(paths), usage[user],
                                   float(proc[user] + cprop[user] + ctrans[user]), float(cost)))
    return out


def _radio_options(env: SlicingEnv, levels) -> list[list[tuple[int, float]]]:
    """Per BS, the ordered per-subchannel choices: idle first, then (user, level) pairs."""
    unit = env.scenario.radio.p_max_w / env.K
    return [[(IDLE, 0.0)] + [(int(u), lv * unit) for u in users for lv in levels] for users in env.bs_users]


def search_space_size(env: SlicingEnv, levels=DEFAULT_LEVELS, core_counts=None) -> int:
    per_bs = [len(opts) ** env.K for opts in _radio_options(env, levels)]
    size = int(np.prod(per_bs, dtype=object))
    if core_counts is not None:
        size *= int(np.prod([int(n) for n in core_counts], dtype=object))
    return size


def check_bounds(env: SlicingEnv, levels=DEFAULT_LEVELS) -> None:
    dims = {"I": env.I, "C": env.C, "K": env.K, "levels": len(levels), "N": env.N, "V": env.V, "F": env.F}
    for name, value in dims.items():
        if value > LIMITS[name]:
            raise InstanceTooLarge(f"{name} = {value} exceeds the oracle limit {LIMITS[name]}")


def _best_core(env: SlicingEnv, users, options, budgets, demand_load, capacity):
    """Cheapest joint core choice for ``users``; returns (cost, choice per user) or None."""
    kept = []
    for u, b in zip(users, budgets):
        idx = [n for n, o in enumerate(options[u]) if o.core_delay <= b]
        if not idx:
            return None
        kept.append(idx)
    if not users:
        return 0.0, ()
    grids = np.meshgrid(*[np.arange(len(k)) for k in kept], indexing="ij")
    combos = np.stack([g.ravel() for g in grids], axis=1)  # lexicographic order
    n = len(combos)
    cost = np.zeros(n)
    load = np.zeros((n, env.L))
    occ = np.zeros((n, env.N * env.V), dtype=int)
    for col, (u, idx) in enumerate(zip(users, kept)):
        opts = [options[u][i] for i in idx]
        cost += np.array([o.cost for o in opts])[combos[:, col]]
        load += demand_load[u] * np.array([o.usage for o in opts])[combos[:, col]]
        flat = np.zeros((len(opts), env.N * env.V), dtype=int)
        for r, o in enumerate(opts):
            for node, vm in o.vm:
                flat[r, node * env.V + vm] += 1
        occ += flat[combos[:, col]]
    ok = np.all(load <= env.bandwidth, axis=1) & np.all(occ <= capacity, axis=1)
    if not ok.any():
        return None
    masked = np.where(ok, cost, np.inf)
    best = int(np.argmin(masked))
    return float(masked[best]), tuple(kept[col][combos[best, col]] for col in range(len(users)))


def _build(env: SlicingEnv, assign, power, users, choice, options) -> Allocation:
    placement = np.full((env.C, env.F, 2), -1, dtype=int)
    routing = np.full((env.C, max(env.F - 1, 0)), -1, dtype=int)
    for u, i in zip(users, choice):
        o = options[u][i]
        placement[u, : len(o.vm)] = o.vm
        routing[u, : len(o.paths)] = o.paths
    return Allocation(assign.copy(), power.copy(), placement, routing)


def enumerate_optimal(env: SlicingEnv, levels=DEFAULT_LEVELS, channels=None, w_real=None,
                      max_space: int = MAX_SEARCH_SPACE) -> OracleResult:
    """Best allocation satisfying C1-C8 for the current slot of ``env``.

    Ties keep the first allocation in enumeration order. When nothing is
    feasible the empty allocation is returned with ``feasible=False``.
    """
    check_bounds(env, levels)
    sc = env.scenario
    r = sc.radio
    channels = env.channels if channels is None else channels
    w_real = env.w_real if w_real is None else w_real
    if channels is None or w_real is None:
        raise ValueError("environment has no channel state; call reset() first")
    options = [_core_options(env, c, w_real) for c in range(env.C)]
    size = search_space_size(env, levels, [len(o) for o in options])
    if size > max_space:
        raise InstanceTooLarge(f"search space {size} exceeds {max_space}")

    demand_load = sc.demand.w_bar * (1.0 + sc.demand.w_hat_frac)
    per_bs = [list(itertools.product(opts, repeat=env.K)) for opts in _radio_options(env, levels)]
    floor_ok_scale = sc.r_min_bpshz
    candidates = []  # (score, order, allocation)
    best_score = -np.inf
    n_radio = n_feasible = 0
    for order, combo in enumerate(itertools.product(*per_bs)):
        n_radio += 1
        assign = np.array([[u for u, _ in row] for row in combo], dtype=int).reshape(env.I, env.K)
        power = np.array([[p for _, p in row] for row in combo], dtype=float).reshape(env.I, env.K)
        ralloc = radio.RadioAllocation(assign, power)
        wc = radio.user_rates(radio.worst_case_link_rates(ralloc, r, channels), assign, env.C)
        srate = radio.slice_rates(wc, r.user_slice, env.S)
        if not radio.check_c4(srate, floor_ok_scale, r.subchannel_bw_hz)[0].all():
            continue
        admitted = np.zeros(env.C, dtype=bool)
        admitted[assign[assign >= 0]] = True
        rprop, rtrans = radio.ran_delays(admitted, env.user_distance, wc, sc.demand.packet_bits)
        users = [int(u) for u in np.flatnonzero(admitted)]
        budgets = [env.tau_user[u] - (rprop[u] + rtrans[u]) for u in users]
        core = _best_core(env, users, options, budgets, demand_load, env.vm_capacity)
        if core is None:
            continue
        n_feasible += 1
        rev = economics.revenue(srate, sc.prices).sum()
        cran = economics.cost_ran(assign, power, r.user_slice, sc.prices, env.S).sum()
        score = sc.prices.theta1 * rev - sc.prices.theta2 * (cran + core[0])
        if score >= best_score - _TIE_RTOL * abs(best_score) or not candidates:
            candidates.append((score, order, _build(env, assign, power, users, core[1], options)))
            best_score = max(best_score, score)
            candidates = [c for c in candidates if c[0] >= best_score - _TIE_RTOL * abs(best_score)]

    # exact tie resolution with the environment's own arithmetic
    best = None
    for score, order, alloc in candidates:
        ev = env.evaluate(alloc, channels, w_real)
        if not ev.feasible:
            continue
        if best is None or ev.utility > best[0]:
            best = (ev.utility, alloc)
    if best is None:
        from .agents.greedy import empty_allocation
        empty = empty_allocation(env)
        ev = env.evaluate(empty, channels, w_real)
        return OracleResult(empty, ev.utility, False, n_radio, n_feasible)
    return OracleResult(best[1], best[0], True, n_radio, n_feasible)


def iter_feasible(env: SlicingEnv, levels=DEFAULT_LEVELS, channels=None, w_real=None):
    """Every allocation on the power grid that the environment judges feasible.

    Radio choices missing a slice-rate floor are skipped before the core part
    is expanded; everything else gets one full evaluation, so this is slow by
    design and meant for checking :func:`enumerate_optimal` on the smallest
    instances.
    """
    channels = env.channels if channels is None else channels
    w_real = env.w_real if w_real is None else w_real
    sc = env.scenario
    options = [_core_options(env, c, w_real) for c in range(env.C)]
    per_bs = [list(itertools.product(opts, repeat=env.K)) for opts in _radio_options(env, levels)]
    for combo in itertools.product(*per_bs):
        assign = np.array([[u for u, _ in row] for row in combo], dtype=int).reshape(env.I, env.K)
        power = np.array([[p for _, p in row] for row in combo], dtype=float).reshape(env.I, env.K)
        # the slice-rate floor depends on the radio part only
        wc = radio.user_rates(radio.worst_case_link_rates(radio.RadioAllocation(assign, power), sc.radio,
                                                          channels), assign, env.C)
        srate = radio.slice_rates(wc, sc.radio.user_slice, env.S)
        if not radio.check_c4(srate, sc.r_min_bpshz, sc.radio.subchannel_bw_hz)[0].all():
            continue
        users = sorted({int(u) for u in assign.ravel() if u >= 0})
        for choice in itertools.product(*(range(len(options[u])) for u in users)):
            alloc = _build(env, assign, power, users, choice, options)
            ev = env.evaluate(alloc, channels, w_real)
            if ev.feasible:
                yield alloc, ev
