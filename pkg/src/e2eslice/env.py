"""Partially observed slicing environment: observations, action decoding, reward."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import corenet, economics, radio
from .corenet import Placement, Routing
from .radio import IDLE, ChannelState, RadioAllocation
from .scenario import Scenario


@dataclass
class Allocation:
    assign: np.ndarray  # (I, K)
    power: np.ndarray  # (I, K)
    placement: np.ndarray  # (C, F, 2)
    routing: np.ndarray  # (C, F-1)

    @property
    def radio(self) -> RadioAllocation:
        return RadioAllocation(self.assign, self.power)

    def copy(self) -> "Allocation":
        return Allocation(self.assign.copy(), self.power.copy(), self.placement.copy(), self.routing.copy())

    def key(self) -> tuple:
        return (self.assign.tobytes(), self.power.tobytes(), self.placement.tobytes(), self.routing.tobytes())


@dataclass
class Evaluation:
    wc_rate: np.ndarray  # (C,) worst-case user rate
    slice_rate: np.ndarray  # (S,)
    admitted: np.ndarray  # (C,) bool, user holds a subchannel
    delays: dict  # component -> (C,)
    total_delay: np.ndarray
    usage: np.ndarray  # (C, L)
    revenue: np.ndarray
    cost_ran: np.ndarray
    cost_core: np.ndarray
    utility_per_slice: np.ndarray
    utility: float
    slacks: dict  # constraint -> slack array (negative = violated)
    structural_ok: bool

    @property
    def violations(self) -> dict:
        """Constraints with at least one negative slack."""
        out = {k: v for k, v in self.slacks.items() if v.size and np.min(v) < 0}
        if not self.structural_ok:
            out["structure"] = np.array([-1.0])
        return out

    @property
    def feasible(self) -> bool:
        return not self.violations

    @property
    def sum_rate(self) -> float:
        return float(self.slice_rate.sum())

    @property
    def total_cost(self) -> float:
        return float((self.cost_ran + self.cost_core).sum())


@dataclass
class StepOutcome:
    reward: float
    observation: np.ndarray
    evaluation: Evaluation
    penalty: float
    done: bool
    allocation: Allocation = field(repr=False)

    @property
    def violations(self) -> dict:
        return self.evaluation.violations


SOFT_CONSTRAINTS = ("C4", "C7", "C8")


class SlicingEnv:
    """One scenario, one RNG, one episode at a time.

    Action layout (all entries in [-1, 1]):
    ``[power (I*K) | user slots (I*K*U) | placement (C*F*N*V) | paths (C*(F-1)*P)]``
    where user slot 0 of every (BS, subchannel) is the idle choice and slots
    ``1..`` follow the BS's users in index order.
    """

    def __init__(self, scenario: Scenario, seed: int | None = None):
        self.scenario = scenario
        cfg = scenario.config
        r = scenario.radio
        self.I, self.C, self.K, self.S = r.num_bs, r.num_users, r.num_subchannels, r.num_slices
        self.N = scenario.graph.num_nodes
        self.V = cfg.vms_per_node
        self.L = scenario.graph.num_links
        self.P = scenario.paths.k_max
        self.F = max(len(ch) for ch in scenario.chains)
        self.bs_users = [np.flatnonzero(r.user_bs == i) for i in range(self.I)]
        self.U = max(len(u) for u in self.bs_users) + 1
        self.chain_len, self.q = corenet.chain_matrices(scenario.chains, r.user_slice, self.F)
        self.cycles = self.q.sum(axis=1)
        self.vm_cpu = scenario.vm_cpu
        self.vm_capacity = scenario.vm_capacity
        self.bandwidth = scenario.graph.bandwidths()
        self.link_prop = scenario.graph.prop_delays()
        dist = r.distances()
        self.user_distance = dist[r.user_bs, np.arange(self.C)]
        self.tau_user = scenario.tau_max_s[r.user_slice]
        self.reward_coef = cfg.reward_coef
        self.penalty_weight = cfg.penalty_weight
        self.episode_len = cfg.episode_len

        # slot table: slot_user[i, u] -> user id or IDLE, slot_valid masks padding
        self.slot_user = np.full((self.I, self.U), IDLE, dtype=int)
        for i, users in enumerate(self.bs_users):
            self.slot_user[i, 1:1 + len(users)] = users
        self.slot_valid = np.zeros((self.I, self.U), dtype=bool)
        self.slot_valid[:, 0] = True
        self.slot_valid[:, 1:] = self.slot_user[:, 1:] >= 0

        sizes = [self.I * self.K, self.I * self.K * self.U, self.C * self.F * self.N * self.V,
                 self.C * (self.F - 1) * self.P]
        edges = np.cumsum([0] + sizes)
        self._blocks = {name: slice(edges[n], edges[n + 1])
                        for n, name in enumerate(("power", "user", "place", "path"))}
        self.action_dim = int(edges[-1])
        self.ran_action_dim = sizes[0] + sizes[1]
        self.obs_dim = self.I * self.C * self.K + self.L + self.C + self.N

        self._rng = np.random.default_rng(seed)
        self._fit_normalizer(cfg.warmup_draws, seed)
        self.t = 0
        self.done = True
        self.channels: ChannelState | None = None
        self.w_real: np.ndarray | None = None
        self._history: list[tuple[np.ndarray, np.ndarray]] = []
        self.trace: list[dict] = []
        self._prev_load = np.zeros(self.L)
        self._prev_occ = np.zeros(self.N)

    # ------------------------------------------------------------------ observations
    def _fit_normalizer(self, draws: int, seed):
        rng = np.random.default_rng(None if seed is None else seed + 7919)
        r = self.scenario.radio
        draws = max(int(draws), 2)
        pg = radio.path_gain(r.distances(), r.ref_gain_db, r.path_loss_exponent, r.ref_distance_m)
        fading = rng.exponential(1.0, size=(draws, self.I, self.C, self.K))
        logg = np.log10(pg[None, :, :, None] * fading).reshape(draws, -1)
        self._g_mean = logg.mean(axis=0)
        self._g_std = logg.std(axis=0) + 1e-8
        d = self.scenario.demand
        w = rng.uniform(d.low, d.high, size=(draws, self.C))
        self._w_mean = w.mean(axis=0)
        self._w_std = w.std(axis=0) + 1e-8 * np.maximum(d.w_bar, 1.0)

    def _observe(self) -> np.ndarray:
        g = (np.log10(self.channels.gain2).ravel() - self._g_mean) / self._g_std
        links = 2.0 * (1.0 - self._prev_load / self.bandwidth) - 1.0
        w = (self.w_real - self._w_mean) / self._w_std
        node_cap = self.V * max(self.vm_capacity, 1)
        nodes = 2.0 * (1.0 - self._prev_occ / node_cap) - 1.0
        return np.concatenate([g, links, w, nodes])

    def split_observation(self, obs: np.ndarray):
        """(radio part, core part) of an observation; the core part has no channel gains."""
        n = self.I * self.C * self.K
        return obs[:n], obs[n:]

    def split_action(self, action: np.ndarray):
        return action[: self.ran_action_dim], action[self.ran_action_dim:]

    # ------------------------------------------------------------------ lifecycle
    def reset(self, seed: int | None = None) -> np.ndarray:
        if seed is not None:
            self._rng = np.random.default_rng(seed)
        self.t = 0
        self.done = False
        self._history = []
        self.trace = []
        self._prev_load = np.zeros(self.L)
        self._prev_occ = np.zeros(self.N)
        self._draw()
        self._obs = self._observe()
        return self._obs.copy()

    def _draw(self):
        self.channels = radio.realize_channels(self.scenario.radio, self._rng)
        self.w_real = self.scenario.demand.sample(self._rng)

    def observe_history(self, window: int) -> list[tuple[np.ndarray, np.ndarray]]:
        """Last ``window`` executed (observation, action) pairs, zero-padded in front."""
        real = self._history[-window:] if window > 0 else []
        pad = [(np.zeros(self.obs_dim), np.zeros(self.action_dim))] * (window - len(real))
        return pad + list(real)

    # ------------------------------------------------------------------ decoding
    def decode_action(self, action) -> Allocation:
        a = np.clip(np.asarray(action, dtype=float).ravel(), -1.0, 1.0)
        if a.size != self.action_dim:
            raise ValueError(f"action has {a.size} entries, expected {self.action_dim}")
        b = self._blocks
        pmax = self.scenario.radio.p_max_w
        power = (a[b["power"]].reshape(self.I, self.K) + 1.0) * 0.5 * pmax / self.K
        logits = np.where(self.slot_valid[:, None, :], a[b["user"]].reshape(self.I, self.K, self.U), -np.inf)
        slot = np.argmax(logits, axis=-1)
        assign = np.take_along_axis(self.slot_user, slot, axis=1)
        power = np.where(assign >= 0, power, 0.0)
        total = power.sum(axis=1, keepdims=True)
        power = np.where(total > pmax, power * (pmax / np.maximum(total, 1e-300)), power)

        place_logits = a[b["place"]].reshape(self.C, self.F, self.N * self.V)
        placement = np.full((self.C, self.F, 2), -1, dtype=int)
        occupancy = np.zeros(self.N * self.V, dtype=int)
        for c in range(self.C):
            for j in range(self.chain_len[c]):
                row = place_logits[c, j]
                idx = int(np.argmax(row))
                if occupancy[idx] >= self.vm_capacity:
                    row = np.where(occupancy < self.vm_capacity, row, -np.inf)
                    idx = int(np.argmax(row))
                occupancy[idx] += 1
                placement[c, j] = divmod(idx, self.V)

        routing = np.full((self.C, max(self.F - 1, 0)), -1, dtype=int)
        if self.F > 1:
            path_logits = a[b["path"]].reshape(self.C, self.F - 1, self.P)
            counts = self.scenario.paths.counts
            for c in range(self.C):
                for j in range(self.chain_len[c] - 1):
                    n = counts[placement[c, j, 0], placement[c, j + 1, 0]]
                    routing[c, j] = int(np.argmax(path_logits[c, j, :n]))
        return Allocation(assign, power, placement, routing)

    def encode_allocation(self, alloc: Allocation) -> np.ndarray:
        """An action vector that decodes back to ``alloc`` (powers up to projection)."""
        a = np.full(self.action_dim, -1.0)
        b = self._blocks
        pmax = self.scenario.radio.p_max_w
        a[b["power"]] = np.clip(alloc.power / (pmax / self.K) * 2.0 - 1.0, -1, 1).ravel()
        user = np.full((self.I, self.K, self.U), -1.0)
        for i in range(self.I):
            for k in range(self.K):
                u = alloc.assign[i, k]
                slot = 0 if u < 0 else int(np.flatnonzero(self.slot_user[i] == u)[0])
                user[i, k, slot] = 1.0
        a[b["user"]] = user.ravel()
        place = np.full((self.C, self.F, self.N * self.V), -1.0)
        path = np.full((self.C, max(self.F - 1, 0), self.P), -1.0)
        for c in range(self.C):
            for j in range(self.chain_len[c]):
                node, vm = alloc.placement[c, j]
                place[c, j, node * self.V + vm] = 1.0
            for j in range(self.chain_len[c] - 1):
                path[c, j, alloc.routing[c, j]] = 1.0
        a[b["place"]] = place.ravel()
        if self.F > 1:
            a[b["path"]] = path.ravel()
        return a

    # ------------------------------------------------------------------ evaluation
    def structural_check(self, alloc: Allocation) -> bool:
        """C1-C3, C5, C6 and VM capacity for the admitted users."""
        xi = alloc.radio.xi(self.C)
        if not radio.check_c1(xi, self.scenario.radio.user_bs):
            return False
        if np.any(radio.check_c2(xi) < 0):
            return False
        pmax = self.scenario.radio.p_max_w
        if np.any(radio.check_c3(alloc.power, alloc.assign, pmax) < -1e-9 * pmax):
            return False
        if np.any(alloc.power < 0):
            return False
        admitted = np.flatnonzero(xi.max(axis=(0, 2)) > 0)
        pl = Placement(alloc.placement)
        if not corenet.check_c5(pl, self.chain_len, admitted, self.N, self.V):
            return False
        if not corenet.check_c6(Routing(alloc.routing), pl, self.chain_len, admitted, self.scenario.paths):
            return False
        occ = corenet.vm_occupancy(pl, self.chain_len, admitted, self.N, self.V)
        return bool(np.all(occ <= self.vm_capacity))

    def evaluate(self, alloc: Allocation, channels: ChannelState | None = None,
                 w_real: np.ndarray | None = None) -> Evaluation:
        sc = self.scenario
        r = sc.radio
        channels = self.channels if channels is None else channels
        w_real = self.w_real if w_real is None else w_real
        ralloc = alloc.radio
        link = radio.worst_case_link_rates(ralloc, r, channels)
        wc = radio.user_rates(link, alloc.assign, self.C)
        srate = radio.slice_rates(wc, r.user_slice, self.S)
        admitted = np.zeros(self.C, dtype=bool)
        admitted[alloc.assign[alloc.assign >= 0]] = True
        structural = self.structural_check(alloc)

        placement = Placement(np.where(admitted[:, None, None], alloc.placement, 0))
        routing = Routing(np.where(admitted[:, None], alloc.routing, 0))
        core_len = np.where(admitted, self.chain_len, 0)
        if structural:
            usage = corenet.link_usage(placement, routing, core_len, sc.paths)
        else:
            usage = np.zeros((self.C, self.L))
        proc = np.where(admitted, corenet.processing_delay(placement, core_len, self.q,
                                                           sc.demand.packet_bits, self.vm_cpu), 0.0)
        cprop = corenet.core_prop_delay(usage, self.link_prop)
        ctrans = corenet.core_trans_delay(usage, w_real, self.bandwidth)
        rprop, rtrans = radio.ran_delays(admitted, self.user_distance, wc, sc.demand.packet_bits)
        total = corenet.e2e_delay(proc, cprop, ctrans, rprop, rtrans)

        _, s4 = radio.check_c4(srate, sc.r_min_bpshz, r.subchannel_bw_hz)
        _, s7 = corenet.check_c7(total, self.tau_user)
        s7 = s7[admitted]
        _, s8 = corenet.check_c8(usage, admitted, sc.demand, self.bandwidth)

        rev = economics.revenue(srate, sc.prices)
        cran = economics.cost_ran(alloc.assign, alloc.power, r.user_slice, sc.prices, self.S)
        ccore = economics.cost_core(admitted, sc.demand.packet_bits, self.cycles * 1.0, usage,
                                    r.user_slice, sc.prices, self.S)
        per_slice, total_u = economics.utility(rev, cran + ccore, sc.prices.theta1, sc.prices.theta2)
        return Evaluation(
            wc_rate=wc, slice_rate=srate, admitted=admitted,
            delays=dict(proc_core=proc, prop_core=cprop, trans_core=ctrans, prop_ran=rprop, trans_ran=rtrans),
            total_delay=total, usage=usage, revenue=rev, cost_ran=cran, cost_core=ccore,
            utility_per_slice=per_slice, utility=total_u,
            slacks={"C4": s4, "C7": s7, "C8": s8}, structural_ok=structural)

    def penalty(self, ev: Evaluation) -> float:
        """Normalised shortfall on the soft constraints C4, C7 and C8."""
        sc = self.scenario
        c4_scale = np.maximum(sc.r_min_bpshz * sc.radio.subchannel_bw_hz, 1.0)
        total = (np.maximum(0.0, -ev.slacks["C4"]) / c4_scale).sum()
        # delay overruns are scaled by the delay itself, so each user adds at most 1
        late = ev.slacks["C7"] < 0
        delay = ev.total_delay[ev.admitted][late]
        total += np.sum(1.0 - self.tau_user[ev.admitted][late] / delay)
        total += (np.maximum(0.0, -ev.slacks["C8"]) / self.bandwidth).sum()
        if not ev.structural_ok:
            total += 1.0
        return float(self.penalty_weight * total)

    def reward_of(self, ev: Evaluation) -> tuple[float, float]:
        pen = self.penalty(ev)
        return self.reward_coef * ev.utility - pen, pen

    # ------------------------------------------------------------------ stepping
    def step(self, action) -> StepOutcome:
        if self.done:
            raise RuntimeError("episode finished; call reset()")
        if isinstance(action, Allocation):
            alloc = action
            vec = self.encode_allocation(alloc)
        else:
            vec = np.clip(np.asarray(action, float).ravel(), -1.0, 1.0)
            alloc = self.decode_action(vec)
        ev = self.evaluate(alloc)
        reward, pen = self.reward_of(ev)
        self._history.append((self._obs.copy(), vec))
        self.trace.append({
            "t": self.t, "reward": reward, "utility": ev.utility, "sum_rate": ev.sum_rate,
            "cost": ev.total_cost, "admitted": int(ev.admitted.sum()),
            **{f"slack_{k}": float(np.min(v)) if v.size else 0.0 for k, v in ev.slacks.items()},
        })
        self._prev_load = corenet.robust_link_load(ev.usage, ev.admitted, self.scenario.demand)
        occ = corenet.vm_occupancy(Placement(alloc.placement), np.where(ev.admitted, self.chain_len, 0),
                                   np.flatnonzero(ev.admitted), self.N, self.V) if ev.structural_ok else 0
        self._prev_occ = np.sum(occ, axis=1) if ev.structural_ok else np.zeros(self.N)
        self.t += 1
        self.done = self.t >= self.episode_len
        self._draw()
        self._obs = self._observe()
        return StepOutcome(reward, self._obs.copy(), ev, pen, self.done, alloc)

    def export_trace(self, path: str | Path) -> None:
        if not self.trace:
            raise ValueError("no steps recorded")
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(self.trace[0]))
            writer.writeheader()
            writer.writerows(self.trace)
