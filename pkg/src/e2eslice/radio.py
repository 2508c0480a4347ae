"""Downlink OFDMA radio model: channels, SINR, worst-case rates, RAN delays.

Array conventions used throughout the package:

* channel gains ``h`` have shape ``(I, C, K)`` -- BS ``i`` to user ``c`` on
  subchannel ``k``;
* an allocation stores ``assign`` with shape ``(I, K)`` (user index, ``-1`` for
  an idle subchannel) and ``power`` with shape ``(I, K)`` in watts.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .topology import SPEED_OF_LIGHT

IDLE = -1


def dbm_to_watt(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


@dataclass(frozen=True)
class RadioScenario:
    bs_positions: np.ndarray  # (I, 2) metres
    user_positions: np.ndarray  # (C, 2)
    user_slice: np.ndarray  # (C,) slice index
    user_bs: np.ndarray  # (C,) serving BS
    num_subchannels: int
    subchannel_bw_hz: float = 20e3
    noise_psd_dbm_hz: float = -174.0
    p_max_w: float = 4.0
    gamma: float = 0.0
    num_slices: int = 3
    path_loss_exponent: float = 3.5
    ref_gain_db: float = -38.0
    ref_distance_m: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError("gamma must lie in [0, 1)")
        if len(self.user_slice) != len(self.user_positions) or len(self.user_bs) != len(self.user_positions):
            raise ValueError("user arrays disagree in length")
        if np.any(self.user_bs < 0) or np.any(self.user_bs >= len(self.bs_positions)):
            raise ValueError("user_bs out of range")

    @property
    def num_bs(self) -> int:
        return len(self.bs_positions)

    @property
    def num_users(self) -> int:
        return len(self.user_positions)

    @property
    def total_bw_hz(self) -> float:
        return self.num_subchannels * self.subchannel_bw_hz

    @property
    def noise_power_w(self) -> float:
        """Noise power over one subchannel."""
        return dbm_to_watt(self.noise_psd_dbm_hz) * self.subchannel_bw_hz

    def distances(self) -> np.ndarray:
        """(I, C) BS-user distances, clamped to 1 m."""
        d = np.linalg.norm(self.bs_positions[:, None, :] - self.user_positions[None, :, :], axis=-1)
        return np.maximum(d, 1.0)

    def association(self) -> np.ndarray:
        """delta[i, c] = 1 iff user c is attached to BS i."""
        delta = np.zeros((self.num_bs, self.num_users), dtype=np.int8)
        delta[self.user_bs, np.arange(self.num_users)] = 1
        return delta

    def with_gamma(self, gamma: float) -> "RadioScenario":
        from dataclasses import replace
        return replace(self, gamma=gamma)


def path_gain(d, ref_gain_db: float = -38.0, exponent: float = 3.5, ref_distance: float = 1.0):
    d = np.maximum(np.asarray(d, dtype=float), 1.0)
    return 10.0 ** (ref_gain_db / 10.0) * (d / ref_distance) ** (-exponent)


@dataclass(frozen=True)
class ChannelState:
    h_est: np.ndarray  # complex (I, C, K)
    gamma: float

    @property
    def gain2(self) -> np.ndarray:
        return np.abs(self.h_est) ** 2


def realize_channels(scenario: RadioScenario, rng) -> ChannelState:
    """Rayleigh block fading on top of log-distance path loss."""
    rng = np.random.default_rng(rng)
    I, C, K = scenario.num_bs, scenario.num_users, scenario.num_subchannels
    g = (rng.standard_normal((I, C, K)) + 1j * rng.standard_normal((I, C, K))) / np.sqrt(2.0)
    pg = path_gain(scenario.distances(), scenario.ref_gain_db,
                   scenario.path_loss_exponent, scenario.ref_distance_m)
    return ChannelState(np.sqrt(pg)[:, :, None] * g, scenario.gamma)


@dataclass
class RadioAllocation:
    assign: np.ndarray  # (I, K) int, IDLE or user index
    power: np.ndarray  # (I, K) watts

    def xi(self, num_users: int) -> np.ndarray:
        """Binary tensor (I, C, K) with xi[i, c, k] = 1 iff BS i gives k to c."""
        I, K = self.assign.shape
        xi = np.zeros((I, num_users, K), dtype=np.int8)
        ii, kk = np.nonzero(self.assign >= 0)
        xi[ii, self.assign[ii, kk], kk] = 1
        return xi


def _link_rates(assign, power, gain2, noise_w, bw_hz, signal_scale=1.0, interf_scale=1.0):
    """Rate (I, K) of the user scheduled on each (BS, subchannel); 0 when idle."""
    I, K = assign.shape
    active = assign >= 0
    users = np.where(active, assign, 0)
    p = np.where(active, power, 0.0)
    kk = np.arange(K)[None, :]
    # g_to[i, k, j]: gain from BS j to the user scheduled at (i, k)
    g_to = gain2[:, users, kk]  # (J, I, K)
    g_to = np.moveaxis(g_to, 0, -1)  # (I, K, J)
    rx = g_to * p.T[None, :, :]  # power received from BS j on k
    own_bs = np.eye(I, dtype=bool)[:, None, :]  # (I, 1, J)
    own = np.where(own_bs, rx, 0.0).sum(axis=-1)
    # summing only the other BSs avoids cancellation when the signal dominates
    interference = np.where(own_bs, 0.0, rx).sum(axis=-1)
    sinr = signal_scale * own / (interf_scale * interference + noise_w)
    return np.where(active, bw_hz * np.log2(1.0 + sinr), 0.0)


def link_rates(alloc: RadioAllocation, scenario: RadioScenario, gain2: np.ndarray) -> np.ndarray:
    """Per-(BS, subchannel) rate with the given true channel powers ``|h|^2``."""
    return _link_rates(alloc.assign, alloc.power, gain2, scenario.noise_power_w,
                       scenario.subchannel_bw_hz)


def worst_case_link_rates(alloc: RadioAllocation, scenario: RadioScenario, ch: ChannelState) -> np.ndarray:
    """Per-(BS, subchannel) rate minimised over the CSI error box.

    The rate grows with the desired magnitude and shrinks with every
    interfering magnitude, so the box minimum sits at ``(1-G)|h~|`` for the
    signal and ``(1+G)|h~'|`` for each interferer.
    """
    g = ch.gamma
    return _link_rates(alloc.assign, alloc.power, ch.gain2, scenario.noise_power_w,
                       scenario.subchannel_bw_hz, (1.0 - g) ** 2, (1.0 + g) ** 2)


def sinr_and_rate(alloc: RadioAllocation, gain2: np.ndarray, scenario: RadioScenario,
                  i: int, k: int, user: int) -> float:
    """Rate of ``user`` on subchannel ``k`` of BS ``i`` for true gains ``gain2``."""
    if alloc.assign[i, k] != user or scenario.user_bs[user] != i:
        return 0.0
    signal = alloc.power[i, k] * gain2[i, user, k]
    interference = sum(alloc.power[j, k] * gain2[j, user, k]
                       for j in range(scenario.num_bs) if j != i and alloc.assign[j, k] >= 0)
    return float(scenario.subchannel_bw_hz * np.log2(1.0 + signal / (interference + scenario.noise_power_w)))


def user_rates(link_rate: np.ndarray, assign: np.ndarray, num_users: int) -> np.ndarray:
    """Sum per-(BS, subchannel) rates into per-user rates."""
    out = np.zeros(num_users)
    active = assign >= 0
    np.add.at(out, assign[active], link_rate[active])
    return out


def worst_case_rate(alloc: RadioAllocation, ch: ChannelState, scenario: RadioScenario, user: int) -> float:
    rates = worst_case_link_rates(alloc, scenario, ch)
    return float(user_rates(rates, alloc.assign, scenario.num_users)[user])


def slice_rates(per_user: np.ndarray, user_slice: np.ndarray, num_slices: int) -> np.ndarray:
    return np.bincount(user_slice, weights=per_user, minlength=num_slices).astype(float)


def check_c1(xi: np.ndarray, user_bs: np.ndarray) -> bool:
    """Each user is only ever served by its own BS (single slice by construction)."""
    I = xi.shape[0]
    delta = np.zeros((I, len(user_bs)), dtype=bool)
    delta[user_bs, np.arange(len(user_bs))] = True
    return bool(np.all(xi[~delta] == 0))


def check_c2(xi: np.ndarray) -> np.ndarray:
    """Slack per (BS, subchannel): 1 - number of users on it."""
    return 1 - xi.sum(axis=1)


def check_c3(power: np.ndarray, assign: np.ndarray, p_max: float) -> np.ndarray:
    """Slack per BS: P_max minus the total power on assigned subchannels."""
    return p_max - np.where(assign >= 0, power, 0.0).sum(axis=1)


def check_c4(slice_rate: np.ndarray, r_min_bpshz: np.ndarray, subchannel_bw_hz: float):
    """Per-slice (passed, slack) with R_min given in bps/Hz."""
    slack = np.asarray(slice_rate, float) - np.asarray(r_min_bpshz, float) * subchannel_bw_hz
    return slack >= 0, slack


def ran_delays(served: np.ndarray, distance_m: np.ndarray, wc_rate: np.ndarray, packet_bits: np.ndarray):
    """Propagation and transmission delay per user (seconds).

    ``served`` flags users holding at least one subchannel; ``distance_m`` is
    the distance to the serving BS; ``wc_rate`` the worst-case user rate.
    A zero rate gives zero transmission delay, following the piecewise
    definition; such a user is caught by the slice-rate floor instead.
    """
    prop = np.where(served, distance_m / SPEED_OF_LIGHT, 0.0)
    safe = np.where(wc_rate > 0, wc_rate, 1.0)
    trans = np.where(served & (wc_rate > 0), packet_bits / safe, 0.0)
    return prop, trans
