"""Revenue, cost and utility of the infrastructure provider."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PriceBook:
    rev_per_mbps: tuple[float, ...] = (1.0, 1.0, 1.0)  # per slice, $/Mbps
    ran_cost: float = 1e-4  # $ per watt on a subchannel
    node_cost: float = 1e-9  # $/cycle
    link_cost: float = 1e-8  # $/bit per traversed link
    theta1: float = 60.0
    theta2: float = 1.0

    def __post_init__(self):
        values = (*self.rev_per_mbps, self.ran_cost, self.node_cost, self.link_cost, self.theta1, self.theta2)
        if any(v < 0 for v in values):
            raise ValueError("prices and scaling factors must be non-negative")


def revenue(slice_rate_bps: np.ndarray, prices: PriceBook) -> np.ndarray:
    return np.asarray(prices.rev_per_mbps, float) * (np.asarray(slice_rate_bps, float) / 1e6)


def cost_ran(assign: np.ndarray, power: np.ndarray, user_slice: np.ndarray,
             prices: PriceBook, num_slices: int) -> np.ndarray:
    """Transmit-power cost per slice over all assigned subchannels."""
    active = assign >= 0
    slices = user_slice[assign[active]]
    return np.bincount(slices, weights=power[active] * prices.ran_cost, minlength=num_slices).astype(float)


def cost_core(admitted: np.ndarray, packet_bits: np.ndarray, cycles: np.ndarray, usage: np.ndarray,
              user_slice: np.ndarray, prices: PriceBook, num_slices: int) -> np.ndarray:
    """Node plus link cost per slice for admitted users.

    ``cycles[c]`` is the summed cycles/bit over user c's chain and
    ``usage[c, l]`` the number of times the chain crosses link l.
    """
    node = packet_bits * cycles * prices.node_cost
    link = packet_bits * usage.sum(axis=1) * prices.link_cost
    per_user = np.where(admitted, node + link, 0.0)
    return np.bincount(user_slice, weights=per_user, minlength=num_slices).astype(float)


def utility(rev: np.ndarray, cost: np.ndarray, theta1: float = 60.0, theta2: float = 1.0):
    """Per-slice utility and its total."""
    per_slice = theta1 * np.asarray(rev, float) - theta2 * np.asarray(cost, float)
    return per_slice, float(per_slice.sum())
