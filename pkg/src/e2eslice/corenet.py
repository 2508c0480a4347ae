"""Service function chains in the core: placement, routing, delays, C5-C8."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .topology import PathTable

VNF_TYPES = ("NAT", "FW", "TM", "WOC", "IDPS", "VOC")


@dataclass(frozen=True)
class SfcChain:
    slice_id: int
    vnfs: tuple[str, ...]
    cycles_per_bit: tuple[float, ...]

    def __post_init__(self):
        if not self.vnfs:
            raise ValueError("a chain needs at least one VNF")
        if len(self.vnfs) != len(self.cycles_per_bit):
            raise ValueError("one processing requirement per VNF")

    def __len__(self):
        return len(self.vnfs)


@dataclass(frozen=True)
class DemandSpec:
    w_bar: np.ndarray  # (C,) nominal rate, bits/s
    w_hat_frac: float  # relative deviation
    packet_bits: np.ndarray  # (C,) w'

    def __post_init__(self):
        if not 0.0 <= self.w_hat_frac < 1.0:
            raise ValueError("w_hat_frac must lie in [0, 1)")

    @property
    def low(self) -> np.ndarray:
        return self.w_bar * (1.0 - self.w_hat_frac)

    @property
    def high(self) -> np.ndarray:
        return self.w_bar * (1.0 + self.w_hat_frac)

    def sample(self, rng) -> np.ndarray:
        return np.random.default_rng(rng).uniform(self.low, self.high)


@dataclass
class Placement:
    """``vm[c, j] = (node, vm)`` hosting VNF ``j`` of user ``c``; ``-1`` pads short chains."""
    vm: np.ndarray  # (C, F, 2) int


@dataclass
class Routing:
    """``path[c, j]`` indexes the candidate path from VNF j's node to VNF j+1's node."""
    path: np.ndarray  # (C, F-1) int


def chain_matrices(chains: list[SfcChain], user_slice: np.ndarray, f_max: int):
    """Per-user chain length and padded cycles/bit table ``q[c, j]``."""
    C = len(user_slice)
    length = np.array([len(chains[s]) for s in user_slice], dtype=int)
    q = np.zeros((C, f_max))
    for c, s in enumerate(user_slice):
        q[c, : len(chains[s])] = chains[s].cycles_per_bit
    return length, q


def check_c5(placement: Placement, chain_len: np.ndarray, users: np.ndarray,
             num_nodes: int, vms_per_node: int) -> bool:
    """Every VNF of every listed user sits on exactly one valid VM."""
    for c in users:
        for j in range(chain_len[c]):
            b, v = placement.vm[c, j]
            if not (0 <= b < num_nodes and 0 <= v < vms_per_node):
                return False
    return True


def check_c6(routing: Routing, placement: Placement, chain_len: np.ndarray, users: np.ndarray,
             paths: PathTable) -> bool:
    """Exactly one candidate path per virtual hop, joining the placed nodes."""
    for c in users:
        for j in range(chain_len[c] - 1):
            a, b = placement.vm[c, j, 0], placement.vm[c, j + 1, 0]
            p = routing.path[c, j]
            if not 0 <= p < paths.counts[a, b]:
                return False
            path = paths.get(a, b, p)
            if path.nodes[0] != a or path.nodes[-1] != b:
                return False
    return True


def link_usage(placement: Placement, routing: Routing, chain_len: np.ndarray,
               paths: PathTable) -> np.ndarray:
    """``(C, L)`` count of how often each user's chain traverses each link."""
    C = placement.vm.shape[0]
    usage = np.zeros((C, paths.graph.num_links))
    for c in range(C):
        for j in range(chain_len[c] - 1):
            a, b = placement.vm[c, j, 0], placement.vm[c, j + 1, 0]
            p = routing.path[c, j]
            if not 0 <= p < paths.counts[a, b]:
                raise ValueError(f"routing of user {c} hop {j} does not match placed nodes")
            usage[c] += paths.incidence[a, b, p]
    return usage


def processing_delay(placement: Placement, chain_len: np.ndarray, q: np.ndarray,
                     packet_bits: np.ndarray, vm_cpu: np.ndarray) -> np.ndarray:
    """Sum over the chain of ``w' q_f / r_CPU`` of the hosting VM; ``vm_cpu`` is (N, V)."""
    C, F, _ = placement.vm.shape
    mask = np.arange(F)[None, :] < chain_len[:, None]
    nodes = np.where(mask, placement.vm[..., 0], 0)
    vms = np.where(mask, placement.vm[..., 1], 0)
    cpu = vm_cpu[nodes, vms]
    if np.any(cpu[mask] <= 0):
        raise ValueError("VM with zero CPU")
    per_vnf = np.where(mask, packet_bits[:, None] * q / np.where(mask, cpu, 1.0), 0.0)
    return per_vnf.sum(axis=1)


def core_prop_delay(usage: np.ndarray, prop_delay_per_link: np.ndarray) -> np.ndarray:
    return usage @ prop_delay_per_link


def core_trans_delay(usage: np.ndarray, w_realized: np.ndarray, bandwidth: np.ndarray) -> np.ndarray:
    """Per-link ``w~ / BW`` summed over the links each user traverses."""
    if np.any(bandwidth <= 0):
        raise ValueError("zero-bandwidth link")
    return w_realized * (usage @ (1.0 / bandwidth))


def e2e_delay(proc, core_prop, core_trans, ran_prop, ran_trans):
    return proc + core_prop + core_trans + ran_prop + ran_trans


def check_c7(delay: np.ndarray, tau_max: np.ndarray):
    slack = np.asarray(tau_max, float) - np.asarray(delay, float)
    return slack >= 0, slack


def robust_link_load(usage: np.ndarray, admitted: np.ndarray, demand: DemandSpec) -> np.ndarray:
    """Deterministic counterpart of the stochastic link load.

    The inner maximisation over the deviation variable is linear with
    non-negative coefficients, so it is attained at the upper end of the box.
    """
    return (admitted * demand.w_bar * (1.0 + demand.w_hat_frac)) @ usage


def stochastic_link_load(usage: np.ndarray, admitted: np.ndarray, w_realized: np.ndarray) -> np.ndarray:
    return (admitted * w_realized) @ usage


def check_c8(usage: np.ndarray, admitted: np.ndarray, demand: DemandSpec, bandwidth: np.ndarray):
    slack = bandwidth - robust_link_load(usage, admitted, demand)
    return slack >= 0, slack


def vm_occupancy(placement: Placement, chain_len: np.ndarray, users, num_nodes: int,
                 vms_per_node: int) -> np.ndarray:
    """Number of VNF instances on each VM, counting only ``users``."""
    occ = np.zeros((num_nodes, vms_per_node), dtype=int)
    for c in users:
        for j in range(chain_len[c]):
            b, v = placement.vm[c, j]
            occ[b, v] += 1
    return occ
