"""Seeded generation of complete end-to-end slicing instances."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import ScenarioConfig
from .corenet import DemandSpec, SfcChain
from .economics import PriceBook
from .radio import RadioScenario
from .topology import CoreGraph, NodeResources, PathTable, load_graph, provision_nodes


@dataclass
class Scenario:
    config: ScenarioConfig
    radio: RadioScenario
    graph: CoreGraph
    paths: PathTable
    nodes: list[NodeResources]
    chains: list[SfcChain]
    demand: DemandSpec
    prices: PriceBook
    r_min_bpshz: np.ndarray  # (S,)
    tau_max_s: np.ndarray  # (S,)
    ingress: np.ndarray  # (S,) node id
    egress: np.ndarray  # (S,) node id

    @property
    def num_users(self) -> int:
        return self.radio.num_users

    @property
    def num_slices(self) -> int:
        return self.radio.num_slices

    @property
    def user_slice(self) -> np.ndarray:
        return self.radio.user_slice

    @property
    def vm_cpu(self) -> np.ndarray:
        """(N, V) CPU of each VM in cycles/s."""
        return np.array([[n.vm_cpu] * n.vms for n in self.nodes])

    @property
    def vm_capacity(self) -> int:
        """VNF instances one VM can host under the slot, RAM and storage budgets."""
        cfg = self.config
        node = self.nodes[0]
        limits = [cfg.vnfs_per_vm]
        if cfg.vnf_ram_bytes > 0:
            limits.append(int(node.vm_ram // cfg.vnf_ram_bytes))
        if cfg.vnf_storage_bytes > 0:
            limits.append(int(node.vm_storage // cfg.vnf_storage_bytes))
        return max(min(limits), 0)


def grid_positions(count: int, area: float) -> np.ndarray:
    """Cell centres of the smallest near-square grid holding ``count`` BSs."""
    cols = math.ceil(math.sqrt(count))
    rows = math.ceil(count / cols)
    pos = []
    for r in range(rows):
        for c in range(cols):
            if len(pos) < count:
                pos.append(((c + 0.5) * area / cols, (r + 0.5) * area / rows))
    return np.array(pos, dtype=float)


def build_chains(cfg: ScenarioConfig) -> list[SfcChain]:
    q = dict(cfg.cycles_per_bit)
    chains = []
    for s, spec in enumerate(cfg.chains):
        vnfs = tuple(spec.split(","))
        chains.append(SfcChain(s, vnfs, tuple(q[v] for v in vnfs)))
    return chains


def generate_scenario(cfg: ScenarioConfig, seed: int | None = None) -> Scenario:
    """Users uniform over the square area, nearest-BS association, balanced slices."""
    rng = np.random.default_rng(cfg.seed if seed is None else seed)
    C, S = cfg.num_users, cfg.num_slices
    bs = grid_positions(cfg.num_bs, cfg.area_m)
    users = rng.uniform(0.0, cfg.area_m, size=(C, 2))
    user_slice = rng.permutation(np.arange(C) % S)
    dist = np.linalg.norm(bs[:, None, :] - users[None, :, :], axis=-1)
    user_bs = np.argmin(dist, axis=0)
    radio = RadioScenario(
        bs_positions=bs, user_positions=users, user_slice=user_slice, user_bs=user_bs,
        num_subchannels=cfg.num_subchannels, subchannel_bw_hz=cfg.subchannel_bw_hz,
        noise_psd_dbm_hz=cfg.noise_psd_dbm_hz, p_max_w=cfg.p_max_w, gamma=cfg.gamma_csi,
        num_slices=S, path_loss_exponent=cfg.path_loss_exponent, ref_gain_db=cfg.ref_gain_db)
    graph = load_graph(cfg.graph_file or None)
    nodes = provision_nodes(graph, cfg.node_cpu_hz, cfg.node_ram_bytes, cfg.node_storage_bytes,
                            cfg.vms_per_node)
    demand = DemandSpec(
        w_bar=np.asarray(cfg.w_bar_bps, float)[user_slice],
        w_hat_frac=cfg.w_hat_frac,
        packet_bits=np.asarray(cfg.packet_bits, float)[user_slice])
    prices = PriceBook(tuple(cfg.rev_per_mbps), cfg.ran_cost, cfg.node_cost, cfg.link_cost,
                       cfg.theta1, cfg.theta2)
    n = graph.num_nodes
    ingress = rng.integers(0, n, size=S)
    egress = np.array([rng.choice([b for b in range(n) if b != a]) for a in ingress])
    return Scenario(
        config=cfg, radio=radio, graph=graph, paths=PathTable(graph, cfg.k_paths), nodes=nodes,
        chains=build_chains(cfg), demand=demand, prices=prices,
        r_min_bpshz=np.asarray(cfg.r_min_bpshz, float), tau_max_s=np.asarray(cfg.tau_max_s, float),
        ingress=ingress, egress=egress)
