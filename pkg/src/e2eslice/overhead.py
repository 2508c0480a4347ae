"""Control-signalling overhead of centralised and distributed decision making."""
from __future__ import annotations

from dataclasses import dataclass

from .config import ScenarioConfig
from .topology import load_graph

BITS_PER_VALUE = 16


@dataclass(frozen=True)
class SignalingOverhead:
    ran_bits: int
    core_bits: int

    @property
    def total_bits(self) -> int:
        return self.ran_bits + self.core_bits

    def per_algorithm(self) -> dict:
        """Centralised learners ship both parts to one agent; the distributed one keeps them apart."""
        central = self.total_bits
        return {"rdpg": central, "sac": central, "ddpg": central, "dist": (self.ran_bits, self.core_bits)}


def overhead_bits(num_bs: int, num_users: int, num_subchannels: int, num_nodes: int,
                  vms_per_node: int, num_links: int) -> SignalingOverhead:
    ran = BITS_PER_VALUE * num_bs * num_users * num_subchannels
    core = BITS_PER_VALUE * (num_nodes * vms_per_node + num_links)
    return SignalingOverhead(int(ran), int(core))


def signaling_overhead(cfg: ScenarioConfig) -> SignalingOverhead:
    graph = load_graph(cfg.graph_file or None)
    return overhead_bits(cfg.num_bs, cfg.num_users, cfg.num_subchannels, graph.num_nodes,
                         cfg.vms_per_node, graph.num_links)
