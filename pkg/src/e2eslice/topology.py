"""Core-network graph, VM inventory and candidate physical paths."""
from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable

import networkx as nx
import numpy as np

SPEED_OF_LIGHT = 3e8
DEFAULT_LINK_DISTANCE_M = 100e3


class GraphFormatError(ValueError):
    pass


@dataclass(frozen=True)
class CoreGraph:
    """Undirected core network.

    ``links`` rows are ``(a, b, distance_m, bandwidth_bps)`` with ``a < b`` and
    index-aligned with the link ids used everywhere else (loads, residuals).
    """

    nodes: tuple[int, ...]
    links: tuple[tuple[int, int, float, float], ...]
    labels: tuple[str, ...] = ()
    connectivity: np.ndarray = field(init=False, repr=False, compare=False)
    _link_index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n = len(self.nodes)
        if n == 0 or not self.links:
            raise GraphFormatError("graph needs at least one node and one link")
        if tuple(self.nodes) != tuple(range(n)):
            raise GraphFormatError("node ids must be 0..N-1 in order")
        conn = np.zeros((n, n), dtype=np.int8)
        index = {}
        for lid, (a, b, dist, bw) in enumerate(self.links):
            if a == b:
                raise GraphFormatError(f"self-loop on node {a}")
            if not (0 <= a < n and 0 <= b < n):
                raise GraphFormatError(f"link ({a},{b}) references unknown node")
            key = (min(a, b), max(a, b))
            if key in index:
                raise GraphFormatError(f"duplicate link {key}")
            if dist <= 0 or bw <= 0:
                raise GraphFormatError(f"link {key} needs positive distance and bandwidth")
            index[key] = lid
            conn[a, b] = conn[b, a] = 1
        object.__setattr__(self, "connectivity", conn)
        object.__setattr__(self, "_link_index", index)
        if not nx.is_connected(self.to_networkx()):
            raise GraphFormatError("graph is not connected")

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    @property
    def num_links(self) -> int:
        return len(self.links)

    def link_id(self, a: int, b: int) -> int:
        return self._link_index[(min(a, b), max(a, b))]

    def distances(self) -> np.ndarray:
        return np.array([l[2] for l in self.links], dtype=float)

    def bandwidths(self) -> np.ndarray:
        return np.array([l[3] for l in self.links], dtype=float)

    def prop_delays(self) -> np.ndarray:
        """Per-link propagation delay in seconds."""
        return self.distances() / SPEED_OF_LIGHT

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(self.nodes)
        for a, b, dist, bw in self.links:
            g.add_edge(a, b, distance=dist, bandwidth=bw)
        return g


@dataclass(frozen=True)
class PhysicalPath:
    nodes: tuple[int, ...]
    links: tuple[int, ...]  # link ids in traversal order

    @property
    def hops(self) -> int:
        return len(self.links)

    @property
    def indicator(self) -> frozenset[int]:
        return frozenset(self.links)


@dataclass(frozen=True)
class NodeResources:
    cpu: float  # cycles/s
    ram: float  # bytes
    storage: float  # bytes
    vms: int

    @property
    def vm_cpu(self) -> float:
        return self.cpu / self.vms

    @property
    def vm_ram(self) -> float:
        return self.ram / self.vms

    @property
    def vm_storage(self) -> float:
        return self.storage / self.vms


def provision_nodes(graph: CoreGraph, cpu: float, ram: float, storage: float,
                    vms_per_node: int) -> list[NodeResources]:
    """Every node gets the same capacity split equally over ``vms_per_node`` VMs."""
    if vms_per_node < 1:
        raise ValueError("vms_per_node must be >= 1")
    return [NodeResources(cpu, ram, storage, vms_per_node) for _ in graph.nodes]


def parse_graph(text: str, default_bandwidth: float = 1e9) -> CoreGraph:
    section = None
    node_rows: list[tuple[int, str]] = []
    link_rows: list[tuple[int, int, float, float]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip().lower()
            if section not in ("nodes", "links"):
                raise GraphFormatError(f"line {lineno}: unknown section [{section}]")
            continue
        parts = line.split()
        try:
            if section == "nodes":
                node_rows.append((int(parts[0]), parts[1] if len(parts) > 1 else str(parts[0])))
            elif section == "links":
                if len(parts) < 2:
                    raise ValueError
                dist = float(parts[2]) if len(parts) > 2 else DEFAULT_LINK_DISTANCE_M
                bw = float(parts[3]) if len(parts) > 3 else default_bandwidth
                link_rows.append((int(parts[0]), int(parts[1]), dist, bw))
            else:
                raise GraphFormatError(f"line {lineno}: data outside a section")
        except (ValueError, IndexError) as exc:
            raise GraphFormatError(f"line {lineno}: cannot parse {raw!r}") from exc
    node_rows.sort()
    return CoreGraph(nodes=tuple(n for n, _ in node_rows),
                     links=tuple(link_rows),
                     labels=tuple(lbl for _, lbl in node_rows))


BUNDLED_GRAPHS = ("abilene", "diamond")


def load_graph(path: str | Path | None = None) -> CoreGraph:
    """Load a graph file.

    ``None`` loads the bundled Abilene topology; a bare bundled name such as
    ``"diamond"`` loads that bundled graph.
    """
    if path is None:
        path = "abilene"
    if str(path) in BUNDLED_GRAPHS:
        text = resources.files("e2eslice.data").joinpath(f"{path}.graph").read_text()
    else:
        text = Path(path).read_text()
    return parse_graph(text)


def dump_graph(graph: CoreGraph) -> str:
    lines = ["[nodes]"]
    labels = graph.labels or tuple(str(n) for n in graph.nodes)
    lines += [f"{n} {lbl}" for n, lbl in zip(graph.nodes, labels)]
    lines += ["", "[links]"]
    lines += [f"{a} {b} {d!r} {bw!r}" for a, b, d, bw in graph.links]
    return "\n".join(lines) + "\n"


def make_path(graph: CoreGraph, nodes: Iterable[int]) -> PhysicalPath:
    nodes = tuple(nodes)
    links = tuple(graph.link_id(a, b) for a, b in zip(nodes, nodes[1:]))
    return PhysicalPath(nodes, links)


def _path_key(graph: CoreGraph, nodes: list[int]):
    dist = sum(graph.links[graph.link_id(a, b)][2] for a, b in zip(nodes, nodes[1:]))
    return (len(nodes) - 1, dist, tuple(nodes))


def enumerate_paths(graph: CoreGraph, src: int, dst: int, k_max: int = 4) -> list[PhysicalPath]:
    """Up to ``k_max`` simple paths ordered by hops, then distance, then node sequence.

    Yen's enumeration yields paths in non-decreasing hop count, so every path
    sharing the hop count of the k-th one is collected before sorting to make
    the tie-break independent of networkx internals.
    """
    if src == dst:
        raise ValueError("source and destination must differ")
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    g = graph.to_networkx()
    try:
        gen = nx.shortest_simple_paths(g, src, dst)
        collected: list[list[int]] = []
        cutoff = None
        for p in gen:
            hops = len(p) - 1
            if cutoff is not None and hops > cutoff:
                break
            collected.append(p)
            if len(collected) == k_max:
                cutoff = hops
    except nx.NetworkXNoPath as exc:
        raise ValueError(f"no path between {src} and {dst}") from exc
    collected.sort(key=lambda p: _path_key(graph, p))
    return [make_path(graph, p) for p in collected[:k_max]]


class PathTable:
    """Candidate paths for every ordered node pair; ``(b, b)`` maps to the empty path."""

    def __init__(self, graph: CoreGraph, k_max: int = 4):
        self.graph = graph
        self.k_max = k_max
        n = graph.num_nodes
        self._paths: dict[tuple[int, int], list[PhysicalPath]] = {}
        for a in range(n):
            self._paths[(a, a)] = [PhysicalPath((a,), ())]
            for b in range(a + 1, n):
                fwd = enumerate_paths(graph, a, b, k_max)
                self._paths[(a, b)] = fwd
                self._paths[(b, a)] = [PhysicalPath(p.nodes[::-1], p.links[::-1]) for p in fwd]
        self.counts = np.array([[len(self._paths[(a, b)]) for b in range(n)] for a in range(n)])
        # incidence[a, b, p, l] == 1 iff path p from a to b uses link l
        inc = np.zeros((n, n, k_max, graph.num_links))
        for (a, b), plist in self._paths.items():
            for pi, p in enumerate(plist):
                for lid in p.links:
                    inc[a, b, pi, lid] += 1
        self.incidence = inc

    def paths(self, a: int, b: int) -> list[PhysicalPath]:
        return self._paths[(a, b)]

    def get(self, a: int, b: int, index: int) -> PhysicalPath:
        return self._paths[(a, b)][index]
