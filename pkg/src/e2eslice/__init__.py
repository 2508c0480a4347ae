"""Robust end-to-end network-slicing simulator and allocation agents."""
from .config import ScenarioConfig, preset
from .env import Allocation, SlicingEnv
from .scenario import Scenario, generate_scenario
from .topology import CoreGraph, PathTable, enumerate_paths, load_graph

__version__ = "0.1.0"

__all__ = [
    "Allocation", "CoreGraph", "PathTable", "Scenario", "ScenarioConfig", "SlicingEnv",
    "enumerate_paths", "generate_scenario", "load_graph", "preset",
]
