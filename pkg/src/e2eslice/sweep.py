"""Parameter sweeps: train or run each algorithm per axis value and tabulate results."""
from __future__ import annotations

import csv
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .agents.base import AgentConfig
from .agents.training import ALGORITHMS, evaluate, train
from .config import SWEEP_AXES, ScenarioConfig
from .env import SlicingEnv
from .scenario import generate_scenario

# CSI bound held fixed while the demand bound varies
DEMAND_AXIS_GAMMA = 0.02
# the rate-floor sweep holds both uncertainty bounds fixed
RMIN_AXIS_GAMMA = 0.02
RMIN_AXIS_DEMAND = 0.05
COLUMNS = ("axis", "value", "algorithm", "seed", "utility", "sum_rate", "cost", "admitted",
           "mean_reward", "violations")


def apply_axis(cfg: ScenarioConfig, axis: str, value) -> ScenarioConfig:
    S = cfg.num_slices
    if axis == "users":
        return cfg.with_(num_users=int(value))
    if axis == "demand":
        return cfg.with_(w_hat_frac=float(value), gamma_csi=DEMAND_AXIS_GAMMA)
    if axis == "csi":
        return cfg.with_(gamma_csi=float(value))
    if axis == "delay":
        return cfg.with_(tau_max_s=(float(value),) * S)
    if axis == "rmin":
        return cfg.with_(r_min_bpshz=(float(value),) * S, gamma_csi=RMIN_AXIS_GAMMA,
                         w_hat_frac=RMIN_AXIS_DEMAND)
    raise ValueError(f"unknown sweep axis {axis!r}; choose from {sorted(SWEEP_AXES)}")


def run_point(cfg: ScenarioConfig, axis: str, value, algorithm: str, seed: int,
              episodes: int | None = None, eval_episodes: int = 20) -> dict:
    """One table row: the scenario instance and training are both fixed by ``seed``."""
    point = apply_axis(cfg, axis, value)
    env = SlicingEnv(generate_scenario(point, seed), seed)
    agent = None
    if algorithm != "greedy":
        agent_cfg = AgentConfig.from_scenario(point)
        _, agent = train(algorithm, env, agent_cfg, point.episodes if episodes is None else episodes, seed)
    stats = evaluate(env, agent, eval_episodes, seed=10_000 + seed)
    return {"axis": axis, "value": value, "algorithm": algorithm, "seed": seed, **stats}


def run_sweep(cfg: ScenarioConfig, axis: str, algorithms, seeds, out_dir=None, values=None,
              episodes: int | None = None, eval_episodes: int = 20, workers: int = 1) -> list[dict]:
    """Rows ordered by axis value, then algorithm, then seed.

    ``seeds`` is either a count or an explicit sequence. With ``out_dir`` the
    rows are also written to ``<out_dir>/sweep_<axis>.csv``.
    """
    if axis not in SWEEP_AXES:
        raise ValueError(f"unknown sweep axis {axis!r}; choose from {sorted(SWEEP_AXES)}")
    algorithms = list(algorithms)
    if not algorithms:
        raise ValueError("algorithm list is empty")
    unknown = [a for a in algorithms if a not in ALGORITHMS]
    if unknown:
        raise ValueError(f"unknown algorithm(s) {unknown}; choose from {ALGORITHMS}")
    seeds = list(range(seeds)) if isinstance(seeds, int) else list(seeds)
    values = SWEEP_AXES[axis] if values is None else tuple(values)
    jobs = [(cfg, axis, v, a, s, episodes, eval_episodes) for v in values for a in algorithms for s in seeds]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(run_point, *zip(*jobs)))
    else:
        rows = [run_point(*job) for job in jobs]
    if out_dir is not None:
        write_rows(Path(out_dir) / f"sweep_{axis}.csv", rows)
    return rows


def write_rows(path, rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(COLUMNS))
        writer.writeheader()
        for row in rows:
            writer.writerow({k: row[k] for k in COLUMNS})
