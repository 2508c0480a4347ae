"""Scenario and agent configuration with plain-text (INI) round-tripping."""
from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

SLICE_NAMES = ("eMBB", "uRLLC", "mMTC")

# Sweep axes and their default grids.
SWEEP_AXES = {
    "users": (4, 8, 12, 16, 20, 22, 24),
    "demand": (0.0, 0.05, 0.10, 0.15, 0.20, 0.25, 0.30),
    "csi": (0.0, 0.02, 0.04, 0.06, 0.08, 0.10),
    "delay": (0.060, 0.100, 0.200, 0.300, 0.400, 0.500),
    "rmin": (1.0, 1.2, 1.4, 1.6, 1.8, 2.0, 3.0, 4.0, 5.0),
}


@dataclass(frozen=True)
class ScenarioConfig:
    # radio
    num_users: int = 24
    num_bs: int = 4
    num_subchannels: int = 10
    num_slices: int = 3
    subchannel_bw_hz: float = 20e3
    noise_psd_dbm_hz: float = -174.0
    p_max_w: float = 4.0
    area_m: float = 1000.0
    path_loss_exponent: float = 3.5
    ref_gain_db: float = -38.0
    gamma_csi: float = 0.05
    # core
    graph_file: str = ""  # empty -> bundled Abilene
    k_paths: int = 4
    vms_per_node: int = 6
    vnfs_per_vm: int = 6
    node_cpu_hz: float = 1200e6
    node_ram_bytes: float = 125e6
    node_storage_bytes: float = 125e6
    vnf_ram_bytes: float = 2e6
    vnf_storage_bytes: float = 2e6
    chains: tuple[str, ...] = ("NAT,VOC", "FW,IDPS", "TM,WOC")
    cycles_per_bit: tuple[tuple[str, float], ...] = (
        ("NAT", 2.0), ("FW", 4.0), ("TM", 3.0), ("WOC", 6.0), ("IDPS", 8.0), ("VOC", 10.0))
    # demand and QoS, one value per slice
    w_bar_bps: tuple[float, ...] = (20e6, 5e6, 1e6)
    w_hat_frac: float = 0.10
    packet_bits: tuple[float, ...] = (8000.0, 2000.0, 1000.0)
    r_min_bpshz: tuple[float, ...] = (2.0, 1.0, 1.0)
    tau_max_s: tuple[float, ...] = (0.300, 0.100, 0.500)
    # economics
    rev_per_mbps: tuple[float, ...] = (1.0, 1.0, 1.0)
    ran_cost: float = 1e-4
    node_cost: float = 1e-9
    link_cost: float = 1e-8
    theta1: float = 60.0
    theta2: float = 1.0
    # environment
    reward_coef: float = 0.02
    penalty_weight: float = 1.0
    episode_len: int = 50
    warmup_draws: int = 1000
    # learning
    discount: float = 0.80
    batch_size: int = 64
    tau: float = 0.001
    hidden_layers: int = 2
    hidden_width: int = 512
    actor_lr: float = 1e-5
    critic_lr: float = 5e-5
    lr_decay: float = 1e-3
    buffer_size: int = 600000
    episodes: int = 4000
    noise_scale: float = 0.1
    rdpg_batch_episodes: int = 16
    rdpg_updates_per_episode: int = 1
    updates_per_step: int = 1
    update_every: int = 1
    normalize_rewards: bool = True
    sac_temperature: float = 0.0  # > 0 fixes the SAC temperature, 0 learns it
    rdpg_actor_lr: float = 0.0  # > 0 overrides actor_lr for RDPG
    rdpg_critic_lr: float = 0.0  # > 0 overrides critic_lr for RDPG
    seed: int = 0

    def __post_init__(self):
        self.validate()

    def validate(self):
        positive = ("num_users", "num_bs", "num_subchannels", "num_slices", "subchannel_bw_hz",
                    "p_max_w", "area_m", "k_paths", "vms_per_node", "vnfs_per_vm", "node_cpu_hz",
                    "episode_len", "batch_size", "hidden_width", "buffer_size", "update_every")
        for name in positive:
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.hidden_layers < 1:
            raise ValueError("hidden_layers must be >= 1")
        if not 0 <= self.gamma_csi < 1 or not 0 <= self.w_hat_frac < 1:
            raise ValueError("uncertainty bounds must lie in [0, 1)")
        if not 0 <= self.discount <= 1 or not 0 <= self.tau <= 1:
            raise ValueError("discount and tau must lie in [0, 1]")
        if self.sac_temperature < 0:
            raise ValueError("sac_temperature must be >= 0")
        if self.episodes < 0:
            raise ValueError("episodes must be >= 0")
        per_slice = ("chains", "w_bar_bps", "packet_bits", "r_min_bpshz", "tau_max_s", "rev_per_mbps")
        for name in per_slice:
            if len(getattr(self, name)) != self.num_slices:
                raise ValueError(f"{name} needs one entry per slice")
        if self.num_users < self.num_slices:
            raise ValueError("need at least one user per slice")
        known = dict(self.cycles_per_bit)
        for chain in self.chains:
            for vnf in chain.split(","):
                if vnf not in known:
                    raise ValueError(f"unknown VNF type {vnf!r}")
        rdpg_lrs = (self.rdpg_actor_lr or self.actor_lr, self.rdpg_critic_lr or self.critic_lr)
        if self.actor_lr >= self.critic_lr or rdpg_lrs[0] >= rdpg_lrs[1]:
            raise ValueError("actor learning rate must be below the critic's (two-timescale condition)")

    def with_(self, **kw) -> "ScenarioConfig":
        return replace(self, **kw)


PRESETS = {
    "paper": {},
    "desk": dict(num_users=6, num_bs=2, num_subchannels=4, episodes=500, hidden_width=64,
                 actor_lr=1e-5, critic_lr=3e-4, tau=0.01, buffer_size=100000, update_every=4,
                 sac_temperature=1e-4, rdpg_actor_lr=1e-4, rdpg_critic_lr=1e-3),
}


def preset(name: str, **overrides) -> ScenarioConfig:
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    return ScenarioConfig(**{**PRESETS[name], **overrides})


_SECTIONS = {
    "radio": ("num_users", "num_bs", "num_subchannels", "num_slices", "subchannel_bw_hz",
              "noise_psd_dbm_hz", "p_max_w", "area_m", "path_loss_exponent", "ref_gain_db", "gamma_csi"),
    "core": ("graph_file", "k_paths", "vms_per_node", "vnfs_per_vm", "node_cpu_hz", "node_ram_bytes",
             "node_storage_bytes", "vnf_ram_bytes", "vnf_storage_bytes", "chains", "cycles_per_bit"),
    "demand": ("w_bar_bps", "w_hat_frac", "packet_bits", "r_min_bpshz", "tau_max_s"),
    "economics": ("rev_per_mbps", "ran_cost", "node_cost", "link_cost", "theta1", "theta2"),
    "env": ("reward_coef", "penalty_weight", "episode_len", "warmup_draws"),
    "agent": ("discount", "batch_size", "tau", "hidden_layers", "hidden_width", "actor_lr", "critic_lr",
              "lr_decay", "buffer_size", "episodes", "noise_scale", "rdpg_batch_episodes",
              "rdpg_updates_per_episode", "updates_per_step", "update_every", "normalize_rewards",
              "sac_temperature", "rdpg_actor_lr", "rdpg_critic_lr", "seed"),
}


def _format(name, value) -> str:
    if name == "cycles_per_bit":
        return ", ".join(f"{k}:{v!r}" for k, v in value)
    if name == "chains":
        return "; ".join(value)
    if isinstance(value, tuple):
        return ", ".join(repr(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse(name, text: str, default):
    text = text.strip()
    if name == "cycles_per_bit":
        pairs = [p.split(":") for p in text.split(",") if p.strip()]
        return tuple((k.strip(), float(v)) for k, v in pairs)
    if name == "chains":
        return tuple(c.strip().replace(" ", "") for c in text.split(";") if c.strip())
    if isinstance(default, bool):
        return text.lower() in ("1", "true", "yes", "on")
    if isinstance(default, tuple):
        return tuple(float(v) for v in text.split(",") if v.strip())
    if isinstance(default, int):
        return int(text)
    if isinstance(default, float):
        return float(text)
    return text


def dumps(cfg: ScenarioConfig) -> str:
    parser = configparser.ConfigParser()
    for section, names in _SECTIONS.items():
        parser[section] = {n: _format(n, getattr(cfg, n)) for n in names}
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()


def loads(text: str, base: ScenarioConfig | None = None) -> ScenarioConfig:
    """Parse an INI config; unspecified keys keep the values of ``base``.

    A ``[preset] name = desk`` entry selects the starting preset.
    """
    parser = configparser.ConfigParser()
    parser.read_string(text)
    if base is None:
        base = preset(parser.get("preset", "name", fallback="paper"))
    defaults = {f.name: getattr(base, f.name) for f in fields(ScenarioConfig)}
    values = dict(defaults)
    owner = {n: s for s, names in _SECTIONS.items() for n in names}
    for section in parser.sections():
        if section == "preset":
            continue
        if section not in _SECTIONS:
            raise ValueError(f"unknown config section [{section}]")
        for key, raw in parser[section].items():
            if owner.get(key) != section:
                raise ValueError(f"unknown key {key!r} in [{section}]")
            values[key] = _parse(key, raw, defaults[key])
    return ScenarioConfig(**values)


def load(path: str | Path) -> ScenarioConfig:
    return loads(Path(path).read_text())


def save(cfg: ScenarioConfig, path: str | Path) -> None:
    Path(path).write_text(dumps(cfg))
