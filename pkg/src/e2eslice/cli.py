"""Command-line entry point: ``slice sim|oracle|overhead|gradcheck``."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import config
from .agents.training import ALGORITHMS
from .config import SWEEP_AXES


def _load_config(path: str | None, preset_name: str | None) -> config.ScenarioConfig:
    if path:
        base = config.preset(preset_name) if preset_name else None
        return config.loads(Path(path).read_text(), base)
    return config.preset(preset_name or "paper")


def _cmd_sim(args) -> int:
    from .sweep import run_sweep

    cfg = _load_config(args.config, args.preset)
    algos = [a.strip() for a in args.algos.split(",") if a.strip()]
    values = None if args.values is None else [float(v) for v in args.values.split(",")]
    rows = run_sweep(cfg, args.axis, algos, args.seeds, out_dir=args.out, values=values,
                     episodes=args.episodes, eval_episodes=args.eval_episodes, workers=args.workers)
    for row in rows:
        print(f"{row['axis']}={row['value']:<8g} {row['algorithm']:<7} seed={row['seed']} "
              f"utility={row['utility']:.4g} sum_rate={row['sum_rate']:.4g} admitted={row['admitted']:.3g}")
    print(f"wrote {Path(args.out) / f'sweep_{args.axis}.csv'}")
    return 0


def _cmd_oracle(args) -> int:
    from .agents.greedy import greedy_allocate
    from .env import SlicingEnv
    from .oracle import enumerate_optimal
    from .scenario import generate_scenario

    cfg = _load_config(args.tiny, args.preset)
    env = SlicingEnv(generate_scenario(cfg, args.seed), args.seed)
    env.reset(args.seed)
    result = enumerate_optimal(env)
    greedy = env.evaluate(greedy_allocate(env))
    print(f"radio combinations: {result.radio_choices} (feasible: {result.feasible_count})")
    print(f"oracle utility: {result.utility:.6g} feasible={result.feasible}")
    print(f"greedy utility: {greedy.utility:.6g} feasible={greedy.feasible}")
    a = result.allocation
    print("subchannel owners per BS:", a.assign.tolist())
    print("powers (W):", [[round(p, 4) for p in row] for row in a.power.tolist()])
    print("VNF placement (node, vm):", a.placement.tolist())
    print("paths:", a.routing.tolist())
    return 0


def _cmd_overhead(args) -> int:
    from .overhead import signaling_overhead

    cfg = _load_config(args.config, args.preset)
    o = signaling_overhead(cfg)
    print(f"RAN bits: {o.ran_bits}")
    print(f"core bits: {o.core_bits}")
    print(f"centralised total: {o.total_bits}")
    print(f"distributed: RAN {o.ran_bits} / core {o.core_bits}")
    return 0


def _cmd_gradcheck(args) -> int:
    from .nn import run_gradient_checks

    results = run_gradient_checks(args.count, args.seed)
    worst = max(err for _, err in results)
    for n, (kind, err) in enumerate(results):
        print(f"{n:2d} {kind:<5} max relative error {err:.3e}")
    ok = worst <= args.tol
    print(f"{'PASS' if ok else 'FAIL'}: worst {worst:.3e} (tolerance {args.tol:g})")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="slice", description="End-to-end network slicing simulator.")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("sim", help="run a parameter sweep and write a CSV")
    sim.add_argument("--config", help="INI config file (defaults to the chosen preset)")
    sim.add_argument("--preset", choices=sorted(config.PRESETS), help="base preset")
    sim.add_argument("--axis", required=True, choices=sorted(SWEEP_AXES))
    sim.add_argument("--algos", default=",".join(ALGORITHMS), help="comma-separated list")
    sim.add_argument("--seeds", type=int, default=3, help="number of seeds (0..n-1)")
    sim.add_argument("--out", default="results", help="output directory")
    sim.add_argument("--values", help="comma-separated axis values (defaults to the standard grid)")
    sim.add_argument("--episodes", type=int, help="override the training episode count")
    sim.add_argument("--eval-episodes", type=int, default=20)
    sim.add_argument("--workers", type=int, default=1)
    sim.set_defaults(func=_cmd_sim)

    orc = sub.add_parser("oracle", help="solve a tiny instance exhaustively")
    orc.add_argument("--tiny", required=True, help="INI config of a tiny instance")
    orc.add_argument("--preset", choices=sorted(config.PRESETS))
    orc.add_argument("--seed", type=int, default=0)
    orc.set_defaults(func=_cmd_oracle)

    ovh = sub.add_parser("overhead", help="signalling overhead in bits")
    ovh.add_argument("--config")
    ovh.add_argument("--preset", choices=sorted(config.PRESETS))
    ovh.set_defaults(func=_cmd_overhead)

    grad = sub.add_parser("gradcheck", help="finite-difference gradient checks")
    grad.add_argument("--count", type=int, default=20)
    grad.add_argument("--seed", type=int, default=0)
    grad.add_argument("--tol", type=float, default=1e-4)
    grad.set_defaults(func=_cmd_gradcheck)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
