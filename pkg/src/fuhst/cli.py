"""Command-line entry point: ``fuhst run | pretrain | sweep | scenarios``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .detectors.base import save_state
from .errors import ConfigurationError
from .harness.config import ScenarioConfig, describe_presets, load_config, preset
from .harness.replay import pretrained_detector
from .harness.simulation import run_scenario
from .harness.sweep import grid_search, load_grid
from .sdn import CoordinationLog


def _scenario(args) -> ScenarioConfig:
    if args.config and args.preset:
        raise ConfigurationError("use either --config or --preset, not both")
    if args.config:
        cfg = load_config(args.config)
    elif args.preset:
        cfg = preset(args.preset)
    else:
        cfg = ScenarioConfig()
    changes = {}
    if args.mitigation is not None:
        changes["mitigation"] = args.mitigation
    if args.mitigation_start is not None:
        changes["mitigation_start"] = args.mitigation_start
    if args.seed is not None:
        changes["seed"] = args.seed
    return cfg.replace(**changes) if changes else cfg


def cmd_run(args) -> int:
    cfg = _scenario(args)
    seeds = [cfg.seed + k for k in range(args.seeds)]
    out = Path(args.out) if args.out else None
    finals, summary = [], []
    for seed in seeds:
        run_cfg = cfg.replace(seed=seed)
        log = CoordinationLog() if args.coord_log else None
        report = run_scenario(run_cfg, log=log)
        finals.append(report.final_accuracy)
        det = report.detection or {}
        line = f"seed={seed} acc={report.final_accuracy:.4f}"
        if det:
            line += f" f1={det['f1']:.4f} fbr={det['fbr']:.4f}"
        print(line)
        summary.append({"seed": seed, "final_accuracy": report.final_accuracy,
                        "detection": report.detection, "snapshots": report.snapshots})
        if out is not None:
            run_dir = out if len(seeds) == 1 else out / f"seed_{seed}"
            report.write(run_dir)
            if log is not None:
                log.write(run_dir / "coordination.ndjson")
    if len(seeds) > 1:
        print(f"mean acc={np.mean(finals):.4f} std={np.std(finals):.4f} over seeds {seeds}")
        if out is not None:
            payload = {"seeds": seeds, "mean_final_accuracy": float(np.mean(finals)),
                       "std_final_accuracy": float(np.std(finals)), "runs": summary}
            (out / "summary.json").write_text(json.dumps(payload, indent=2), encoding="utf-8")
    return 0


def cmd_pretrain(args) -> int:
    cfg = load_config(args.config) if args.config else ScenarioConfig()
    if args.seed is not None:
        cfg = cfg.replace(seed=args.seed)
    det = pretrained_detector(cfg.replace(pretrain=True))
    save_state(det, args.out)
    print(f"wrote {cfg.detector} state to {args.out}")
    return 0


def cmd_sweep(args) -> int:
    ranges, seeds, base = load_grid(args.grid)
    base_cfg = ScenarioConfig(**{"nodes_per_domain": [20], "malicious": 3, "mitigation": "detect",
                                 **base})
    result = grid_search(ranges, seeds, base_cfg)
    result.write(args.out)
    print(f"best {result.best} mean F1 {result.best_f1:.4f} ({len(result.table)} rows)")
    return 0


def cmd_scenarios(args) -> int:
    for row in describe_presets():
        print(row)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fuhst", description="Multi-domain DFL anomaly detection simulator")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a scenario")
    r.add_argument("--config", help="YAML scenario file")
    r.add_argument("--preset", help="scenario preset s1..s8")
    r.add_argument("--seed", type=int)
    r.add_argument("--seeds", type=int, default=1, help="number of consecutive seeds")
    r.add_argument("--mitigation", choices=["na", "mit", "ora", "detect"])
    r.add_argument("--mitigation-start", type=int, dest="mitigation_start")
    r.add_argument("--out", help="output directory for run.json and rounds.csv")
    r.add_argument("--coord-log", action="store_true", dest="coord_log",
                   help="also write the inter-domain coordination log")
    r.set_defaults(func=cmd_run)

    t = sub.add_parser("pretrain", help="pre-train a detector and save its state")
    t.add_argument("--out", required=True, help="state file (.npz)")
    t.add_argument("--config", help="YAML scenario file selecting detector and learner")
    t.add_argument("--seed", type=int)
    t.set_defaults(func=cmd_pretrain)

    s = sub.add_parser("sweep", help="hyperparameter grid search")
    s.add_argument("--grid", required=True, help="YAML with ranges, seeds and base")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_sweep)

    sc = sub.add_parser("scenarios", help="list the scenario presets")
    sc.set_defaults(func=cmd_scenarios)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
