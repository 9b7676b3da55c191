"""Hyperparameter grid search for the HST ensemble behind FU-HST.

Every lattice point is scored by replaying recorded detect-only alert
streams (one per seed and attack), so the DFL simulation runs once per
(seed, attack) instead of once per grid point.
"""
from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from ..errors import ConfigurationError
from .config import ScenarioConfig
from .replay import detection_summary, pretrained_detector, record_stream, replay

FULL_GRID = {
    "n_trees": list(range(60, 361, 60)),
    "depth": [2, 3, 4, 5, 6],
    "tau": [round(0.50 + 0.05 * k, 2) for k in range(9)],
    "window": list(range(60, 361, 60)),
}
SWEEP_ATTACKS = ("noise", "sign_flip")
PARAM_ORDER = ("n_trees", "depth", "tau", "window")


@dataclass
class SweepResult:
    best: dict
    best_f1: float
    table: list

    def write(self, out_dir) -> Path:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        cols = [*PARAM_ORDER, "seed", *(f"f1_{a}" for a in SWEEP_ATTACKS), "f1_mean"]
        with open(out / "sweep.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.DictWriter(fh, fieldnames=cols)
            w.writeheader()
            w.writerows(self.table)
        (out / "best.yaml").write_text(
            yaml.safe_dump({"detector_params": self.best, "mean_f1": self.best_f1}, sort_keys=False),
            encoding="utf-8")
        return out


def load_grid(path) -> tuple:
    """Read ``ranges`` (mapping of parameter to list) and ``seeds`` from YAML.

    Missing parameters fall back to the full lattice; ``seeds`` may be a
    list or a count.
    """
    data = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    unknown = sorted(set(data) - {"ranges", "seeds", "base"})
    if unknown:
        raise ConfigurationError(f"unknown sweep keys: {unknown}")
    ranges = dict(FULL_GRID)
    ranges.update(data.get("ranges") or {})
    seeds = data.get("seeds", [0])
    if isinstance(seeds, int):
        seeds = list(range(seeds))
    return ranges, seeds, data.get("base") or {}


def grid_search(ranges=None, seeds=(0,), base: ScenarioConfig | None = None,
                attacks=SWEEP_ATTACKS) -> SweepResult:
    """Sweep ``ranges`` and pick the point with the highest mean F1.

    The mean runs over seeds and attacks; ties keep the earliest lattice
    point. The table has one row per (lattice point, seed).
    """
    ranges = dict(FULL_GRID if ranges is None else ranges)
    bad = sorted(set(ranges) - set(PARAM_ORDER))
    if bad:
        raise ConfigurationError(f"unknown sweep parameters: {bad}")
    for key in PARAM_ORDER:
        ranges.setdefault(key, FULL_GRID[key])
        if len(ranges[key]) == 0:
            raise ConfigurationError(f"empty range for {key}")
    base = base or ScenarioConfig(nodes_per_domain=[20], malicious=3, mitigation="detect")
    base = base.replace(detector="fuhst")

    streams = {(s, a): record_stream(base.replace(seed=s, attack=a)) for s in seeds for a in attacks}
    table, best, best_f1 = [], None, -1.0
    for point in itertools.product(*(ranges[k] for k in PARAM_ORDER)):
        params = dict(zip(PARAM_ORDER, point))
        scores = []
        for s in seeds:
            row = dict(params, seed=s)
            for a in attacks:
                st = streams[(s, a)]
                det = pretrained_detector(st.cfg, "fuhst", **params)
                row[f"f1_{a}"] = detection_summary(replay(st, det), st.malicious)["f1"]
            row["f1_mean"] = float(np.mean([row[f"f1_{a}"] for a in attacks]))
            scores.append(row["f1_mean"])
            table.append(row)
        mean = float(np.mean(scores))
        if mean > best_f1:
            best, best_f1 = params, mean
    return SweepResult(best, best_f1, table)
