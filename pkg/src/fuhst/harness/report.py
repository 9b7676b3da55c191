"""Run reports, output files and overhead summaries."""
from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..metrics import detection_accuracy, f1, global_confusion, per_round_fbr_average

CSV_COLUMNS = ("round", "acc_mean", "acc_std", "tp", "fp", "tn", "fn", "bans", "t_train_s",
               "t_agg_s", "t_detect_s", "bytes_model", "bytes_alerts", "bytes_coord")

METADATA = {
    "accuracy_spread": "acc_std is the spread across nodes within one run",
    "scored_nodes": "nodes with an empty alert vector in a round are excluded from that round's counts",
    "sticky_bans": "with sticky bans a banned node counts as flagged in every later round",
    "timings": "timing fields are excluded from determinism_hash",
}


@dataclass
class RunReport:
    config: dict
    malicious: list
    rounds: list
    detection: dict | None
    snapshots: dict
    overhead: dict
    metadata: dict = field(default_factory=lambda: dict(METADATA))

    @classmethod
    def from_simulation(cls, sim) -> "RunReport":
        reports = sim.reports
        truth = sorted(sim.malicious)
        detection = None
        if sim.detecting:
            decisions = [r.flags for r in reports]
            c = global_confusion(decisions, truth)
            detection = {
                "f1": f1(c),
                "accuracy": detection_accuracy(c) if c.total else None,
                "fbr": per_round_fbr_average(decisions, truth),
                "global_fbr": c.fp / (c.fp + c.tn) if c.fp + c.tn else None,
                "confusion": {"tp": c.tp, "fp": c.fp, "tn": c.tn, "fn": c.fn},
            }
        snaps = {}
        for r in reports:
            if r.round in (10, 20) or r.round == len(reports):
                snaps[f"R{r.round}"] = {"mean": r.acc_mean, "std": r.acc_std}
        return cls(sim.cfg.to_dict(), truth, reports, detection, snaps, overhead_summary(reports))

    @property
    def final_accuracy(self) -> float:
        return self.rounds[-1].acc_mean

    def to_dict(self, timings: bool = True) -> dict:
        d = {
            "config": self.config,
            "malicious": self.malicious,
            "rounds": [r.to_dict(timings) for r in self.rounds],
            "detection": self.detection,
            "snapshots": self.snapshots,
            "overhead": self.overhead if timings else _strip_timing(self.overhead),
            "metadata": self.metadata,
        }
        return d

    def determinism_hash(self) -> str:
        blob = json.dumps(self.to_dict(timings=False), sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()

    def write(self, out_dir) -> Path:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        payload = self.to_dict()
        payload["determinism_hash"] = self.determinism_hash()
        (out / "run.json").write_text(json.dumps(payload, indent=2, sort_keys=True), encoding="utf-8")
        with open(out / "rounds.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_COLUMNS)
            for r in self.rounds:
                c = r.confusion
                w.writerow([r.round, r.acc_mean, r.acc_std,
                            *(("", "", "", "") if c is None else (c.tp, c.fp, c.tn, c.fn)),
                            len(r.bans), r.t_train_s, r.t_agg_s, r.t_detect_s,
                            r.bytes_model, r.bytes_alerts, r.bytes_coord])
        return out


_TIMING_KEYS = ("detect_time_s", "dfl_time_s", "train_time_s", "agg_time_s", "time_ratio",
                "detect_time_per_domain_s")


def _strip_timing(summary: dict) -> dict:
    return {k: v for k, v in summary.items() if k not in _TIMING_KEYS}


def overhead_summary(reports) -> dict:
    """Per-round means of computation time and transmitted bytes.

    ``time_ratio`` is detection time over total (train + aggregate +
    detect) time; ``bytes_ratio`` is detection bytes (alerts plus
    coordination) over model-exchange bytes.
    """
    if not reports:
        return {}
    mean = lambda xs: float(np.mean(xs))
    det = mean([r.t_detect_s for r in reports])
    train = mean([r.t_train_s for r in reports])
    agg = mean([r.t_agg_s for r in reports])
    model = mean([r.bytes_model for r in reports])
    alerts = mean([r.bytes_alerts for r in reports])
    coord = mean([r.bytes_coord for r in reports])
    per_dom = [t for r in reports for t in r.detect_time_per_domain]
    total_t = det + train + agg
    return {
        "detect_time_s": det,
        "train_time_s": train,
        "agg_time_s": agg,
        "dfl_time_s": train + agg,
        "time_ratio": det / total_t if total_t > 0 else 0.0,
        "detect_time_per_domain_s": mean(per_dom) if per_dom else 0.0,
        "model_bytes": model,
        "alert_bytes": alerts,
        "coord_bytes": coord,
        "detection_bytes": alerts + coord,
        "bytes_ratio": (alerts + coord) / model if model > 0 else 0.0,
    }
