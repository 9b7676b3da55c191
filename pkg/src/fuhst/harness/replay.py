"""Offline detector evaluation on recorded alert streams.

When bans are not enforced the DFL trajectory does not depend on the
detector, so one recorded stream can be replayed through any number of
detector configurations with results identical to live detect-only runs.
"""
from __future__ import annotations

import copy
from dataclasses import dataclass

from ..detectors.base import from_state_dict, state_dict
from ..metrics import detection_accuracy, f1, global_confusion, per_round_fbr_average
from .config import ScenarioConfig, derive_seed
from .simulation import _DETECT, Simulation, new_detector, pretraining_stream, run_pretraining


@dataclass
class AlertStream:
    """Per-round, per-domain assembled alert vectors of one detect-only run."""

    cfg: ScenarioConfig
    rounds: list
    malicious: frozenset

    @property
    def n_domains(self) -> int:
        return len(self.rounds[0]) if self.rounds else 0


def record_stream(cfg: ScenarioConfig) -> AlertStream:
    rcfg = cfg.replace(mitigation="detect", detector="null", detector_params={}, pretrain=False)
    sim = Simulation(rcfg, record_alerts=True)
    for t in range(1, rcfg.rounds + 1):
        sim.run_round(t)
    return AlertStream(cfg, sim.alert_stream, sim.malicious)


def pretrained_detector(cfg: ScenarioConfig, detector: str | None = None, **params):
    """A detector built from ``cfg`` (optionally overridden) and warmed on the pre-training stream."""
    dcfg = cfg if detector is None else cfg.replace(detector=detector, detector_params=params)
    det = new_detector(dcfg)
    if dcfg.pretrain:
        run_pretraining(det, dcfg, stream=pretraining_stream(dcfg))
    return det


def replay(stream: AlertStream, detector) -> list:
    """Run a copy of ``detector`` per domain over the stream; returns per-round flag maps."""
    snap = state_dict(detector)
    dets = [from_state_dict(copy.deepcopy(snap)) for _ in range(stream.n_domains)]
    decisions = []
    for t, row in enumerate(stream.rounds, start=1):
        flags = {}
        for d, vectors in enumerate(row):
            _, anomalous = dets[d].round(vectors, derive_seed(stream.cfg.seed, _DETECT, t, d))
            flags.update({j: j in anomalous for j in vectors})
        decisions.append(flags)
    return decisions


def detection_summary(decisions, truth) -> dict:
    c = global_confusion(decisions, truth)
    return {
        "f1": f1(c),
        "accuracy": detection_accuracy(c) if c.total else None,
        "fbr": per_round_fbr_average(decisions, truth),
        "confusion": {"tp": c.tp, "fp": c.fp, "tn": c.tn, "fn": c.fn},
    }
