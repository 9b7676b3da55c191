"""Detection and learning metrics.

Per-round decisions are a list with one entry per round; each entry maps
a scored node to its flag (``True`` = flagged). Nodes absent from a
round's mapping were not scored that round and do not count.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(self.tp + other.tp, self.fp + other.fp,
                               self.tn + other.tn, self.fn + other.fn)

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


def f1(c: ConfusionCounts) -> float:
    """``2TP / (2TP + FP + FN)``; 0 when nothing is positive anywhere."""
    den = 2 * c.tp + c.fp + c.fn
    return 0.0 if den == 0 else 2 * c.tp / den


def detection_accuracy(c: ConfusionCounts) -> float:
    if c.total == 0:
        raise ValueError("detection accuracy undefined for an empty confusion matrix")
    return (c.tp + c.tn) / c.total


def false_ban_rate(c: ConfusionCounts) -> float:
    if c.fp + c.tn == 0:
        raise ValueError("false-ban rate undefined without benign nodes")
    return c.fp / (c.fp + c.tn)


def round_confusion(flags: Mapping[int, bool], truth) -> ConfusionCounts:
    truth = set(truth)
    tp = fp = tn = fn = 0
    for node, flagged in flags.items():
        if node in truth:
            tp += bool(flagged)
            fn += not flagged
        else:
            fp += bool(flagged)
            tn += not flagged
    return ConfusionCounts(tp, fp, tn, fn)


def global_confusion(decisions: Sequence[Mapping[int, bool]], truth, rounds: int | None = None) -> ConfusionCounts:
    """Single confusion matrix over every scored (node, round) pair."""
    rounds = len(decisions) if rounds is None else rounds
    if len(decisions) < rounds:
        raise ValueError(f"decisions cover {len(decisions)} rounds, expected {rounds}")
    total = ConfusionCounts()
    for flags in decisions[:rounds]:
        total = total + round_confusion(flags, truth)
    return total


def per_round_fbr_average(decisions: Sequence[Mapping[int, bool]], truth, rounds: int | None = None) -> float:
    """Mean over rounds of that round's false-ban rate.

    Rounds in which no benign node was scored are skipped.
    """
    rounds = len(decisions) if rounds is None else rounds
    rates = []
    for flags in decisions[:rounds]:
        c = round_confusion(flags, truth)
        if c.fp + c.tn:
            rates.append(false_ban_rate(c))
    return float(np.mean(rates)) if rates else 0.0


def sticky_decisions(raw: Sequence[Mapping[int, bool]]) -> list:
    """Carry bans forward: once flagged, a node counts as flagged in every later round.

    Banned nodes stay in the counts even when nobody rates them anymore.
    """
    banned = set()
    out = []
    for flags in raw:
        banned |= {j for j, f in flags.items() if f}
        row = dict(flags)
        for j in banned:
            row[j] = True
        out.append(row)
    return out
