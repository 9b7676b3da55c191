"""Ban-aware neighbor aggregation and alert emission.

Each node combines its own model with the unbanned neighbor models it
received, using a pluggable trust rule. The per-neighbor trust weights
double as the alert signals ``w_ij`` reported to the node's domain.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import ConfigurationError

EPS = 1e-9


@dataclass(frozen=True)
class AlertRecord:
    rater: int
    rated: int
    round: int
    weight: float


@dataclass(frozen=True)
class AggregationOutcome:
    new_params: np.ndarray
    alerts: list


def apply_ban_filter(received: Mapping[int, np.ndarray], bans) -> dict:
    """Drop every update whose sender is banned."""
    banned = set(bans)
    return {j: u for j, u in received.items() if j not in banned}


class AlertRule:
    """Maps ``(own, received)`` to per-neighbor weights in ``[0, 1]``.

    Subclasses implement :meth:`weights`. The aggregate is the convex
    combination with the own model weighted 1 and each neighbor by its
    weight. Rules may keep state across rounds; the harness gives every
    node its own instance via :func:`make_rule`.
    """

    name = "base"

    def weights(self, own: np.ndarray, senders: list, stack: np.ndarray, round: int) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, own, received, round):
        return trust_weighted_aggregate(own, received, round, rule=self)


class UniformRule(AlertRule):
    """Reference rule: every neighbor weight is 1 (plain mean)."""

    name = "uniform"

    def weights(self, own, senders, stack, round):
        return np.ones(len(senders))


class TrustGaussRule(AlertRule):
    """Geometric trust: Gaussian kernel on the distance to a robust center.

    The center is the coordinate-wise median of the received models and
    the own model. Distances are scaled by ``scale`` times their median.
    """

    name = "trust_gauss"

    def __init__(self, scale: float = 1.0):
        if not scale > 0:
            raise ConfigurationError("trust_gauss scale must be positive")
        self.scale = scale

    def weights(self, own, senders, stack, round):
        center = np.median(np.vstack([stack, own[None, :]]), axis=0)
        d = np.linalg.norm(stack - center, axis=1)
        sigma = self.scale * np.median(d) + EPS
        return np.exp(-d * d / (2.0 * sigma * sigma))


RULES = {
    UniformRule.name: UniformRule,
    TrustGaussRule.name: TrustGaussRule,
}


def make_rule(name: str, **params) -> AlertRule:
    try:
        cls = RULES[name]
    except KeyError:
        raise ConfigurationError(f"unknown alert rule {name!r}; known: {sorted(RULES)}") from None
    try:
        return cls(**params)
    except TypeError as exc:
        raise ConfigurationError(f"bad parameters for rule {name!r}: {exc}") from None


def trust_weighted_aggregate(own: np.ndarray, received: Mapping[int, np.ndarray], round: int,
                             rule: AlertRule | None = None, rater: int = -1) -> AggregationOutcome:
    """Aggregate ``received`` into ``own`` and emit one alert per sender.

    With nothing received the node keeps its own model and emits no alerts.
    """
    rule = rule if rule is not None else TrustGaussRule()
    if not received:
        return AggregationOutcome(own.copy(), [])
    senders = sorted(received)
    stack = np.stack([np.asarray(received[j], dtype=float) for j in senders])
    if stack.shape[1:] != own.shape:
        raise ValueError(f"dimension mismatch: own {own.shape}, received {stack.shape[1:]}")
    w = np.clip(np.asarray(rule.weights(own, senders, stack, round), dtype=float), 0.0, 1.0)
    total = 1.0 + w.sum()
    new = (own + w @ stack) / total
    alerts = [AlertRecord(rater, j, round, float(wj)) for j, wj in zip(senders, w)]
    return AggregationOutcome(new, alerts)
