"""Per-node feature synthesis from received alert weights."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

EPS = 1e-9
K_MAX = 16
# Z-score means below this are rounding residue of an exact zero.
Z_ROUNDING = 1e-12


@dataclass(frozen=True)
class FeatureVector:
    padded_alerts: tuple
    mean_alert: float
    mean_z: float
    feedback_prev: float

    def as_array(self) -> np.ndarray:
        """Workspace coordinates in ``[0, 1]``; ``mean_z`` enters through a logistic squash."""
        return np.array([*self.padded_alerts, self.mean_alert, squash(self.mean_z),
                         self.feedback_prev], dtype=float)

    @property
    def dim(self) -> int:
        return len(self.padded_alerts) + 3


def squash(z: float) -> float:
    return 1.0 / (1.0 + math.exp(-z))


def feature_dim(k_max: int = K_MAX) -> int:
    return k_max + 3


def synthesize_features(alerts_for_j: Sequence[float], feedback_prev: float = 0.0,
                        k_max: int = K_MAX) -> FeatureVector:
    """Build the feature vector of one rated node.

    The mean alert and the mean standardized deviation summarize the
    received weights; the weights themselves are sorted ascending and
    truncated or padded with 1.0 to ``k_max`` entries.
    """
    # alert vectors are short, so plain floats beat numpy's per-call overhead
    w = [float(v) for v in alerts_for_j]
    if not w:
        raise ValueError("no alerts received for this node")
    n = len(w)
    mean = math.fsum(w) / n
    dev = [v - mean for v in w]
    sigma = math.sqrt(math.fsum(d * d for d in dev) / n)
    mean_z = math.fsum(d / (sigma + EPS) for d in dev) / n
    if abs(mean_z) < Z_ROUNDING:
        mean_z = 0.0
    s = sorted(w)[:k_max]
    padded = tuple(s) + (1.0,) * (k_max - len(s))
    return FeatureVector(padded, mean, mean_z, float(feedback_prev))
