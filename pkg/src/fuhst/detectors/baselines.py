"""Streaming baselines: standard absolute deviation (SAD) and incremental LOF."""
from __future__ import annotations

import math

import numpy as np

from ..errors import ConfigurationError
from .base import Detector, register
from .features import K_MAX, synthesize_features

EPS = 1e-9


@register
class SAD(Detector):
    """Normalized absolute deviation of ``1 - mean_alert`` from a running mean.

    Each value is scored against the statistics accumulated so far
    (Welford, population variance) and then folded into them. A node is
    anomalous when ``score > threshold``; fewer than two past values give
    a score of 0.
    """

    name = "sad"

    def __init__(self, threshold: float = 2.0, **_):
        self.threshold = threshold
        self.n = 0
        self.mean = 0.0
        self.m2 = 0.0

    def score_value(self, x: float) -> float:
        if self.n < 2:
            return 0.0
        sigma = math.sqrt(self.m2 / self.n)
        return abs(x - self.mean) / (sigma + EPS)

    def update(self, x: float) -> None:
        self.n += 1
        delta = x - self.mean
        self.mean += delta / self.n
        self.m2 += delta * (x - self.mean)

    def pretrain(self, received):
        for j in sorted(received):
            if len(received[j]):
                self.update(1.0 - float(np.mean(received[j])))

    def round(self, received, rng_seed=0):
        scores, anomalous = {}, set()
        for j in sorted(received):
            if len(received[j]) == 0:
                continue
            x = 1.0 - float(np.mean(received[j]))
            score = self.score_value(x)
            scores[j] = score
            if score > self.threshold:
                anomalous.add(j)
            self.update(x)
        return scores, anomalous

    def to_state(self):
        return {"threshold": self.threshold, "n": self.n, "mean": self.mean, "m2": self.m2}

    @classmethod
    def from_state(cls, state):
        det = cls(threshold=state["threshold"])
        det.n, det.mean, det.m2 = int(state["n"]), float(state["mean"]), float(state["m2"])
        return det


class SlidingLOF:
    """Local outlier factor over a FIFO window with an incrementally kept distance matrix.

    ``k = min(k_max, occupancy - 1)``. Neighborhoods include distance ties.
    Conventions for zero reachability: a point whose mean reachability
    distance is 0 has infinite local density and LOF 1.0; a finite-density
    point with an infinite-density neighbor has LOF ``inf``.
    """

    def __init__(self, capacity: int = 120, k_max: int = 75):
        if capacity < 2 or k_max < 1:
            raise ConfigurationError("LOF window needs capacity >= 2 and k >= 1")
        self.capacity = capacity
        self.k_max = k_max
        self.points: list = []
        self.D = np.zeros((0, 0))

    def __len__(self):
        return len(self.points)

    @property
    def k(self) -> int:
        return min(self.k_max, len(self.points) - 1)

    def insert(self, x) -> None:
        x = np.asarray(x, dtype=float)
        if self.points:
            d = np.linalg.norm(np.stack(self.points) - x, axis=1)
        else:
            d = np.zeros(0)
        n = len(self.points)
        D = np.empty((n + 1, n + 1))
        D[:n, :n] = self.D
        D[n, :n] = d
        D[:n, n] = d
        D[n, n] = 0.0
        self.points.append(x)
        self.D = D
        if len(self.points) > self.capacity:
            self.points.pop(0)
            self.D = self.D[1:, 1:]

    def _kdist(self) -> np.ndarray:
        n, k = len(self.points), self.k
        off = self.D + np.diag(np.full(n, np.inf))
        return np.partition(off, k - 1, axis=1)[:, k - 1]

    def _neighborhood(self, i, kdist):
        row = self.D[i]
        idx = np.flatnonzero(row <= kdist[i])
        return idx[idx != i]

    def _lrd(self, i, kdist):
        nb = self._neighborhood(i, kdist)
        reach = np.maximum(kdist[nb], self.D[i, nb])
        m = reach.mean()
        return math.inf if m == 0 else 1.0 / m

    def lof(self, i: int) -> float:
        if len(self.points) < 2:
            raise ValueError("LOF needs at least two points in the window")
        kdist = self._kdist()
        lrd_i = self._lrd(i, kdist)
        if math.isinf(lrd_i):
            return 1.0
        nb = self._neighborhood(i, kdist)
        lrds = np.array([self._lrd(o, kdist) for o in nb])
        if np.isinf(lrds).any():
            return math.inf
        return float(lrds.mean() / lrd_i)

    def lof_all(self) -> np.ndarray:
        return np.array([self.lof(i) for i in range(len(self.points))])


@register
class ILOF(Detector):
    """Incremental LOF baseline: insert each node's features, flag when LOF exceeds ``threshold``."""

    name = "ilof"

    def __init__(self, threshold: float = 1.13, k: int = 75, window: int = 120,
                 k_max: int = K_MAX, **_):
        self.threshold = threshold
        self.k_max = k_max
        self.lof_window = SlidingLOF(window, k)

    def pretrain(self, received):
        for j in sorted(received):
            if len(received[j]):
                self.lof_window.insert(synthesize_features(received[j], 0.0, self.k_max).as_array())

    def round(self, received, rng_seed=0):
        scores, anomalous = {}, set()
        for j in sorted(received):
            if len(received[j]) == 0:
                continue
            self.lof_window.insert(synthesize_features(received[j], 0.0, self.k_max).as_array())
            if len(self.lof_window) < 2:
                continue
            score = self.lof_window.lof(len(self.lof_window) - 1)
            scores[j] = score
            if score > self.threshold:
                anomalous.add(j)
        return scores, anomalous

    def to_state(self):
        w = self.lof_window
        pts = np.stack(w.points) if w.points else np.zeros((0, 0))
        return {"threshold": self.threshold, "k": w.k_max, "window": w.capacity,
                "k_max": self.k_max, "points": pts}

    @classmethod
    def from_state(cls, state):
        det = cls(threshold=state["threshold"], k=int(state["k"]), window=int(state["window"]),
                  k_max=int(state["k_max"]))
        for p in np.asarray(state["points"]):
            det.lof_window.insert(p)
        return det
