"""FU-HST and the plain HST baseline.

Both score each rated node's feature vector with the same ensemble. The
FU-HST wrapper adds hysteresis-stabilized scores, a feedback memory, a
dual decision rule and a gated ("safe") ensemble update. Nodes are
processed in ascending id order and the ensemble may be trained between
nodes, so later nodes in a round see the updated profile.
"""
from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np

from ..errors import ConfigurationError
from .base import Detector, register
from .features import K_MAX, feature_dim, synthesize_features
from .hst import HSTEnsemble

DEFAULTS = dict(n_trees=240, depth=3, tau=0.55, window=120, gamma=0.5, alpha=0.5,
                beta=0.9, p_u=0.05)


@register
class FuHST(Detector):
    """Feedback-updated half-space trees (one instance per domain).

    Parameters
    ----------
    tau : float
        Upper threshold; the lower threshold is ``gamma * tau``.
    alpha : float
        EMA weight of the previous smoothed score.
    beta : float
        Weight of the new raw score in the feedback EMA on flagging.
    p_u : float
        Probability of training on a non-safe, non-flagged instance.
    safe_update : bool
        If False the ensemble is trained on every instance (ablation).
    """

    name = "fuhst"

    def __init__(self, n_trees=240, depth=3, tau=0.55, window=120, gamma=0.5, alpha=0.5,
                 beta=0.9, p_u=0.05, k_max=K_MAX, seed=0, safe_update=True):
        for label, v in (("tau", tau), ("gamma", gamma), ("alpha", alpha), ("beta", beta)):
            if not 0.0 < v < 1.0:
                raise ConfigurationError(f"{label} must lie in (0, 1), got {v}")
        if not 0.0 <= p_u <= 1.0:
            raise ConfigurationError(f"p_u must lie in [0, 1], got {p_u}")
        self.tau_hi = float(tau)
        self.tau_lo = float(gamma * tau)
        self.gamma, self.alpha, self.beta, self.p_u = gamma, alpha, beta, p_u
        self.k_max = k_max
        self.seed = seed
        self.safe_update = safe_update
        self.ensemble = HSTEnsemble(feature_dim(k_max), n_trees, depth, window, seed)
        self.s: dict = {}
        self.f: dict = {}
        self.c: dict = {}
        self.last_raw: dict = {}
        self.trained_on: list = []

    def features(self, alerts, node):
        return synthesize_features(alerts, self.f.get(node, 0.0), self.k_max)

    def pretrain(self, received: Mapping[int, Sequence[float]]) -> None:
        for j in sorted(received):
            if len(received[j]):
                self.ensemble.train(self.features(received[j], j).as_array())

    def round(self, received, rng_seed=0):
        rng = np.random.default_rng(rng_seed)
        scores, anomalous = {}, set()
        self.last_raw = {}
        self.trained_on = []
        for j in sorted(received):
            if len(received[j]) == 0:
                continue
            s_prev = self.s.get(j, 0.0)
            f_prev = self.f.get(j, 0.0)
            c_prev = self.c.get(j, 0)
            path = self.ensemble.path(synthesize_features(received[j], f_prev, self.k_max).as_array())
            raw = self.ensemble.score_path(path)
            self.last_raw[j] = raw

            if raw < self.tau_lo:
                s, f, c = 0.0, 0.0, 0
            else:
                s = self.alpha * s_prev + (1.0 - self.alpha) * raw
                f = f_prev
                c = c_prev + int(raw > self.tau_hi)
            y = s

            if y > self.tau_hi or (raw > self.tau_hi and f_prev > self.tau_hi):
                anomalous.add(j)
                f = self.beta * raw + (1.0 - self.beta) * f_prev

            if not self.safe_update:
                self._train(j, path)
            elif y == 0.0 and c == 0:
                self._train(j, path)
            elif y < self.tau_hi:
                if rng.random() <= self.p_u:
                    self._train(j, path)

            self.s[j], self.f[j], self.c[j] = s, f, c
            scores[j] = y
        return scores, anomalous

    def _train(self, j, path):
        self.ensemble.train_path(path)
        self.trained_on.append(j)

    def to_state(self):
        state = self.ensemble.to_state()
        state["meta"] = dict(state["meta"])
        state["detector"] = {
            "name": self.name, "tau": self.tau_hi, "gamma": self.gamma, "alpha": self.alpha,
            "beta": self.beta, "p_u": self.p_u, "k_max": self.k_max, "seed": self.seed,
            "safe_update": self.safe_update,
            "s": _dump(self.s), "f": _dump(self.f), "c": _dump(self.c),
        }
        return state

    @classmethod
    def from_state(cls, state):
        d, m = state["detector"], state["meta"]
        det = cls(n_trees=m["n_trees"], depth=m["depth"], tau=d["tau"], window=m["window"],
                  gamma=d["gamma"], alpha=d["alpha"], beta=d["beta"], p_u=d["p_u"],
                  k_max=d["k_max"], seed=d["seed"], safe_update=d["safe_update"])
        det.ensemble = HSTEnsemble.from_state(state)
        det.s, det.f = _load(d["s"], float), _load(d["f"], float)
        det.c = _load(d["c"], int)
        return det


@register
class PlainHST(Detector):
    """Raw HST decisions: flag when the score exceeds ``tau``, train on everything."""

    name = "hst"

    def __init__(self, n_trees=240, depth=3, tau=0.55, window=120, k_max=K_MAX, seed=0, **_):
        if not 0.0 < tau < 1.0:
            raise ConfigurationError(f"tau must lie in (0, 1), got {tau}")
        self.tau_hi = float(tau)
        self.k_max = k_max
        self.seed = seed
        self.ensemble = HSTEnsemble(feature_dim(k_max), n_trees, depth, window, seed)
        self.last_raw: dict = {}

    def pretrain(self, received):
        for j in sorted(received):
            if len(received[j]):
                self.ensemble.train(synthesize_features(received[j], 0.0, self.k_max).as_array())

    def round(self, received, rng_seed=0):
        scores, anomalous = {}, set()
        self.last_raw = {}
        for j in sorted(received):
            if len(received[j]) == 0:
                continue
            path = self.ensemble.path(synthesize_features(received[j], 0.0, self.k_max).as_array())
            raw = self.ensemble.score_path(path)
            self.last_raw[j] = raw
            scores[j] = raw
            if raw > self.tau_hi:
                anomalous.add(j)
            self.ensemble.train_path(path)
        return scores, anomalous

    def to_state(self):
        state = self.ensemble.to_state()
        state["detector"] = {"name": self.name, "tau": self.tau_hi, "k_max": self.k_max,
                             "seed": self.seed}
        return state

    @classmethod
    def from_state(cls, state):
        d, m = state["detector"], state["meta"]
        det = cls(n_trees=m["n_trees"], depth=m["depth"], tau=d["tau"], window=m["window"],
                  k_max=d["k_max"], seed=d["seed"])
        det.ensemble = HSTEnsemble.from_state(state)
        return det


def _dump(d: dict) -> list:
    return [[int(k), v] for k, v in sorted(d.items())]


def _load(rows, cast) -> dict:
    return {int(k): cast(v) for k, v in rows}
