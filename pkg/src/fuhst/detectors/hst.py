"""Half-space trees over a fixed unit-cube workspace.

Every tree is a complete binary tree of depth ``h`` stored heap-style:
internal node ``k`` has children ``2k+1`` and ``2k+2``, leaves occupy
indices ``2^h - 1 .. 2^(h+1) - 2``. Each internal node splits its
workspace box at the midpoint of a uniformly chosen dimension; points
with ``x[dim] < split`` go left.

Masses are kept per tree and node for a reference window ``r`` and the
latest window ``l``. Scores use the leaf reached by ``x``:

    S(x) = sum over trees of r(leaf) * 2^h
    score(x) = 1 - S(x) / (t * psi * 2^h)

so 0 means the point sits where a whole window of mass sits in every
tree and 1 means it falls in empty leaves everywhere.
"""
from __future__ import annotations

import numpy as np

from ..errors import ConfigurationError


class HSTEnsemble:
    """Streaming half-space-tree ensemble with windowed mass profiles.

    Parameters
    ----------
    n_features : int
        Dimension of the scored vectors; each lies in ``[0, 1]^n_features``.
    n_trees : int
        Number of trees ``t``.
    depth : int
        Tree depth ``h``.
    window : int
        Window size ``psi``; the reference profile is swapped in after
        every ``psi`` trained instances.
    seed : int
        Seed for the split dimensions.
    """

    def __init__(self, n_features: int, n_trees: int = 240, depth: int = 3,
                 window: int = 120, seed: int = 0):
        if n_features < 1 or n_trees < 1 or depth < 1 or window < 1:
            raise ConfigurationError("HST sizes must be positive")
        self.n_features = n_features
        self.n_trees = n_trees
        self.depth = depth
        self.window = window
        self.seed = seed
        n_internal = 2 ** depth - 1
        rng = np.random.default_rng(seed)
        self.split_dim = rng.integers(0, n_features, size=(n_trees, n_internal))
        self.split_val = np.empty((n_trees, n_internal))
        self._build_splits()
        n_nodes = 2 ** (depth + 1) - 1
        self.ref_mass = np.zeros((n_trees, n_nodes), dtype=np.int64)
        self.latest_mass = np.zeros((n_trees, n_nodes), dtype=np.int64)
        self.count = 0
        self.has_reference = False
        self._rows = np.arange(n_trees)

    def _build_splits(self):
        lo = np.zeros((self.n_trees, self.n_features))
        hi = np.ones((self.n_trees, self.n_features))
        self._fill(0, lo, hi)

    def _fill(self, k, lo, hi):
        if k >= self.split_dim.shape[1]:
            return
        rows = np.arange(self.n_trees)
        dims = self.split_dim[:, k]
        mid = 0.5 * (lo[rows, dims] + hi[rows, dims])
        self.split_val[:, k] = mid
        left_hi = hi.copy()
        left_hi[rows, dims] = mid
        right_lo = lo.copy()
        right_lo[rows, dims] = mid
        self._fill(2 * k + 1, lo, left_hi)
        self._fill(2 * k + 2, right_lo, hi)

    @property
    def max_mass_score(self) -> float:
        return float(self.n_trees * self.window * 2 ** self.depth)

    def path(self, x: np.ndarray) -> np.ndarray:
        """Node indices visited by ``x`` in every tree, shape ``(t, h + 1)``."""
        x = np.asarray(x, dtype=float)
        out = np.zeros((self.n_trees, self.depth + 1), dtype=np.int64)
        base = self._rows * self.split_dim.shape[1]
        dims, vals = self.split_dim.ravel(), self.split_val.ravel()
        node = np.zeros(self.n_trees, dtype=np.int64)
        for level in range(self.depth):
            flat = base + node
            node = 2 * node + 1 + (x[dims[flat]] >= vals[flat])
            out[:, level + 1] = node
        return out

    def leaves(self, X: np.ndarray) -> np.ndarray:
        """Leaf index per (point, tree) for a batch ``X`` of shape ``(n, d)``."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        node = np.zeros((X.shape[0], self.n_trees), dtype=np.int64)
        rows = self._rows[None, :]
        pts = np.arange(X.shape[0])[:, None]
        for _ in range(self.depth):
            dims = self.split_dim[rows, node]
            right = X[pts, dims] >= self.split_val[rows, node]
            node = 2 * node + 1 + right
        return node

    def profile(self) -> np.ndarray:
        """Mass profile used for scoring (the accumulating one before the first swap)."""
        return self.ref_mass if self.has_reference else self.latest_mass

    def raw_mass(self, x: np.ndarray) -> float:
        leaf = self.leaves(x)[0]
        return float(self.profile()[self._rows, leaf].sum() * 2 ** self.depth)

    def score(self, x: np.ndarray) -> float:
        return self.score_path(self.path(x))

    def score_path(self, path: np.ndarray) -> float:
        """Score of the point whose traversal is ``path`` (as returned by :meth:`path`)."""
        mass = self.profile()[self._rows, path[:, -1]].sum() * 2 ** self.depth
        return 1.0 - float(mass) / self.max_mass_score

    def score_many(self, X: np.ndarray) -> np.ndarray:
        leaf = self.leaves(X)
        mass = self.profile()[self._rows[None, :], leaf].sum(axis=1) * 2 ** self.depth
        return 1.0 - mass / self.max_mass_score

    def train(self, x: np.ndarray) -> bool:
        """Add ``x`` to the latest window; returns True when a window swap happened."""
        return self.train_path(self.path(x))

    def train_path(self, p: np.ndarray) -> bool:
        """Like :meth:`train` for a point whose traversal is already known."""
        self.latest_mass[self._rows[:, None], p] += 1
        self.count += 1
        if self.count >= self.window:
            self.ref_mass = self.latest_mass
            self.latest_mass = np.zeros_like(self.ref_mass)
            self.count = 0
            self.has_reference = True
            return True
        return False

    def to_state(self) -> dict:
        return {
            "meta": {"n_features": self.n_features, "n_trees": self.n_trees, "depth": self.depth,
                     "window": self.window, "seed": self.seed, "count": self.count,
                     "has_reference": self.has_reference},
            "split_dim": self.split_dim.copy(),
            "split_val": self.split_val.copy(),
            "ref_mass": self.ref_mass.copy(),
            "latest_mass": self.latest_mass.copy(),
        }

    @classmethod
    def from_state(cls, state: dict) -> "HSTEnsemble":
        m = state["meta"]
        e = cls(m["n_features"], m["n_trees"], m["depth"], m["window"], m["seed"])
        e.split_dim = np.asarray(state["split_dim"]).copy()
        e.split_val = np.asarray(state["split_val"], dtype=float).copy()
        e.ref_mass = np.asarray(state["ref_mass"], dtype=np.int64).copy()
        e.latest_mass = np.asarray(state["latest_mass"], dtype=np.int64).copy()
        e.count = int(m["count"])
        e.has_reference = bool(m["has_reference"])
        return e


def hst_score(e: HSTEnsemble, x) -> float:
    return e.score(np.asarray(x, dtype=float))


def hst_train(e: HSTEnsemble, x) -> HSTEnsemble:
    e.train(np.asarray(x, dtype=float))
    return e
