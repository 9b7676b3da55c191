"""Desk-scale local learning: a dense-parameter classifier per node.

Models are plain numpy parameter vectors so attacks and aggregation can
treat every node's model as one flat array. Two model kinds exist:

``linear``
    softmax regression, ``dim = in_dim * classes + classes``.
``mlp``
    one tanh hidden layer followed by softmax.

Optionally the vector carries ``pad_to - dim`` inert trailing coordinates
(zero gradient) so communication accounting can be exercised at realistic
model sizes.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, NonFiniteError


@dataclass(frozen=True)
class NodeDataset:
    X_train: np.ndarray
    y_train: np.ndarray
    X_test: np.ndarray
    y_test: np.ndarray

    @property
    def in_dim(self) -> int:
        return self.X_train.shape[1]


@dataclass(frozen=True)
class LearnerConfig:
    """Local training hyperparameters.

    ``batch_size=None`` means full-batch gradient descent; otherwise each
    epoch is one shuffled pass of mini-batches over the train split.
    """

    learning_rate: float = 0.01
    local_epochs: int = 1
    model_kind: str = "linear"
    hidden: int = 32
    batch_size: int | None = 8
    in_dim: int = 16
    classes: int = 4
    pad_to: int = 0

    def __post_init__(self):
        if not self.learning_rate >= 0:
            raise ConfigurationError("learning_rate must be non-negative")
        if self.local_epochs < 0:
            raise ConfigurationError("local_epochs must be non-negative")
        if self.model_kind not in ("linear", "mlp"):
            raise ConfigurationError(f"unknown model_kind {self.model_kind!r}")
        if self.batch_size is not None and self.batch_size < 1:
            raise ConfigurationError("batch_size must be positive")

    @property
    def core_dim(self) -> int:
        d, c, h = self.in_dim, self.classes, self.hidden
        if self.model_kind == "linear":
            return d * c + c
        return d * h + h + h * c + c

    @property
    def dim(self) -> int:
        return max(self.core_dim, self.pad_to)


def generate_synthetic_task(n_nodes: int, classes: int, in_dim: int, samples_per_node: int,
                            seed: int, class_sep: float = 3.0, noise: float = 1.0,
                            test_fraction: float = 0.25) -> list[NodeDataset]:
    """IID Gaussian-cluster classification data, one dataset per node.

    Class means are shared by all nodes and sit on a randomly rotated
    simplex with pairwise distance ``class_sep`` (in units of ``noise``).
    Every node holds an exactly balanced label set.
    """
    if classes < 2:
        raise ConfigurationError("need at least two classes")
    if samples_per_node < 2 * classes:
        raise ConfigurationError("samples_per_node must be at least 2 * classes")
    if n_nodes < 1 or in_dim < 1:
        raise ConfigurationError("n_nodes and in_dim must be positive")
    n_test = int(round(samples_per_node * test_fraction))
    if n_test < 1 or n_test >= samples_per_node:
        raise ConfigurationError("test_fraction leaves an empty train or test split")

    rng = np.random.default_rng(seed)
    width = max(in_dim, classes)
    q, _ = np.linalg.qr(rng.normal(size=(width, width)))
    means = (class_sep / np.sqrt(2.0)) * q[:classes, :in_dim] * noise
    if classes > in_dim:
        # simplex does not fit; fall back to random means at the target scale
        means = rng.normal(size=(classes, in_dim)) * class_sep * noise / np.sqrt(2 * in_dim)

    out = []
    for _ in range(n_nodes):
        y = np.arange(samples_per_node) % classes
        rng.shuffle(y)
        X = means[y] + noise * rng.normal(size=(samples_per_node, in_dim))
        # stratified split keeps both parts balanced
        order = np.argsort(y, kind="stable")
        test_mask = np.zeros(samples_per_node, dtype=bool)
        per_class = np.bincount(y, minlength=classes)
        start = 0
        remaining = n_test
        for c in range(classes):
            take = min(per_class[c], int(round(n_test * per_class[c] / samples_per_node)))
            take = min(take, remaining)
            test_mask[order[start:start + take]] = True
            remaining -= take
            start += per_class[c]
        if remaining:
            test_mask[np.flatnonzero(~test_mask)[:remaining]] = True
        out.append(NodeDataset(X[~test_mask], y[~test_mask], X[test_mask], y[test_mask]))
    return out


def init_params(cfg: LearnerConfig, seed: int, scale: float = 0.01) -> np.ndarray:
    """Common starting model: small Gaussian core weights, zero padding."""
    rng = np.random.default_rng(seed)
    params = np.zeros(cfg.dim)
    params[:cfg.core_dim] = scale * rng.normal(size=cfg.core_dim)
    return params


def _unpack(params: np.ndarray, cfg: LearnerConfig):
    d, c, h = cfg.in_dim, cfg.classes, cfg.hidden
    if cfg.model_kind == "linear":
        W = params[:d * c].reshape(d, c)
        b = params[d * c:d * c + c]
        return W, b
    o = 0
    W1 = params[o:o + d * h].reshape(d, h); o += d * h
    b1 = params[o:o + h]; o += h
    W2 = params[o:o + h * c].reshape(h, c); o += h * c
    b2 = params[o:o + c]
    return W1, b1, W2, b2


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def logits(params: np.ndarray, X: np.ndarray, cfg: LearnerConfig) -> np.ndarray:
    parts = _unpack(params, cfg)
    if cfg.model_kind == "linear":
        W, b = parts
        return X @ W + b
    W1, b1, W2, b2 = parts
    return np.tanh(X @ W1 + b1) @ W2 + b2


def loss_and_grad(params: np.ndarray, X: np.ndarray, y: np.ndarray,
                  cfg: LearnerConfig) -> tuple[float, np.ndarray]:
    """Mean cross-entropy and its gradient with respect to the full vector."""
    n = len(y)
    grad = np.zeros_like(params)
    parts = _unpack(params, cfg)
    if cfg.model_kind == "linear":
        W, b = parts
        p = _softmax(X @ W + b)
        loss = -np.mean(np.log(p[np.arange(n), y] + 1e-300))
        p[np.arange(n), y] -= 1.0
        p /= n
        d, c = W.shape
        grad[:d * c] = (X.T @ p).ravel()
        grad[d * c:d * c + c] = p.sum(axis=0)
        return float(loss), grad
    W1, b1, W2, b2 = parts
    a = np.tanh(X @ W1 + b1)
    p = _softmax(a @ W2 + b2)
    loss = -np.mean(np.log(p[np.arange(n), y] + 1e-300))
    p[np.arange(n), y] -= 1.0
    p /= n
    gW2 = a.T @ p
    gb2 = p.sum(axis=0)
    da = (p @ W2.T) * (1.0 - a * a)
    gW1 = X.T @ da
    gb1 = da.sum(axis=0)
    flat = np.concatenate([gW1.ravel(), gb1, gW2.ravel(), gb2])
    grad[:len(flat)] = flat
    return float(loss), grad


def local_train(params: np.ndarray, data: NodeDataset, cfg: LearnerConfig,
                seed: int = 0) -> np.ndarray:
    """Run ``cfg.local_epochs`` passes of gradient descent over the train split.

    Pure: the input vector is not modified and the mini-batch order is
    drawn from ``seed`` only.

    Raises
    ------
    NonFiniteError
        If a gradient or the updated parameters become non-finite.
    """
    if params.shape != (cfg.dim,):
        raise ConfigurationError(f"expected {cfg.dim} parameters, got {params.shape}")
    if data.in_dim != cfg.in_dim:
        raise ConfigurationError(f"dataset has {data.in_dim} features, model expects {cfg.in_dim}")
    w = params.copy()
    if cfg.learning_rate == 0 or cfg.local_epochs == 0:
        return w
    rng = np.random.default_rng(seed)
    X, y = data.X_train, data.y_train
    n = len(y)
    bs = n if cfg.batch_size is None else min(cfg.batch_size, n)
    for _ in range(cfg.local_epochs):
        order = rng.permutation(n) if bs < n else np.arange(n)
        for start in range(0, n, bs):
            idx = order[start:start + bs]
            _, g = loss_and_grad(w, X[idx], y[idx], cfg)
            if not np.all(np.isfinite(g)):
                raise NonFiniteError("non-finite gradient during local training")
            w -= cfg.learning_rate * g
    if not np.all(np.isfinite(w)):
        raise NonFiniteError("non-finite parameters after local training")
    return w


def predict(params: np.ndarray, X: np.ndarray, cfg: LearnerConfig) -> np.ndarray:
    return np.argmax(logits(params, X, cfg), axis=1)


def evaluate(params: np.ndarray, data: NodeDataset, cfg: LearnerConfig) -> float:
    """Fraction of correct predictions on the node's test split."""
    if len(data.y_test) == 0:
        raise ValueError("empty test set")
    return float(np.mean(predict(params, data.X_test, cfg) == data.y_test))
