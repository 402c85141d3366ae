"""Flat-parameter classifiers and their cross-entropy gradients."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .rngstream import RngStream

SOFTMAX = "softmax_regression"
MLP = "mlp_one_hidden"
MODEL_KINDS = (SOFTMAX, MLP)


@dataclass(frozen=True)
class Model:
    """A model as one flat weight vector plus its layer shape."""

    kind: str
    weights: np.ndarray     # (D,)
    dims: tuple[int, ...]   # (d, C) or (d, hidden, C)

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        if self.weights.shape != (model_dim(self.kind, self.dims),):
            raise ValueError("weight length inconsistent with dims")

    @property
    def dim(self) -> int:
        return self.weights.shape[0]


def model_dim(kind: str, dims: tuple[int, ...]) -> int:
    if kind == SOFTMAX:
        d, C = dims
        return (d + 1) * C
    d, H, C = dims
    return (d + 1) * H + (H + 1) * C


def init_model(kind: str, d: int, C: int, hidden: int = 32,
               stream: RngStream | None = None) -> Model:
    """Zero-initialized softmax head; small random tanh layer for the MLP."""
    if kind == SOFTMAX:
        return Model(SOFTMAX, np.zeros((d + 1) * C), (d, C))
    if stream is None:
        raise ValueError("MLP initialization requires a stream")
    gen = stream.generator()
    w1 = gen.standard_normal((d + 1) * hidden) / np.sqrt(d)
    w2 = np.zeros((hidden + 1) * C)
    return Model(MLP, np.concatenate([w1, w2]), (d, hidden, C))


def _unpack(model: Model):
    if model.kind == SOFTMAX:
        d, C = model.dims
        W = model.weights[:d * C].reshape(d, C)
        b = model.weights[d * C:]
        return W, b
    d, H, C = model.dims
    n1 = d * H
    W1 = model.weights[:n1].reshape(d, H)
    b1 = model.weights[n1:n1 + H]
    n2 = n1 + H
    W2 = model.weights[n2:n2 + H * C].reshape(H, C)
    b2 = model.weights[n2 + H * C:]
    return W1, b1, W2, b2


def predict_logits(model: Model, X: np.ndarray) -> np.ndarray:
    if model.kind == SOFTMAX:
        W, b = _unpack(model)
        return X @ W + b
    W1, b1, W2, b2 = _unpack(model)
    return np.tanh(X @ W1 + b1) @ W2 + b2


def _softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def loss_and_gradient(model: Model, X: np.ndarray,
                      y: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean cross-entropy over the batch and its gradient in flat form."""
    B = X.shape[0]
    if model.kind == SOFTMAX:
        W, b = _unpack(model)
        logits = X @ W + b
        P = _softmax(logits)
        loss = -np.mean(np.log(P[np.arange(B), y] + 1e-300))
        dA = P
        dA[np.arange(B), y] -= 1.0
        dA /= B
        grad = np.concatenate([(X.T @ dA).ravel(), dA.sum(axis=0)])
        return float(loss), grad
    W1, b1, W2, b2 = _unpack(model)
    Hpre = X @ W1 + b1
    H = np.tanh(Hpre)
    P = _softmax(H @ W2 + b2)
    loss = -np.mean(np.log(P[np.arange(B), y] + 1e-300))
    dA = P
    dA[np.arange(B), y] -= 1.0
    dA /= B
    dH = (dA @ W2.T) * (1.0 - H**2)
    grad = np.concatenate([(X.T @ dH).ravel(), dH.sum(axis=0),
                           (H.T @ dA).ravel(), dA.sum(axis=0)])
    return float(loss), grad


def local_gradient(model: Model, shard: Dataset, batch_size: int,
                   stream: RngStream) -> np.ndarray:
    """Gradient on a uniformly sampled mini-batch (without replacement)."""
    n = len(shard)
    if n == 0:
        raise ValueError("empty shard")
    if batch_size > n:
        raise ValueError(f"batch_size {batch_size} exceeds shard size {n}")
    idx = stream.generator().choice(n, size=batch_size, replace=False)
    _, grad = loss_and_gradient(model, shard.features[idx], shard.labels[idx])
    return grad


def clip_gradient(g: np.ndarray, G: float) -> np.ndarray:
    """Rescale to norm G when ||g|| exceeds the bound; idempotent."""
    if G <= 0:
        raise ValueError("G must be positive")
    norm = np.linalg.norm(g)
    return g if norm <= G else g * (G / norm)


def sgd_step(model: Model, g_hat: np.ndarray, eta: float) -> Model:
    if eta <= 0:
        raise ValueError("learning rate must be positive")
    if g_hat.shape != model.weights.shape:
        raise ValueError("gradient dimension mismatch")
    return Model(model.kind, model.weights - eta * g_hat, model.dims)


def evaluate(model: Model, data: Dataset) -> tuple[float, float]:
    """(mean loss, accuracy) on a dataset."""
    logits = predict_logits(model, data.features)
    P = _softmax(logits)
    n = len(data)
    loss = -np.mean(np.log(P[np.arange(n), data.labels] + 1e-300))
    acc = float(np.mean(logits.argmax(axis=1) == data.labels))
    return float(loss), acc
