"""Minibatch SGD with softmax cross-entropy for the toy networks."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .nn import Network, forward_batch

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 0.05
    epochs: int = 30
    batch_size: int = 8
    seed: int = 0

    def __post_init__(self):
        if self.lr < 0:
            raise ValueError("learning rate must be non-negative")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch size must be >= 1")


@dataclass
class TrainResult:
    net: Network
    accuracy: float
    history: list[dict] = field(default_factory=list)


def softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def accuracy(net: Network, images, labels) -> float:
    pred = forward_batch(net, images).argmax(axis=1)
    return float(np.mean(pred == np.asarray(labels)))


def train_toy(net: Network, images, labels, cfg: TrainConfig = TrainConfig()) -> TrainResult:
    """Train a copy of ``net``; the input network is left untouched.

    The shuffling order is drawn from ``cfg.seed`` so a rerun reproduces the
    weights bit for bit.
    """
    images = np.asarray(images, dtype=np.float64)
    labels = np.asarray(labels, dtype=int)
    if len(labels) == 0:
        raise ValueError("empty dataset")
    if labels.min() < 0 or labels.max() >= net.n_classes:
        raise ValueError("labels out of range for the network's classes")
    net = net.copy()
    rng = np.random.default_rng(cfg.seed)
    n = len(labels)
    history = []
    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        total = 0.0
        for s in range(0, n, cfg.batch_size):
            idx = order[s : s + cfg.batch_size]
            out, tape = net.run(images[idx], keep_tape=True)
            p = softmax(out)
            total += -np.log(p[np.arange(len(idx)), labels[idx]] + 1e-300).sum()
            gy = p
            gy[np.arange(len(idx)), labels[idx]] -= 1.0
            gy /= len(idx)
            _, grads = net.backprop(tape, gy)
            for (i, name), g in grads.items():
                net.layers[i].params[name] -= cfg.lr * g
        acc = accuracy(net, images, labels)
        history.append({"epoch": epoch + 1, "loss": total / n, "accuracy": acc})
        log.debug("epoch %d loss %.4f acc %.3f", epoch + 1, total / n, acc)
    return TrainResult(net, history[-1]["accuracy"], history)
