"""Small sequential networks with reverse-mode input and parameter gradients.

Every layer works on a leading batch axis. A forward pass records a tape of
per-layer caches; the backward pass walks that tape in reverse and
accumulates the adjoint of the selected output. Networks are never mutated
by evaluation, so a single instance can be shared between threads.

The ReLU subgradient at exactly zero is 0.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

__all__ = [
    "Layer",
    "Dense",
    "Bias",
    "Conv2d",
    "ReLU",
    "Flatten",
    "Softmax",
    "Network",
    "forward",
    "forward_batch",
    "grad_input",
    "grad_input_batch",
    "finite_diff_grad",
    "relu_pattern",
]


class Layer:
    """Base class. Subclasses define ``kind``, ``params`` and the maps."""

    kind = "layer"

    def __init__(self) -> None:
        self.params: dict[str, np.ndarray] = {}

    def output_shape(self, in_shape: tuple[int, ...]) -> tuple[int, ...]:
        return in_shape

    def forward(self, x):
        """Return ``(y, cache)`` for a batch ``x``."""
        raise NotImplementedError

    def backward(self, cache, gy):
        """Return ``(gx, param_grads)`` given the output adjoint ``gy``."""
        raise NotImplementedError

    def hyper(self) -> dict[str, int]:
        return {}

    def __repr__(self) -> str:
        hp = " ".join(f"{k}={v}" for k, v in self.hyper().items())
        return f"{self.kind}({hp})"


class Dense(Layer):
    kind = "dense"

    def __init__(self, n_in: int, units: int, weight=None) -> None:
        super().__init__()
        self.n_in, self.units = int(n_in), int(units)
        if weight is None:
            weight = np.zeros((self.units, self.n_in))
        weight = np.asarray(weight, dtype=np.float64).reshape(self.units, self.n_in)
        self.params["weight"] = weight

    def hyper(self):
        return {"in": self.n_in, "units": self.units}

    def output_shape(self, in_shape):
        if in_shape != (self.n_in,):
            raise ValueError(f"dense expects input ({self.n_in},), got {in_shape}")
        return (self.units,)

    def forward(self, x):
        return x @ self.params["weight"].T, x

    def backward(self, cache, gy):
        w = self.params["weight"]
        return gy @ w, {"weight": gy.T @ cache}


class Bias(Layer):
    """Adds a per-feature (1-d input) or per-channel (3-d input) offset."""

    kind = "bias"

    def __init__(self, size: int, value=None) -> None:
        super().__init__()
        self.size = int(size)
        if value is None:
            value = np.zeros(self.size)
        self.params["bias"] = np.asarray(value, dtype=np.float64).reshape(self.size)

    def hyper(self):
        return {"size": self.size}

    def output_shape(self, in_shape):
        if in_shape[0] != self.size or len(in_shape) not in (1, 3):
            raise ValueError(f"bias of size {self.size} does not fit input {in_shape}")
        return in_shape

    def _view(self, ndim):
        return self.params["bias"].reshape((self.size,) + (1,) * (ndim - 2))

    def forward(self, x):
        return x + self._view(x.ndim), x.ndim

    def backward(self, cache, gy):
        axes = (0,) + tuple(range(2, cache))
        return gy, {"bias": gy.sum(axis=axes)}


class Conv2d(Layer):
    """2-d cross-correlation with per-output-channel bias."""

    kind = "conv2d"

    def __init__(self, n_in, n_out, kernel, stride=1, padding=0, weight=None, bias=None):
        super().__init__()
        self.n_in, self.n_out = int(n_in), int(n_out)
        self.kernel, self.stride, self.padding = int(kernel), int(stride), int(padding)
        if self.kernel < 1 or self.stride < 1 or self.padding < 0:
            raise ValueError("conv2d needs kernel >= 1, stride >= 1, padding >= 0")
        k = self.kernel
        if weight is None:
            weight = np.zeros((self.n_out, self.n_in, k, k))
        if bias is None:
            bias = np.zeros(self.n_out)
        self.params["weight"] = np.asarray(weight, dtype=np.float64).reshape(
            self.n_out, self.n_in, k, k
        )
        self.params["bias"] = np.asarray(bias, dtype=np.float64).reshape(self.n_out)

    def hyper(self):
        return {
            "in": self.n_in,
            "out": self.n_out,
            "kernel": self.kernel,
            "stride": self.stride,
            "padding": self.padding,
        }

    def output_shape(self, in_shape):
        if len(in_shape) != 3 or in_shape[0] != self.n_in:
            raise ValueError(f"conv2d expects ({self.n_in}, H, W), got {in_shape}")
        _, h, w = in_shape
        oh = (h + 2 * self.padding - self.kernel) // self.stride + 1
        ow = (w + 2 * self.padding - self.kernel) // self.stride + 1
        if oh < 1 or ow < 1:
            raise ValueError(f"conv2d output would be empty for input {in_shape}")
        return (self.n_out, oh, ow)

    def forward(self, x):
        p, s, k = self.padding, self.stride, self.kernel
        xp = np.pad(x, ((0, 0), (0, 0), (p, p), (p, p))) if p else x
        _, oh, ow = self.output_shape(x.shape[1:])
        # (B, Cin, oh, ow, k, k) strided view of every receptive field
        cols = sliding_window_view(xp, (k, k), axis=(2, 3))[:, :, : s * (oh - 1) + 1 : s, : s * (ow - 1) + 1 : s]
        y = np.tensordot(cols, self.params["weight"], axes=([1, 4, 5], [1, 2, 3]))
        y = y.transpose(0, 3, 1, 2) + self.params["bias"][None, :, None, None]
        return np.ascontiguousarray(y), (cols, xp.shape, x.shape)

    def backward(self, cache, gy):
        cols, xp_shape, x_shape = cache
        w = self.params["weight"]
        s, k, p = self.stride, self.kernel, self.padding
        oh, ow = gy.shape[2:]
        gw = np.tensordot(gy, cols, axes=([0, 2, 3], [0, 2, 3]))
        gxp = np.zeros(xp_shape)
        for di in range(k):
            for dj in range(k):
                contrib = np.tensordot(gy, w[:, :, di, dj], axes=([1], [0]))  # (B, oh, ow, Cin)
                gxp[:, :, di : di + s * (oh - 1) + 1 : s, dj : dj + s * (ow - 1) + 1 : s] += contrib.transpose(0, 3, 1, 2)
        gx = gxp[:, :, p : p + x_shape[2], p : p + x_shape[3]] if p else gxp
        return gx, {"weight": gw, "bias": gy.sum(axis=(0, 2, 3))}


class ReLU(Layer):
    kind = "relu"

    def forward(self, x):
        mask = x > 0
        return np.where(mask, x, 0.0), mask

    def backward(self, cache, gy):
        return np.where(cache, gy, 0.0), {}


class Flatten(Layer):
    kind = "flatten"

    def output_shape(self, in_shape):
        return (int(np.prod(in_shape)),)

    def forward(self, x):
        return x.reshape(x.shape[0], -1), x.shape

    def backward(self, cache, gy):
        return gy.reshape(cache), {}


class Softmax(Layer):
    kind = "softmax"

    def output_shape(self, in_shape):
        if len(in_shape) != 1:
            raise ValueError("softmax expects a 1-d input")
        return in_shape

    def forward(self, x):
        z = x - x.max(axis=1, keepdims=True)
        e = np.exp(z)
        y = e / e.sum(axis=1, keepdims=True)
        return y, y

    def backward(self, cache, gy):
        y = cache
        return y * (gy - (gy * y).sum(axis=1, keepdims=True)), {}


LAYER_KINDS = {cls.kind: cls for cls in (Dense, Bias, Conv2d, ReLU, Flatten, Softmax)}


@dataclass
class Network:
    """An ordered stack of layers with a fixed per-sample input shape."""

    layers: list[Layer]
    input_shape: tuple[int, ...]
    n_classes: int = field(init=False)

    def __post_init__(self) -> None:
        self.input_shape = tuple(int(d) for d in self.input_shape)
        shape = self.input_shape
        for layer in self.layers:
            shape = layer.output_shape(shape)
        if len(shape) != 1:
            raise ValueError(f"network must end in a vector, got shape {shape}")
        self.n_classes = shape[0]

    @property
    def ends_in_softmax(self) -> bool:
        return bool(self.layers) and self.layers[-1].kind == "softmax"

    def copy(self) -> "Network":
        return copy.deepcopy(self)

    def parameters(self) -> list[tuple[int, str, np.ndarray]]:
        return [(i, name, arr) for i, layer in enumerate(self.layers) for name, arr in layer.params.items()]

    def run(self, xb: np.ndarray, keep_tape: bool = False):
        tape = []
        h = xb
        for layer in self.layers:
            h, cache = layer.forward(h)
            if keep_tape:
                tape.append(cache)
        return h, tape

    def backprop(self, tape, gy):
        """Push ``gy`` back through the tape; returns input adjoint and param grads."""
        grads: dict[tuple[int, str], np.ndarray] = {}
        g = gy
        for i in range(len(self.layers) - 1, -1, -1):
            g, pg = self.layers[i].backward(tape[i], g)
            for name, val in pg.items():
                grads[(i, name)] = val
        return g, grads


def _as_batch(net: Network, x, batched: bool) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    want = net.input_shape
    got = x.shape[1:] if batched else x.shape
    if tuple(got) != want:
        raise ValueError(f"input shape {tuple(got)} does not match network input {want}")
    return x if batched else x[None]


def _check_finite(arr: np.ndarray, what: str) -> np.ndarray:
    if not np.all(np.isfinite(arr)):
        raise FloatingPointError(f"non-finite values in {what}")
    return arr


def forward_batch(net: Network, xb) -> np.ndarray:
    """Logits for a batch of inputs shaped ``(B, *net.input_shape)``."""
    xb = _as_batch(net, xb, batched=True)
    out, _ = net.run(xb)
    return _check_finite(out, "forward output")


def forward(net: Network, x) -> np.ndarray:
    """Logits (or probabilities if the last layer is softmax) for one input."""
    return forward_batch(net, _as_batch(net, x, batched=False))[0]


def grad_input_batch(net: Network, xb, class_index: int) -> tuple[np.ndarray, np.ndarray]:
    """Outputs and d(output[class_index])/d(input) for every sample of a batch."""
    if not 0 <= int(class_index) < net.n_classes:
        raise IndexError(f"class index {class_index} out of range for {net.n_classes} classes")
    xb = _as_batch(net, xb, batched=True)
    out, tape = net.run(xb, keep_tape=True)
    gy = np.zeros_like(out)
    gy[:, class_index] = 1.0
    gx, _ = net.backprop(tape, gy)
    return _check_finite(out, "forward output"), _check_finite(gx, "input gradient")


def grad_input(net: Network, x, class_index: int) -> np.ndarray:
    _, g = grad_input_batch(net, _as_batch(net, x, batched=False), class_index)
    return g[0]


def finite_diff_grad(net: Network, x, class_index: int, h: float = 1e-5) -> np.ndarray:
    """Central-difference gradient, one coordinate at a time (an oracle, not fast)."""
    if h <= 0:
        raise ValueError("step h must be positive")
    if not 0 <= int(class_index) < net.n_classes:
        raise IndexError(f"class index {class_index} out of range for {net.n_classes} classes")
    x = _as_batch(net, x, batched=False)[0]
    n = x.size
    probes = np.repeat(x.reshape(1, -1), 2 * n, axis=0)
    idx = np.arange(n)
    probes[2 * idx, idx] += h
    probes[2 * idx + 1, idx] -= h
    out = forward_batch(net, probes.reshape((2 * n,) + x.shape))[:, class_index]
    return ((out[0::2] - out[1::2]) / (2 * h)).reshape(x.shape)


def relu_pattern(net: Network, x) -> np.ndarray:
    """Concatenated on/off state of every ReLU unit for one input."""
    xb = _as_batch(net, x, batched=False)
    _, tape = net.run(xb, keep_tape=True)
    masks = [tape[i][0].ravel() for i, layer in enumerate(net.layers) if layer.kind == "relu"]
    return np.concatenate(masks) if masks else np.zeros(0, dtype=bool)

