"""Straight-line paths, logit-alpha curves and importance factors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .io import write_rows
from .nn import Network, forward_batch, grad_input_batch

__all__ = [
    "StraightLinePath",
    "LogitCurve",
    "ImportanceCurve",
    "DecisionRegion",
    "interpolate",
    "logit_curve",
    "importance_factor",
    "importance_curve",
    "importance_factor_fd",
    "decision_region",
    "path_gradients",
]

# gradient evaluations are chunked to bound memory on long alpha grids
CHUNK = 512


@dataclass(frozen=True)
class StraightLinePath:
    baseline: np.ndarray
    input: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.baseline, dtype=np.float64)
        x = np.asarray(self.input, dtype=np.float64)
        if b.shape != x.shape:
            raise ValueError(f"baseline shape {b.shape} differs from input shape {x.shape}")
        object.__setattr__(self, "baseline", b)
        object.__setattr__(self, "input", x)

    @property
    def delta(self) -> np.ndarray:
        return self.input - self.baseline

    def points(self, alphas) -> np.ndarray:
        """Interpolated inputs for every alpha, stacked on a new leading axis."""
        a = np.asarray(alphas, dtype=np.float64)
        shape = (-1,) + (1,) * self.input.ndim
        pts = self.baseline + a.reshape(shape) * self.delta
        # endpoints reproduce the path ends bitwise
        pts[a == 0.0] = self.baseline
        pts[a == 1.0] = self.input
        return pts


@dataclass(frozen=True)
class LogitCurve:
    alphas: np.ndarray
    logits: np.ndarray
    class_index: int

    def __post_init__(self):
        if len(self.alphas) != len(self.logits):
            raise ValueError("alphas and logits differ in length")
        if np.any(np.diff(self.alphas) <= 0):
            raise ValueError("alphas must be strictly ascending")

    def to_csv(self, path) -> None:
        _write_columns(path, ("alpha", "logit"), self.alphas, self.logits)


@dataclass(frozen=True)
class ImportanceCurve:
    alphas: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if len(self.alphas) != len(self.values):
            raise ValueError("alphas and values differ in length")

    def to_csv(self, path) -> None:
        _write_columns(path, ("alpha", "importance"), self.alphas, self.values)


@dataclass(frozen=True)
class DecisionRegion:
    lo: float
    hi: float
    degenerate: bool = False

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def __iter__(self):
        return iter((self.lo, self.hi))


def _write_columns(path, header, *cols):
    write_rows(path, header, ([float(v) for v in row] for row in zip(*cols)))


def _check_alpha(alpha) -> float:
    alpha = float(alpha)
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha={alpha} outside [0, 1]")
    return alpha


def interpolate(path: StraightLinePath, alpha: float) -> np.ndarray:
    """``x' + alpha (x - x')``."""
    return path.points([_check_alpha(alpha)])[0]


def logit_curve(net: Network, path: StraightLinePath, alphas, class_index: int) -> LogitCurve:
    alphas = np.asarray(alphas, dtype=np.float64)
    if alphas.size and (alphas[0] < 0.0 or alphas[-1] > 1.0):
        raise ValueError("alphas must lie in [0, 1]")
    if not 0 <= class_index < net.n_classes:
        raise IndexError(f"class index {class_index} out of range")
    logits = np.empty(alphas.size)
    for s in range(0, alphas.size, CHUNK):
        logits[s : s + CHUNK] = forward_batch(net, path.points(alphas[s : s + CHUNK]))[:, class_index]
    return LogitCurve(alphas, logits, class_index)


def path_gradients(net: Network, path: StraightLinePath, alphas, class_index: int):
    """Input gradients and importance factors at each alpha.

    Returns ``(grads, importance, logits)``; ``grads`` has shape
    ``(len(alphas),) + input shape``. One backward pass per alpha serves both
    the gradient and its importance factor ``grad . (x - x')``.
    """
    alphas = np.asarray(alphas, dtype=np.float64)
    grads = np.empty((alphas.size,) + path.input.shape)
    logits = np.empty(alphas.size)
    for s in range(0, alphas.size, CHUNK):
        out, g = grad_input_batch(net, path.points(alphas[s : s + CHUNK]), class_index)
        grads[s : s + CHUNK] = g
        logits[s : s + CHUNK] = out[:, class_index]
    flat = grads.reshape(alphas.size, -1)
    importance = flat @ path.delta.ravel()
    return grads, importance, logits


def importance_factor(net: Network, path: StraightLinePath, alpha: float, class_index: int = 0) -> float:
    """dF/dalpha at ``alpha`` by the chain rule."""
    _, imp, _ = path_gradients(net, path, [_check_alpha(alpha)], class_index)
    return float(imp[0])


def importance_curve(net: Network, path: StraightLinePath, alphas, class_index: int = 0) -> ImportanceCurve:
    alphas = np.asarray(alphas, dtype=np.float64)
    _, imp, _ = path_gradients(net, path, alphas, class_index)
    return ImportanceCurve(alphas, imp)


def importance_factor_fd(curve: LogitCurve) -> ImportanceCurve:
    """Forward-difference slope of a sampled curve, attached at the left knot."""
    if len(curve.alphas) < 2:
        raise ValueError("need at least two curve points")
    slope = np.diff(curve.logits) / np.diff(curve.alphas)
    return ImportanceCurve(curve.alphas[:-1].copy(), slope)


def decision_region(curve: LogitCurve, fraction: float = 0.9) -> DecisionRegion:
    """Shortest alpha interval over which the logit gains ``fraction`` of its net rise.

    The rise is measured between the first and last curve samples. Ties go to
    the interval with the smaller lower end. A curve without a positive rise
    yields ``[alphas[0], alphas[-1]]`` flagged as degenerate.
    """
    if not 0.0 < fraction < 1.0:
        raise ValueError("fraction must lie in (0, 1)")
    a, f = curve.alphas, curve.logits
    total = f[-1] - f[0]
    if not total > 0:
        return DecisionRegion(float(a[0]), float(a[-1]), degenerate=True)
    need = fraction * total
    best = (np.inf, 0, len(a) - 1)
    for i in range(len(a) - 1):
        hits = np.flatnonzero(f[i + 1 :] - f[i] >= need)
        if hits.size == 0:
            continue
        j = i + 1 + hits[0]
        width = a[j] - a[i]
        # widths equal up to rounding count as ties
        if width < best[0] - 1e-12:
            best = (width, i, j)
    _, i, j = best
    return DecisionRegion(float(a[i]), float(a[j]))
