"""Path-integral attributions on uniform grids: IG, Left-IG and IDG.

All uniform methods use left endpoints, alpha_k = k / m for k = 0..m-1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .nn import Network, forward, grad_input
from .path import StraightLinePath, path_gradients

__all__ = [
    "AttributionMap",
    "uniform_alphas",
    "gradient_map",
    "integrated_gradients",
    "left_ig",
    "idg_uniform",
    "idg_contributions",
    "path_attribution",
    "normalize_for_display",
]


@dataclass
class AttributionMap:
    values: np.ndarray
    method: str
    steps: int
    class_index: int
    flags: tuple[str, ...] = ()
    info: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not np.all(np.isfinite(self.values)):
            raise FloatingPointError(f"{self.method} produced non-finite attributions")


def uniform_alphas(m: int) -> np.ndarray:
    if m < 1:
        raise ValueError("step count must be >= 1")
    return np.arange(m, dtype=np.float64) / m


def _path(x, baseline) -> StraightLinePath:
    x = np.asarray(x, dtype=np.float64)
    baseline = np.zeros_like(x) if baseline is None else baseline
    return StraightLinePath(baseline, x)


def path_attribution(net: Network, path: StraightLinePath, class_index: int, alphas, weights, importance_weighted: bool):
    """``(x - x') * sum_k w_k grad(alpha_k) [* IF(alpha_k)]``.

    Returns ``(values, logits, importance)`` with the last two sampled at
    ``alphas``.
    """
    alphas = np.asarray(alphas, dtype=np.float64)
    grads, imp, logits = path_gradients(net, path, alphas, class_index)
    coef = np.asarray(weights, dtype=np.float64) * (imp if importance_weighted else 1.0)
    values = path.delta * np.tensordot(coef, grads, axes=1)
    return values, logits, imp


def gradient_map(net: Network, x, class_index: int) -> AttributionMap:
    """Plain input gradient (saliency), no path."""
    return AttributionMap(grad_input(net, x, class_index), "grad", 1, class_index)


def integrated_gradients(net: Network, x, baseline=None, class_index: int = 0, m: int = 50) -> AttributionMap:
    path = _path(x, baseline)
    alphas = uniform_alphas(m)
    values, logits, imp = path_attribution(net, path, class_index, alphas, np.full(m, 1.0 / m), False)
    return AttributionMap(values, "ig", m, class_index, info={"alphas": alphas, "logits": logits, "importance": imp})


def left_ig(net: Network, x, baseline=None, class_index: int = 0, m: int = 50, tau: float = 0.9) -> AttributionMap:
    """IG truncated at the first grid alpha whose logit reaches ``tau`` of the rise.

    With ``tau == 1`` no truncation happens and the result is exactly
    :func:`integrated_gradients`. A curve without positive rise falls back to
    full IG and carries the ``"no-rise"`` flag.
    """
    if not 0.0 < tau <= 1.0:
        raise ValueError("tau must lie in (0, 1]")
    if tau == 1.0:
        full = integrated_gradients(net, x, baseline, class_index, m)
        return AttributionMap(full.values, "lig", m, class_index, info=full.info)
    path = _path(x, baseline)
    alphas = uniform_alphas(m)
    grads, imp, logits = path_gradients(net, path, alphas, class_index)
    weights = np.full(m, 1.0 / m)
    rise = float(forward(net, path.input)[class_index]) - logits[0]
    flags = ()
    if rise > 0:
        reached = np.flatnonzero(logits >= logits[0] + tau * rise)
        stop = int(reached[0]) if reached.size else m - 1
    else:
        stop, flags = m - 1, ("no-rise",)
    values = path.delta * np.tensordot(weights[: stop + 1], grads[: stop + 1], axes=1)
    info = {"alphas": alphas, "logits": logits, "importance": imp, "cut_alpha": float(alphas[stop])}
    return AttributionMap(values, "lig", m, class_index, flags=flags, info=info)


def idg_uniform(net: Network, x, baseline=None, class_index: int = 0, m: int = 50) -> AttributionMap:
    """Importance-weighted gradient integral (IDG) on the uniform left-endpoint grid."""
    path = _path(x, baseline)
    alphas = uniform_alphas(m)
    values, logits, imp = path_attribution(net, path, class_index, alphas, np.full(m, 1.0 / m), True)
    return AttributionMap(values, "idg", m, class_index, info={"alphas": alphas, "logits": logits, "importance": imp})


def idg_contributions(net: Network, x, baseline=None, class_index: int = 0, alphas=None, weights=None):
    """Per-step IDG terms ``(x - x') grad(alpha_k) IF(alpha_k) w_k``.

    Returns ``(terms, importance)``; ``terms`` has one row per alpha.
    """
    path = _path(x, baseline)
    alphas = uniform_alphas(50) if alphas is None else np.asarray(alphas, dtype=np.float64)
    weights = np.full(alphas.size, 1.0 / alphas.size) if weights is None else np.asarray(weights, dtype=np.float64)
    grads, imp, _ = path_gradients(net, path, alphas, class_index)
    coef = (weights * imp).reshape((-1,) + (1,) * path.input.ndim)
    return path.delta * grads * coef, imp


def normalize_for_display(amap: AttributionMap) -> np.ndarray:
    """Min-max scale ``|values|`` to [0, 1]; a constant map gives zeros."""
    mag = np.abs(np.asarray(amap.values if isinstance(amap, AttributionMap) else amap, dtype=np.float64))
    lo, hi = mag.min(), mag.max()
    if hi == lo:
        return np.zeros_like(mag)
    return (mag - lo) / (hi - lo)
