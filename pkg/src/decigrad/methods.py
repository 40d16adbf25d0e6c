"""Dispatch from method identifiers to attribution functions."""

from __future__ import annotations

from .attribution import AttributionMap, gradient_map, idg_uniform, integrated_gradients, left_ig
from .nn import Network
from .sampling import ASConfig, idg_adaptive, ig_adaptive

METHODS = ("grad", "ig", "lig", "idg", "idg-as", "ig-as")


def attribute(
    net: Network,
    x,
    method: str,
    class_index: int,
    baseline=None,
    m: int = 50,
    N: int = 50,
    M: int = 50,
    tau: float = 0.9,
) -> AttributionMap:
    if method == "grad":
        return gradient_map(net, x, class_index)
    if method == "ig":
        return integrated_gradients(net, x, baseline, class_index, m)
    if method == "lig":
        return left_ig(net, x, baseline, class_index, m, tau)
    if method == "idg":
        return idg_uniform(net, x, baseline, class_index, m)
    if method == "idg-as":
        return idg_adaptive(net, x, baseline, class_index, ASConfig(N, M))
    if method == "ig-as":
        return ig_adaptive(net, x, baseline, class_index, ASConfig(N, M))
    raise ValueError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")
