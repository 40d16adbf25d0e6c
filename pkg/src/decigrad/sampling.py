"""Adaptive non-uniform path sampling driven by logit growth.

A first pass probes the logit at N + 1 uniform knots. The M integration nodes
are then shared out between the N regions in proportion to each region's
(non-negative) logit gain, and each region is subdivided uniformly among its
nodes. IDG or IG is finally evaluated on those nodes with per-node weights
equal to the sub-interval widths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .attribution import AttributionMap, _path, idg_uniform, integrated_gradients, path_attribution
from .io import write_rows
from .nn import Network
from .path import StraightLinePath, logit_curve

__all__ = [
    "ASConfig",
    "SamplingPlan",
    "EmptyPlanError",
    "precharacterize",
    "allocate_samples",
    "build_plan",
    "idg_adaptive",
    "ig_adaptive",
]


class EmptyPlanError(ValueError):
    """Raised when a plan would contain no integration nodes."""


@dataclass(frozen=True)
class ASConfig:
    N: int = 50
    M: int = 50

    def __post_init__(self):
        if self.N < 1 or self.M < 1:
            raise ValueError("N and M must both be >= 1")


@dataclass(frozen=True)
class SamplingPlan:
    n_regions: int
    counts: tuple[int, ...]
    nodes: np.ndarray
    weights: np.ndarray
    regions: np.ndarray

    @property
    def covered(self) -> float:
        """Fraction of [0, 1] spanned by regions that received nodes."""
        return sum(1 for c in self.counts if c > 0) / self.n_regions

    @property
    def fully_covered(self) -> bool:
        return all(c > 0 for c in self.counts)

    def to_csv(self, path) -> None:
        rows = ((int(r), self.counts[r], float(a), float(w)) for r, a, w in zip(self.regions, self.nodes, self.weights))
        write_rows(path, ("region", "count", "node_alpha", "weight"), rows)


def precharacterize(net: Network, path: StraightLinePath, N: int, class_index: int = 0) -> np.ndarray:
    """Logit gain over each of the N uniform regions (N + 1 forward passes)."""
    if N < 1:
        raise ValueError("N must be >= 1")
    knots = np.arange(N + 1, dtype=np.float64) / N
    return np.diff(logit_curve(net, path, knots, class_index).logits)


def allocate_samples(deltas, M: int) -> list[int]:
    """Largest-remainder apportionment of M nodes by clamped logit gain.

    Negative gains count as zero. If no region gains, M is spread uniformly
    with the remainder going to the lowest-index regions.
    """
    deltas = np.asarray(deltas, dtype=np.float64)
    n = deltas.size
    if M < 1 or n < 1:
        raise ValueError("need M >= 1 and at least one region")
    gain = np.maximum(deltas, 0.0)
    total = gain.sum()
    if not total > 0:
        base, extra = divmod(M, n)
        return [base + (1 if i < extra else 0) for i in range(n)]
    quota = gain / total * M
    counts = [int(math.floor(q)) for q in quota]
    left = M - sum(counts)
    # ties on the remainder resolve to the lower region index
    order = sorted(range(n), key=lambda i: (-(quota[i] - counts[i]), i))
    for i in order[:left]:
        counts[i] += 1
    return counts


def build_plan(counts, N: int) -> SamplingPlan:
    """Nodes ``i/N + j/(N c_i)`` with weights ``1/(N c_i)`` for each region i."""
    counts = tuple(int(c) for c in counts)
    if len(counts) != N:
        raise ValueError(f"expected {N} region counts, got {len(counts)}")
    if any(c < 0 for c in counts):
        raise ValueError("region counts must be non-negative")
    if sum(counts) == 0:
        raise EmptyPlanError("plan has no nodes")
    nodes, weights, regions = [], [], []
    for i, c in enumerate(counts):
        for j in range(c):
            nodes.append(i / N + j / (N * c))
            weights.append(1.0 / (N * c))
            regions.append(i)
    return SamplingPlan(N, counts, np.array(nodes), np.array(weights), np.array(regions, dtype=int))


def plan_for(net: Network, path: StraightLinePath, cfg: ASConfig, class_index: int = 0):
    """Pre-characterise the path and build its plan; ``None`` if the curve never rises."""
    deltas = precharacterize(net, path, cfg.N, class_index)
    if not np.maximum(deltas, 0.0).sum() > 0:
        return None, deltas
    return build_plan(allocate_samples(deltas, cfg.M), cfg.N), deltas


def _adaptive(net, x, baseline, class_index, cfg: ASConfig, importance_weighted: bool, method: str):
    path = _path(x, baseline)
    fallback = idg_uniform if importance_weighted else integrated_gradients
    try:
        plan, deltas = plan_for(net, path, cfg, class_index)
    except EmptyPlanError:
        plan, deltas = None, None
    if plan is None:
        amap = fallback(net, x, baseline, class_index, cfg.M)
        return AttributionMap(amap.values, method, cfg.M, class_index, flags=("uniform-fallback",), info=amap.info)
    values, logits, imp = path_attribution(net, path, class_index, plan.nodes, plan.weights, importance_weighted)
    flags = () if plan.fully_covered else ("uncovered-measure",)
    info = {"plan": plan, "deltas": deltas, "alphas": plan.nodes, "logits": logits, "importance": imp}
    return AttributionMap(values, method, cfg.M, class_index, flags=flags, info=info)


def idg_adaptive(net: Network, x, baseline=None, class_index: int = 0, cfg: ASConfig = ASConfig()) -> AttributionMap:
    """IDG on the adaptive plan. A curve with no rise falls back to uniform IDG."""
    return _adaptive(net, x, baseline, class_index, cfg, True, "idg-as")


def ig_adaptive(net: Network, x, baseline=None, class_index: int = 0, cfg: ASConfig = ASConfig()) -> AttributionMap:
    """IG (no importance weighting) on the adaptive plan."""
    return _adaptive(net, x, baseline, class_index, cfg, False, "ig-as")
