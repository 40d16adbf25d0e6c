"""Riemann-error analysis, saturation reports and the N/M sampling ablation."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .attribution import _path, idg_uniform, integrated_gradients
from .io import write_rows
from .metrics import MetricConfig, deletion_curve
from .nn import Network, forward_batch
from .path import DecisionRegion, ImportanceCurve, LogitCurve, decision_region, path_gradients
from .sampling import ASConfig, idg_adaptive, ig_adaptive

__all__ = [
    "ERROR_METHODS",
    "ErrorReport",
    "approx_error",
    "error_curve",
    "SaturationReport",
    "saturation_report",
    "AblationGrid",
    "ablation_nm",
]

ERROR_METHODS = ("idg", "ig", "idg-as", "ig-as")


def _attribution(net, x, baseline, c, n, method):
    if method == "idg":
        return idg_uniform(net, x, baseline, c, n).values
    if method == "ig":
        return integrated_gradients(net, x, baseline, c, n).values
    if method == "idg-as":
        return idg_adaptive(net, x, baseline, c, ASConfig(n, n)).values
    if method == "ig-as":
        return ig_adaptive(net, x, baseline, c, ASConfig(n, n)).values
    raise ValueError(f"unknown method {method!r}; choose from {', '.join(ERROR_METHODS)}")


def _reference(net, x, baseline, c, m_ref, method):
    # adaptive variants converge to the same integral as their uniform form
    return _attribution(net, x, baseline, c, m_ref, "idg" if method.startswith("idg") else "ig")


def _check_n(n, m_ref):
    if n < 1:
        raise ValueError("step count must be >= 1")
    if n > m_ref:
        raise ValueError(f"step count {n} exceeds the reference resolution {m_ref}")


def approx_error(net: Network, x, baseline=None, class_index: int = 0, n: int = 50, m_ref: int = 2000, method: str = "idg") -> float:
    """Mean absolute per-pixel gap between an ``n``-step attribution and an ``m_ref``-step one.

    For the adaptive methods ``n`` is used for both N and M. ``n == m_ref`` is
    allowed and gives 0 for the uniform methods.
    """
    _check_n(n, m_ref)
    ref = _reference(net, x, baseline, class_index, m_ref, method)
    est = _attribution(net, x, baseline, class_index, n, method)
    return float(np.mean(np.abs(est - ref)))


@dataclass(frozen=True)
class ErrorReport:
    n: tuple[int, ...]
    errors: np.ndarray
    m_ref: int
    method: str

    def __post_init__(self):
        if max(self.n) > self.m_ref:
            raise ValueError("reference resolution must cover every step count")

    def to_csv(self, path) -> None:
        write_rows(path, ("n", "epsilon"), zip(self.n, map(float, self.errors)))


def _targets(net, images, class_indices):
    if class_indices is None:
        return [int(c) for c in forward_batch(net, images).argmax(axis=1)]
    return [int(c) for c in class_indices]


def _map(fn, items, jobs):
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(i) for i in items]


def error_curve(
    net: Network,
    images,
    n_list,
    method: str = "idg",
    m_ref: int = 2000,
    baseline=None,
    class_indices=None,
    jobs: int = 1,
) -> ErrorReport:
    """Per-``n`` approximation error averaged over ``images``.

    The reference attribution is computed once per image. Classes default to
    each image's argmax.
    """
    images = np.asarray(images, dtype=np.float64)
    n_list = tuple(int(n) for n in n_list)
    if images.shape[0] == 0 or not n_list:
        raise ValueError("need at least one image and one step count")
    for n in n_list:
        _check_n(n, m_ref)
    targets = _targets(net, images, class_indices)

    def one(i):
        x, c = images[i], targets[i]
        ref = _reference(net, x, baseline, c, m_ref, method)
        return [float(np.mean(np.abs(_attribution(net, x, baseline, c, n, method) - ref))) for n in n_list]

    table = np.array(_map(one, range(images.shape[0]), jobs))
    return ErrorReport(n_list, table.mean(axis=0), m_ref, method)


@dataclass(frozen=True)
class SaturationReport:
    logits: LogitCurve
    importance: ImportanceCurve
    region: DecisionRegion
    inside_mass: float
    outside_mass: float

    @property
    def inside_fraction(self) -> float:
        total = self.inside_mass + self.outside_mass
        return self.inside_mass / total if total > 0 else 0.0

    def curve_rows(self):
        for a, f, g in zip(self.logits.alphas, self.logits.logits, self.importance.values):
            yield float(a), float(f), float(g)

    def to_csv(self, path) -> None:
        """Dense curve with columns ``alpha,logit,importance``."""
        write_rows(path, ("alpha", "logit", "importance"), self.curve_rows())

    def summary_csv(self, path) -> None:
        rows = [
            ("lo", self.region.lo),
            ("hi", self.region.hi),
            ("degenerate", int(self.region.degenerate)),
            ("inside_mass", self.inside_mass),
            ("outside_mass", self.outside_mass),
            ("inside_fraction", self.inside_fraction),
        ]
        write_rows(path, ("key", "value"), rows)


def saturation_report(
    net: Network,
    x,
    baseline=None,
    class_index: int = 0,
    resolution: int = 200,
    fraction: float = 0.9,
) -> SaturationReport:
    """Dense logit and importance curves with the decision region and |IF| mass split.

    Curves are sampled at ``k / resolution`` for k = 0..resolution. The mass
    of cell ``[a_k, a_k+1]`` is ``|F(a_k+1) - F(a_k)|``, the exact integral of
    ``|IF|`` over the cell whenever IF keeps its sign there, and it counts as
    inside when the cell lies in the decision region.
    """
    if resolution < 10:
        raise ValueError("resolution must be >= 10")
    path = _path(x, baseline)
    alphas = np.arange(resolution + 1, dtype=np.float64) / resolution
    _, imp, logits = path_gradients(net, path, alphas, class_index)
    curve = LogitCurve(alphas, logits, class_index)
    region = decision_region(curve, fraction)
    cells = np.abs(np.diff(logits))
    inside = (alphas[:-1] >= region.lo) & (alphas[1:] <= region.hi)
    return SaturationReport(
        curve,
        ImportanceCurve(alphas, imp),
        region,
        float(cells[inside].sum()),
        float(cells[~inside].sum()),
    )


@dataclass(frozen=True)
class AblationGrid:
    axis: str
    fixed: int
    swept: tuple[int, ...]
    aucs: np.ndarray

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.swept, self.swept[1:])):
            raise ValueError("swept values must be strictly increasing")

    def at(self, value: int) -> float:
        return float(self.aucs[self.swept.index(value)])

    def to_csv(self, path) -> None:
        write_rows(path, ("swept", "auc"), zip(self.swept, map(float, self.aucs)))


def ablation_nm(
    net: Network,
    images,
    axis: str = "N",
    fixed: int = 50,
    swept=(5, 10, 20, 50, 100),
    class_indices=None,
    cfg: MetricConfig = MetricConfig(),
    jobs: int = 1,
) -> AblationGrid:
    """Mean deletion AUC of adaptive IDG as N (or M) varies with the other held at ``fixed``."""
    if axis not in ("N", "M"):
        raise ValueError("axis must be 'N' or 'M'")
    swept = tuple(int(v) for v in swept)
    if not swept or any(not 1 <= v <= 200 for v in swept):
        raise ValueError("swept values must lie in [1, 200]")
    images = np.asarray(images, dtype=np.float64)
    if images.shape[0] == 0:
        raise ValueError("empty image set")
    targets = _targets(net, images, class_indices)

    def one(i):
        x, c = images[i], targets[i]
        row = []
        for v in swept:
            as_cfg = ASConfig(v, fixed) if axis == "N" else ASConfig(fixed, v)
            amap = idg_adaptive(net, x, None, c, as_cfg)
            row.append(deletion_curve(net, x, amap, cfg, c).auc)
        return row

    table = np.array(_map(one, range(images.shape[0]), jobs))
    return AblationGrid(axis, int(fixed), swept, table.mean(axis=0))
