"""Perturbation metrics for attribution maps.

Insertion and deletion follow the RISE game: pixels are revealed over a
blurred copy (insertion) or blacked out (deletion) in attribution order, a
fixed number per step, and the target-class softmax probability is recorded.
AIC and SIC reveal pixels on a geometric schedule over a block-wise blurred
copy and score either correctness of the argmax (AIC) or the probability
(SIC). Every curve is summarised by its trapezoidal area.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import uniform_filter

from .attribution import AttributionMap
from .io import write_rows
from .nn import Network, forward_batch
from .train import softmax

__all__ = [
    "MetricConfig",
    "PerturbationCurve",
    "rank_pixels",
    "box_widths",
    "blur_baseline",
    "block_blur",
    "linear_schedule",
    "geometric_schedule",
    "insertion_curve",
    "deletion_curve",
    "aic_curve",
    "sic_curve",
    "auc",
    "BatchReport",
    "evaluate_batch",
    "METRICS",
]

METRICS = ("insertion", "deletion", "aic", "sic")


@dataclass(frozen=True)
class MetricConfig:
    sigma: float = 5.0
    pixel_step: int | None = None  # None: image side length
    ratio: float = 2.0
    blocks: int = 8

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if self.pixel_step is not None and self.pixel_step < 1:
            raise ValueError("pixel step must be >= 1")
        if not self.ratio > 1:
            raise ValueError("geometric ratio must exceed 1")


@dataclass(frozen=True)
class PerturbationCurve:
    fractions: np.ndarray
    scores: np.ndarray
    kind: str

    def __post_init__(self):
        if len(self.fractions) != len(self.scores):
            raise ValueError("fractions and scores differ in length")

    @property
    def auc(self) -> float:
        return auc(self)

    def to_csv(self, path) -> None:
        write_rows(path, ("fraction", "score"), zip(map(float, self.fractions), map(float, self.scores)))


def rank_pixels(amap) -> np.ndarray:
    """Pixel indices (row-major over H x W) by descending channel-summed attribution."""
    v = np.asarray(amap.values if isinstance(amap, AttributionMap) else amap, dtype=np.float64)
    if v.ndim == 3:
        v = v.sum(axis=0)
    return np.argsort(-v.ravel(), kind="stable")


def box_widths(sigma: float, passes: int = 3) -> list[int]:
    """Odd box widths whose repeated application approximates a Gaussian."""
    ideal = math.sqrt(12.0 * sigma * sigma / passes + 1.0)
    lo = int(math.floor(ideal))
    if lo % 2 == 0:
        lo -= 1
    hi = lo + 2
    m_ideal = (12.0 * sigma * sigma - passes * lo * lo - 4 * passes * lo - 3 * passes) / (-4.0 * lo - 4.0)
    m = int(round(m_ideal))
    return [lo if i < m else hi for i in range(passes)]


def _spatial_blur(img: np.ndarray, sigma: float) -> np.ndarray:
    out = np.asarray(img, dtype=np.float64)
    size = [1] * (out.ndim - 2) + [0, 0]
    for w in box_widths(sigma):
        if w > 1:
            size[-2:] = [w, w]
            out = uniform_filter(out, size=size, mode="reflect")
    return out


def blur_baseline(image, sigma: float = 5.0) -> np.ndarray:
    """Three box-blur passes over the spatial axes (last two)."""
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    return _spatial_blur(image, sigma)


def block_blur(image, blocks: int = 8, sigma: float = 5.0) -> np.ndarray:
    """Blur each of ``blocks x blocks`` tiles independently."""
    img = np.asarray(image, dtype=np.float64)
    out = np.empty_like(img)
    h, w = img.shape[-2:]
    ys = np.linspace(0, h, blocks + 1).round().astype(int)
    xs = np.linspace(0, w, blocks + 1).round().astype(int)
    for y0, y1 in zip(ys[:-1], ys[1:]):
        for x0, x1 in zip(xs[:-1], xs[1:]):
            out[..., y0:y1, x0:x1] = _spatial_blur(img[..., y0:y1, x0:x1], sigma)
    return out


def linear_schedule(n_pixels: int, step: int) -> np.ndarray:
    counts = list(range(0, n_pixels, step)) + [n_pixels]
    return np.array(counts)


def geometric_schedule(n_pixels: int, ratio: float = 2.0) -> np.ndarray:
    """Pixel counts 0, 1, r, r^2, ... capped by a final ``n_pixels``."""
    counts, c = [0], 1.0
    while c < n_pixels:
        k = int(round(c))
        if k > counts[-1]:
            counts.append(k)
        c *= ratio
    counts.append(n_pixels)
    return np.array(counts)


def _scores(net: Network, batch: np.ndarray, class_index: int, kind: str) -> np.ndarray:
    out = forward_batch(net, batch)
    if kind == "aic":
        return (out.argmax(axis=1) == class_index).astype(np.float64)
    probs = out if net.ends_in_softmax else softmax(out)
    return probs[:, class_index]


def _target(net, image, class_index):
    if class_index is None:
        return int(forward_batch(net, image[None])[0].argmax())
    return int(class_index)


def _game(net, image, amap, start, source, counts, class_index, kind) -> PerturbationCurve:
    """Copy ``source`` pixels onto ``start`` in rank order, scoring at each count."""
    image = np.asarray(image, dtype=np.float64)
    class_index = _target(net, image, class_index)
    order = rank_pixels(amap)
    h, w = image.shape[-2:]
    n = h * w
    batch = np.empty((len(counts),) + image.shape)
    flat_start = start.reshape(-1, n)
    flat_src = source.reshape(-1, n)
    for r, c in enumerate(counts):
        cur = flat_start.copy()
        idx = order[:c]
        cur[:, idx] = flat_src[:, idx]
        batch[r] = cur.reshape(image.shape)
    scores = _scores(net, batch, class_index, kind)
    return PerturbationCurve(np.asarray(counts, dtype=np.float64) / n, scores, kind)


def _side_step(image, cfg: MetricConfig) -> int:
    return cfg.pixel_step if cfg.pixel_step is not None else int(np.asarray(image).shape[-1])


def insertion_curve(net, image, amap, cfg: MetricConfig = MetricConfig(), class_index=None) -> PerturbationCurve:
    image = np.asarray(image, dtype=np.float64)
    n = image.shape[-2] * image.shape[-1]
    counts = linear_schedule(n, _side_step(image, cfg))
    return _game(net, image, amap, blur_baseline(image, cfg.sigma), image, counts, class_index, "insertion")


def deletion_curve(net, image, amap, cfg: MetricConfig = MetricConfig(), class_index=None) -> PerturbationCurve:
    image = np.asarray(image, dtype=np.float64)
    n = image.shape[-2] * image.shape[-1]
    counts = linear_schedule(n, _side_step(image, cfg))
    return _game(net, image, amap, image, np.zeros_like(image), counts, class_index, "deletion")


def aic_curve(net, image, amap, cfg: MetricConfig = MetricConfig(), class_index=None) -> PerturbationCurve:
    image = np.asarray(image, dtype=np.float64)
    n = image.shape[-2] * image.shape[-1]
    start = block_blur(image, cfg.blocks, cfg.sigma)
    return _game(net, image, amap, start, image, geometric_schedule(n, cfg.ratio), class_index, "aic")


def sic_curve(net, image, amap, cfg: MetricConfig = MetricConfig(), class_index=None) -> PerturbationCurve:
    image = np.asarray(image, dtype=np.float64)
    n = image.shape[-2] * image.shape[-1]
    start = block_blur(image, cfg.blocks, cfg.sigma)
    return _game(net, image, amap, start, image, geometric_schedule(n, cfg.ratio), class_index, "sic")


CURVES = {"insertion": insertion_curve, "deletion": deletion_curve, "aic": aic_curve, "sic": sic_curve}


def auc(curve: PerturbationCurve) -> float:
    """Trapezoidal area under ``scores`` over ``fractions``."""
    x = np.asarray(curve.fractions, dtype=np.float64)
    y = np.asarray(curve.scores, dtype=np.float64)
    if x.size < 2:
        raise ValueError("need at least two curve points")
    return float(np.sum((x[1:] - x[:-1]) * (y[1:] + y[:-1]) / 2.0))


@dataclass
class BatchReport:
    method: str
    metrics: tuple[str, ...]
    per_image: np.ndarray  # (n_images, n_metrics)
    curves: list[dict[str, PerturbationCurve]] = field(default_factory=list, repr=False)

    @property
    def means(self) -> dict[str, float]:
        return {m: float(self.per_image[:, k].mean()) for k, m in enumerate(self.metrics)}

    def rows(self):
        for i in range(self.per_image.shape[0]):
            for k, m in enumerate(self.metrics):
                yield (i, m, self.method, float(self.per_image[i, k]))

    def to_csv(self, path) -> None:
        write_rows(path, ("image_id", "metric", "method", "auc"), self.rows())


def evaluate_batch(
    net: Network,
    images,
    attribute_fn,
    method: str = "custom",
    cfg: MetricConfig = MetricConfig(),
    metrics=METRICS,
    class_indices=None,
    jobs: int = 1,
) -> BatchReport:
    """AUC of every metric for every image.

    ``attribute_fn(net, image, class_index)`` returns an attribution map.
    Targets default to the predicted class of each original image. Results
    are ordered by image index whatever ``jobs`` is.
    """
    images = np.asarray(images, dtype=np.float64)
    if images.shape[0] == 0:
        raise ValueError("empty image set")
    metrics = tuple(metrics)
    for m in metrics:
        if m not in CURVES:
            raise ValueError(f"unknown metric {m!r}")
    if class_indices is None:
        class_indices = forward_batch(net, images).argmax(axis=1)

    def one(i):
        c = int(class_indices[i])
        amap = attribute_fn(net, images[i], c)
        return {m: CURVES[m](net, images[i], amap, cfg, c) for m in metrics}

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            curves = list(pool.map(one, range(images.shape[0])))
    else:
        curves = [one(i) for i in range(images.shape[0])]
    table = np.array([[auc(cv[m]) for m in metrics] for cv in curves])
    return BatchReport(method, metrics, table, curves)
