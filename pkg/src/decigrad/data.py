"""Synthetic grayscale shapes dataset (square, cross, disk)."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .io import read_pgm, write_pgm, write_rows

CLASSES = ("square", "cross", "disk")


@dataclass(frozen=True)
class Dataset:
    images: np.ndarray  # (count, 1, side, side), values k/255
    labels: np.ndarray  # (count,) int
    masks: np.ndarray  # (count, 1, side, side) bool, ground-truth shape pixels

    def __len__(self) -> int:
        return len(self.labels)

    def subset(self, idx) -> "Dataset":
        return Dataset(self.images[idx], self.labels[idx], self.masks[idx])


def _shape_mask(kind: str, side: int, rng: np.random.Generator) -> np.ndarray:
    size = int(rng.integers(int(0.35 * side), int(0.55 * side) + 1))
    r0 = int(rng.integers(1, side - size))
    c0 = int(rng.integers(1, side - size))
    yy, xx = np.mgrid[0:side, 0:side]
    inside = (yy >= r0) & (yy < r0 + size) & (xx >= c0) & (xx < c0 + size)
    if kind == "square":
        return inside
    cy, cx = r0 + (size - 1) / 2.0, c0 + (size - 1) / 2.0
    if kind == "disk":
        return (yy - cy) ** 2 + (xx - cx) ** 2 <= (size / 2.0) ** 2
    arm = max(1.0, size / 6.0)
    return inside & ((np.abs(yy - cy) <= arm) | (np.abs(xx - cx) <= arm))


def make_dataset(kind: str = "shapes", count: int = 300, side: int = 32, seed: int = 0) -> Dataset:
    """Balanced batch of noisy shape images; image ``i`` has label ``i % 3``.

    Pixel values are multiples of 1/255 so the images survive an 8-bit PGM
    round trip bit-exactly.
    """
    if kind != "shapes":
        raise ValueError(f"unknown dataset kind {kind!r}")
    if side < 16:
        raise ValueError("side must be >= 16")
    if count < 1 or count % len(CLASSES):
        raise ValueError(f"count must be a positive multiple of {len(CLASSES)}")
    rng = np.random.default_rng(seed)
    images = np.empty((count, 1, side, side))
    masks = np.empty((count, 1, side, side), dtype=bool)
    labels = np.arange(count) % len(CLASSES)
    for i, lab in enumerate(labels):
        mask = _shape_mask(CLASSES[lab], side, rng)
        img = rng.uniform(0.0, 0.35, (side, side))
        level = rng.uniform(0.6, 0.9)
        img[mask] = level + rng.uniform(0.0, 0.1, int(mask.sum()))
        images[i, 0] = np.round(np.clip(img, 0.0, 1.0) * 255.0) / 255.0
        masks[i, 0] = mask
    return Dataset(images, labels, masks)


def write_dataset(ds: Dataset, directory) -> list[Path]:
    """One PGM per image plus ``labels.csv`` (``file,label``)."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    width = max(4, len(str(len(ds) - 1)))
    files = []
    for i, img in enumerate(ds.images):
        name = f"img_{i:0{width}d}.pgm"
        write_pgm(directory / name, img)
        files.append(directory / name)
    write_rows(directory / "labels.csv", ("file", "label"), ((f.name, int(lab)) for f, lab in zip(files, ds.labels)))
    return files


def read_dataset(directory):
    """Images and labels listed in ``labels.csv``; returns ``(images, labels, names)``."""
    directory = Path(directory)
    with open(directory / "labels.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    names = [r["file"] for r in rows]
    labels = np.array([int(r["label"]) for r in rows], dtype=int)
    if not rows:
        return np.empty((0,)), labels, names
    images = np.stack([read_pgm(directory / n) for n in names])
    return images, labels, names
