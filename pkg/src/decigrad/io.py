"""File formats: ``DGNET1`` weights, plain PGM images and CSV tensors.

Floats are written with ``repr`` (shortest round-trip form), so every write
followed by a read reproduces the values bit for bit.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .nn import LAYER_KINDS, Bias, Conv2d, Dense, Network

MAGIC = "DGNET1"


class FormatError(ValueError):
    pass


def _fmt(v) -> str:
    return repr(float(v))


def save_network(net: Network, path) -> None:
    lines = [MAGIC, "input " + " ".join(str(d) for d in net.input_shape), f"layers {len(net.layers)}"]
    for layer in net.layers:
        hp = " ".join(f"{k}={v}" for k, v in layer.hyper().items())
        lines.append(f"{layer.kind} {hp}".rstrip())
    lines.append("params")
    for layer in net.layers:
        for arr in layer.params.values():
            lines.extend(_fmt(v) for v in arr.ravel())
    Path(path).write_text("\n".join(lines) + "\n")


def _make_layer(kind: str, hp: dict[str, int]):
    if kind not in LAYER_KINDS:
        raise FormatError(f"unknown layer kind {kind!r}")
    if kind == "dense":
        return Dense(hp["in"], hp["units"])
    if kind == "bias":
        return Bias(hp["size"])
    if kind == "conv2d":
        return Conv2d(hp["in"], hp["out"], hp["kernel"], hp["stride"], hp["padding"])
    return LAYER_KINDS[kind]()


def load_network(path) -> Network:
    lines = Path(path).read_text().split("\n")
    if not lines or lines[0].strip() != MAGIC:
        raise FormatError(f"{path}: missing {MAGIC} header")
    try:
        input_shape = tuple(int(t) for t in lines[1].split()[1:])
        n_layers = int(lines[2].split()[1])
        layers = []
        for line in lines[3 : 3 + n_layers]:
            kind, *rest = line.split()
            hp = {k: int(v) for k, v in (tok.split("=") for tok in rest)}
            layers.append(_make_layer(kind, hp))
        if lines[3 + n_layers].strip() != "params":
            raise FormatError(f"{path}: expected 'params' section")
        values = np.array([float(t) for t in " ".join(lines[4 + n_layers :]).split()])
    except (IndexError, ValueError, KeyError) as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(f"{path}: malformed weights file ({exc})") from exc
    pos = 0
    for layer in layers:
        for name, arr in layer.params.items():
            n = arr.size
            if pos + n > values.size:
                raise FormatError(f"{path}: too few parameter values")
            layer.params[name] = values[pos : pos + n].reshape(arr.shape).copy()
            pos += n
    if pos != values.size:
        raise FormatError(f"{path}: {values.size - pos} surplus parameter values")
    return Network(layers, input_shape)


def write_pgm(path, image, maxval: int = 255) -> None:
    """Plain (P2) PGM of a 2-d array or a (1, H, W) tensor with values in [0, 1]."""
    img = np.asarray(image, dtype=np.float64)
    if img.ndim == 3 and img.shape[0] == 1:
        img = img[0]
    if img.ndim != 2:
        raise ValueError(f"PGM needs a 2-d image, got shape {img.shape}")
    q = np.round(np.clip(img, 0.0, 1.0) * maxval).astype(int)
    h, w = q.shape
    rows = "\n".join(" ".join(str(v) for v in row) for row in q)
    Path(path).write_text(f"P2\n{w} {h}\n{maxval}\n{rows}\n")


def read_pgm(path) -> np.ndarray:
    """Read a plain PGM into a (1, H, W) float array scaled to [0, 1]."""
    tokens = []
    for line in Path(path).read_text().splitlines():
        tokens.extend(line.split("#", 1)[0].split())
    if not tokens or tokens[0] != "P2":
        raise FormatError(f"{path}: not a plain PGM (P2) file")
    w, h, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    vals = np.array([int(t) for t in tokens[4 : 4 + w * h]], dtype=np.float64)
    if vals.size != w * h:
        raise FormatError(f"{path}: expected {w * h} pixels, found {vals.size}")
    return (vals / maxval).reshape(1, h, w)


def write_tensor_csv(path, arr) -> None:
    arr = np.asarray(arr, dtype=np.float64)
    lines = ["shape:" + ",".join(str(d) for d in arr.shape)]
    lines.extend(_fmt(v) for v in arr.ravel())
    Path(path).write_text("\n".join(lines) + "\n")


def read_tensor_csv(path) -> np.ndarray:
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("shape:"):
        raise FormatError(f"{path}: missing 'shape:' header")
    spec = lines[0][len("shape:") :].strip()
    shape = tuple(int(t) for t in spec.split(",")) if spec else ()
    vals = np.array([float(v) for v in lines[1:]])
    if vals.size != int(np.prod(shape)):
        raise FormatError(f"{path}: shape {shape} needs {int(np.prod(shape))} values, found {vals.size}")
    return vals.reshape(shape)


def read_image(path) -> np.ndarray:
    """PGM or CSV tensor, chosen by extension."""
    return read_pgm(path) if str(path).lower().endswith(".pgm") else read_tensor_csv(path)


def write_rows(path, header, rows) -> None:
    """CSV with a header; floats in round-trip form."""
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(header)
        for row in rows:
            wr.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
