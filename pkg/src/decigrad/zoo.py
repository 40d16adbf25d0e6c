"""Hand-constructed and randomly initialised networks used across the package.

All builders are deterministic functions of their arguments.
"""

from __future__ import annotations

import numpy as np

from .nn import Bias, Conv2d, Dense, Flatten, Network, ReLU

__all__ = [
    "build_example1",
    "build_linear",
    "build_constant",
    "plateau_case",
    "build_steep_logistic",
    "steep_suite",
    "random_network",
    "build_toy_cnn",
    "toy_suite",
]


def build_example1() -> Network:
    """Scalar network computing ``1 - relu(1 - x)``."""
    return Network(
        [
            Dense(1, 1, [[-1.0]]),
            Bias(1, [1.0]),
            ReLU(),
            Dense(1, 1, [[-1.0]]),
            Bias(1, [1.0]),
        ],
        (1,),
    )


def build_linear(weights) -> Network:
    """``F(x) = w . x`` over a flat input, single output."""
    w = np.asarray(weights, dtype=np.float64).ravel()
    return Network([Dense(w.size, 1, w[None, :])], (w.size,))


def build_constant(dim: int, value: float = 1.0) -> Network:
    """Output ``value`` regardless of the input."""
    return Network([Dense(dim, 1), Bias(1, [value])], (dim,))


def plateau_case(dim: int = 16, seed: int = 0, level: float = 1.0):
    """Network and input whose logit-alpha curve is flat on alpha in [0.5, 1].

    The output is ``min(w.x, level) + v.x`` where ``w.x`` reaches ``level`` at
    alpha = 0.5 and ``v`` is orthogonal to every point on the path, exactly in
    floating point: the input has equal-valued pairs and ``v`` holds matching
    +1/-1 entries on them. Input gradients stay non-zero on the plateau while
    the importance factor there is exactly 0.

    Returns ``(net, x)``; the baseline is all zeros.
    """
    if dim < 4 or dim % 2:
        raise ValueError("plateau_case needs an even dim >= 4")
    rng = np.random.default_rng(seed)
    half = rng.uniform(0.2, 1.0, dim // 2)
    x = np.repeat(half, 2)
    w = rng.uniform(0.1, 1.0, dim)
    w *= 2.0 * level / float(w @ x)
    v = np.zeros(dim)
    v[0::2] = rng.choice([-1.0, 1.0], dim // 2)
    v[1::2] = -v[0::2]
    shift = 100.0
    net = Network(
        [
            Dense(dim, 2, np.stack([-w, v])),
            Bias(2, [level, shift]),
            ReLU(),
            Dense(2, 1, [[-1.0, 1.0]]),
            Bias(1, [level - shift]),
        ],
        (dim,),
    )
    return net, x


def build_steep_logistic(
    side: int = 12,
    seed: int = 0,
    projections: int = 3,
    knots: int = 24,
    height: float = 8.0,
    centre: float = 0.12,
    width: float = 0.1,
) -> Network:
    """Network whose logit along a black-to-image path is a steep sigmoid.

    Each of ``projections`` positive linear read-outs ``u_j = w_j . x`` feeds a
    piecewise-linear interpolant of a logistic with a 90% rise of ``width``
    (in units of ``u``) around ``centre``, clamped flat outside the knots and
    anchored at 0 for ``u <= 0``. Weights are scaled so that ``u_j`` is close
    to 1 for images drawn by :func:`steep_suite`, which puts the decision
    region near alpha = ``centre``.
    """
    rng = np.random.default_rng(seed)
    d = side * side
    w = rng.uniform(0.0, 1.0, (projections, d))
    w /= w.sum(axis=1, keepdims=True) * 0.5  # mean pixel of suite images is 0.5
    steep = 2.0 * np.log(19.0) / width
    centres = centre + width * np.linspace(-0.25, 0.25, projections)
    rows, biases, coeffs = [], [], []
    for j in range(projections):
        lo, hi = centres[j] - 1.2 * width, centres[j] + 1.2 * width
        t = np.linspace(max(lo, 0.0), hi, knots + 1)
        vals = height / projections / (1.0 + np.exp(-steep * (t - centres[j])))
        slopes = np.diff(vals) / np.diff(t)
        dslope = np.diff(np.concatenate([[0.0], slopes, [0.0]]))
        # F_j(u) = sum_k dslope_k relu(u - t_k); flat below t_0 and above t_K
        for k in range(knots + 1):
            rows.append(w[j])
            biases.append(-t[k])
            coeffs.append(dslope[k])
    units = len(rows)
    return Network(
        [
            Flatten(),
            Dense(d, units, np.array(rows)),
            Bias(units, biases),
            ReLU(),
            Dense(units, 1, np.array(coeffs)[None, :]),
        ],
        (1, side, side),
    )


def steep_suite(n_images: int = 10, side: int = 12, seed: int = 0, **net_kw):
    """Steep-logistic network plus ``n_images`` seeded inputs in [0, 1]."""
    net = build_steep_logistic(side=side, seed=seed, **net_kw)
    rng = np.random.default_rng(seed + 1)
    images = np.round(rng.uniform(0.0, 1.0, (n_images, 1, side, side)) * 255.0) / 255.0
    return net, images


def _he(rng, shape, fan_in):
    return rng.normal(0.0, np.sqrt(2.0 / fan_in), shape)


def random_network(rng: np.random.Generator, conv: bool = False, n_classes: int = 3) -> Network:
    """Small random ReLU network with non-zero biases (dense or conv)."""
    if conv:
        side = int(rng.integers(5, 8))
        c1 = int(rng.integers(2, 4))
        layers = [
            Conv2d(1, c1, 3, stride=1, padding=1, weight=_he(rng, (c1, 1, 3, 3), 9), bias=rng.normal(0, 0.3, c1)),
            ReLU(),
            Conv2d(c1, 2, 3, stride=2, padding=0, weight=_he(rng, (2, c1, 3, 3), 9 * c1), bias=rng.normal(0, 0.3, 2)),
            ReLU(),
            Flatten(),
        ]
        probe = Network(layers, (1, side, side))
        flat = probe.n_classes
        layers += [Dense(flat, n_classes, _he(rng, (n_classes, flat), flat)), Bias(n_classes, rng.normal(0, 0.3, n_classes))]
        return Network(layers, (1, side, side))
    d = int(rng.integers(3, 9))
    h = int(rng.integers(4, 12))
    return Network(
        [
            Dense(d, h, _he(rng, (h, d), d)),
            Bias(h, rng.normal(0, 0.3, h)),
            ReLU(),
            Dense(h, h, _he(rng, (h, h), h)),
            Bias(h, rng.normal(0, 0.3, h)),
            ReLU(),
            Dense(h, n_classes, _he(rng, (n_classes, h), h)),
            Bias(n_classes, rng.normal(0, 0.3, n_classes)),
        ],
        (d,),
    )


def build_toy_cnn(side: int = 32, seed: int = 0, n_classes: int = 3) -> Network:
    """He-initialised CNN for the synthetic shapes task.

    Three stride-2 convolutions (8, 16, 16 channels) shrink the map before a
    32-unit dense layer and the class read-out.
    """
    rng = np.random.default_rng(seed)
    layers = [
        Conv2d(1, 8, 5, stride=2, padding=2, weight=_he(rng, (8, 1, 5, 5), 25)),
        ReLU(),
        Conv2d(8, 16, 3, stride=2, padding=1, weight=_he(rng, (16, 8, 3, 3), 72)),
        ReLU(),
        Conv2d(16, 16, 3, stride=2, padding=1, weight=_he(rng, (16, 16, 3, 3), 144)),
        ReLU(),
        Flatten(),
    ]
    flat = Network(layers, (1, side, side)).n_classes
    layers += [
        Dense(flat, 32, _he(rng, (32, flat), flat)),
        Bias(32),
        ReLU(),
        Dense(32, n_classes, _he(rng, (n_classes, 32), 32)),
        Bias(n_classes),
    ]
    return Network(layers, (1, side, side))


def toy_suite(n_cases: int = 20, seed: int = 0):
    """Random (net, x, baseline, class) cases mixing dense and conv networks."""
    rng = np.random.default_rng(seed)
    cases = []
    for i in range(n_cases):
        net = random_network(rng, conv=bool(i % 2))
        x = rng.uniform(0.0, 1.0, net.input_shape)
        baseline = np.zeros_like(x)
        cases.append((net, x, baseline, int(rng.integers(net.n_classes))))
    return cases
