"""
====================================
Perturbation metrics on a toy CNN
====================================

Train the small CNN on synthetic squares, crosses and disks, then score
attribution methods with insertion and deletion games on held-out images.
Takes around half a minute on one core.
"""

# %%
# Data and training
# -----------------

from decigrad import MetricConfig, attribute, evaluate_batch
from decigrad.data import make_dataset
from decigrad.train import TrainConfig, train_toy
from decigrad.zoo import build_toy_cnn

train = make_dataset(count=300, side=32, seed=7)
result = train_toy(build_toy_cnn(32, seed=7), train.images, train.labels, TrainConfig(seed=7))
print(f"train accuracy {result.accuracy:.3f}")

held_out = make_dataset(count=102, side=32, seed=8).subset(slice(0, 30))

# %%
# Insertion (higher is better) and deletion (lower is better)
# -----------------------------------------------------------

for method in ("grad", "ig", "lig", "idg", "idg-as", "ig-as"):
    report = evaluate_batch(
        result.net,
        held_out.images,
        lambda net, x, c, m=method: attribute(net, x, m, c),
        method,
        MetricConfig(),
        ("insertion", "deletion"),
    )
    means = report.means
    print(f"{method:7s} insertion {means['insertion']:.4f}  deletion {means['deletion']:.4f}")
