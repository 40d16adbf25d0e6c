"""``decigrad`` command-line interface.

Exit codes: 0 on success, 2 for usage or validation errors, 3 for I/O
errors. Every command writes its outputs under ``--out`` and is
deterministic for a given ``--seed`` (default taken from ``DG_SEED``).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import zoo
from .attribution import normalize_for_display
from .data import make_dataset, read_dataset, write_dataset
from .experiments import ERROR_METHODS, ablation_nm, error_curve, saturation_report
from .io import FormatError, load_network, read_image, save_network, write_pgm, write_rows, write_tensor_csv
from .methods import METHODS, attribute
from .metrics import METRICS, MetricConfig, evaluate_batch
from .nn import forward
from .path import StraightLinePath, logit_curve
from .train import TrainConfig, train_toy

log = logging.getLogger("decigrad")

EXIT_OK, EXIT_USAGE, EXIT_IO = 0, 2, 3
MODEL_KINDS = ("example1", "toy-cnn", "steep", "plateau")
EXPERIMENTS = ("error-curve", "ablate-nm", "saturation")


class UsageError(Exception):
    pass


def _seed_default() -> int:
    raw = os.environ.get("DG_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"DG_SEED must be an integer, got {raw!r}") from None


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _str_list(choices):
    def parse(text: str) -> list[str]:
        items = [t.strip() for t in text.split(",") if t.strip()]
        bad = [t for t in items if t not in choices]
        if bad or not items:
            raise argparse.ArgumentTypeError(f"invalid choice {', '.join(bad) or text!r}; choose from {', '.join(choices)}")
        return items

    return parse


def _out_dir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_input(net, path):
    x = read_image(path)
    if x.shape != net.input_shape:
        if x.size != int(np.prod(net.input_shape)):
            raise UsageError(f"{path}: input shape {x.shape} does not fit model input {net.input_shape}")
        x = x.reshape(net.input_shape)
    return x


def _class_index(net, x, arg) -> int:
    if arg == "auto":
        return int(np.argmax(forward(net, x)))
    try:
        c = int(arg)
    except ValueError:
        raise UsageError(f"--class must be an integer or 'auto', got {arg!r}") from None
    if not 0 <= c < net.n_classes:
        raise UsageError(f"class {c} out of range for a {net.n_classes}-class model")
    return c


def _dataset(path, limit=None):
    d = Path(path)
    if not (d / "labels.csv").is_file():
        raise UsageError(f"{d}: no dataset found (missing labels.csv)")
    images, labels, names = read_dataset(d)
    if limit is not None:
        images, labels, names = images[:limit], labels[:limit], names[:limit]
    if len(labels) == 0:
        raise UsageError(f"{d}: dataset is empty")
    return images, labels, names


def _heatmap_image(values):
    v = np.asarray(values)
    if v.ndim == 3 and v.shape[0] > 1:
        v = np.abs(v).sum(axis=0)
    if v.ndim < 2:
        v = v.reshape(1, -1)
    return normalize_for_display(v)


def cmd_make_data(args) -> int:
    ds = make_dataset(args.kind, args.count, args.side, args.seed)
    files = write_dataset(ds, _out_dir(args.out))
    print(f"wrote {len(files)} images and labels.csv to {args.out}")
    return EXIT_OK


def cmd_make_model(args) -> int:
    x = None
    if args.kind == "example1":
        net, x = zoo.build_example1(), np.array([2.0])
    elif args.kind == "toy-cnn":
        net = zoo.build_toy_cnn(args.side, args.seed)
    elif args.kind == "steep":
        net, images = zoo.steep_suite(1, args.side, args.seed)
        x = images[0]
    else:
        net, x = zoo.plateau_case(seed=args.seed)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_network(net, out)
    if args.input_out and x is not None:
        write_tensor_csv(args.input_out, x)
    print(f"wrote {args.kind} model to {out}")
    return EXIT_OK


def cmd_train(args) -> int:
    if args.epochs < 1:
        raise UsageError("--epochs must be >= 1")
    images, labels, _ = _dataset(args.data)
    cfg = TrainConfig(args.lr, args.epochs, args.batch_size, args.seed)
    net = zoo.build_toy_cnn(images.shape[-1], args.seed)
    result = train_toy(net, images, labels, cfg)
    out = _out_dir(args.out)
    save_network(result.net, out / "model.dgnet")
    rows = ((h["epoch"], float(h["loss"]), float(h["accuracy"])) for h in result.history)
    write_rows(out / "train_log.csv", ("epoch", "loss", "accuracy"), rows)
    print(f"train accuracy {result.accuracy:.4f}; model written to {out / 'model.dgnet'}")
    return EXIT_OK


def cmd_attribute(args) -> int:
    net = load_network(args.model)
    x = _load_input(net, args.image)
    baseline = _load_input(net, args.baseline) if args.baseline else None
    c = _class_index(net, x, args.class_index)
    amap = attribute(net, x, args.method, c, baseline, args.m, args.N, args.M, args.tau)
    out = _out_dir(args.out)
    write_tensor_csv(out / "attribution.csv", amap.values)
    write_pgm(out / "heatmap.pgm", _heatmap_image(amap.values))
    if args.method in ("idg-as", "ig-as"):
        plan = amap.info.get("plan")
        if plan is not None:
            plan.to_csv(out / "plan.csv")
        else:
            write_rows(out / "plan.csv", ("region", "count", "node_alpha", "weight"), [])
        path = StraightLinePath(np.zeros_like(x) if baseline is None else baseline, x)
        knots = np.arange(args.N + 1, dtype=np.float64) / args.N
        logit_curve(net, path, knots, c).to_csv(out / "logit_curve.csv")
    flags = f" flags={','.join(amap.flags)}" if amap.flags else ""
    print(f"{args.method} class={c} sum={float(amap.values.sum())!r}{flags}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    net = load_network(args.model)
    images, _, _ = _dataset(args.data, args.limit)
    cfg = MetricConfig(sigma=args.sigma)
    out = _out_dir(args.out)
    per_image, summary = [], []
    for method in args.methods:
        def fn(n, x, c, method=method):
            return attribute(n, x, method, c, None, args.m, args.N, args.M, args.tau)

        report = evaluate_batch(net, images, fn, method, cfg, args.metrics, jobs=args.jobs)
        per_image.extend(report.rows())
        for metric, mean in report.means.items():
            summary.append((method, metric, mean))
            print(f"{method:7s} {metric:9s} {mean:.4f}")
    write_rows(out / "per_image.csv", ("image_id", "metric", "method", "auc"), per_image)
    write_rows(out / "summary.csv", ("method", "metric", "mean_auc"), summary)
    return EXIT_OK


def _experiment_images(args):
    if args.model is None:
        if args.data is not None:
            raise UsageError("--data needs --model")
        net, images = zoo.steep_suite(args.count, seed=args.seed)
        return net, images
    net = load_network(args.model)
    if args.data is None:
        raise UsageError("--model needs --data for this experiment")
    images, _, _ = _dataset(args.data, args.count)
    return net, images


def cmd_experiment(args) -> int:
    out = _out_dir(args.out)
    if args.name == "error-curve":
        net, images = _experiment_images(args)
        report = error_curve(net, images, args.n, args.method, args.m_ref, jobs=args.jobs)
        report.to_csv(out / "error_curve.csv")
        for n, e in zip(report.n, report.errors):
            print(f"n={n:5d} epsilon={e:.6g}")
    elif args.name == "saturation":
        if args.model is None:
            net, x = zoo.build_example1(), np.array([2.0])
        else:
            if args.image is None:
                raise UsageError("saturation with --model needs --image")
            net = load_network(args.model)
            x = _load_input(net, args.image)
        c = _class_index(net, x, args.class_index)
        rep = saturation_report(net, x, None, c, args.resolution, args.fraction)
        rep.to_csv(out / "saturation_curve.csv")
        rep.summary_csv(out / "saturation.csv")
        flag = " (degenerate)" if rep.region.degenerate else ""
        print(f"decision region [{rep.region.lo:.4g}, {rep.region.hi:.4g}]{flag}; inside mass {rep.inside_fraction:.3f}")
    else:
        if args.model is None or args.data is None:
            raise UsageError("ablate-nm needs --model and --data")
        net = load_network(args.model)
        images, _, _ = _dataset(args.data, args.count)
        grid = ablation_nm(net, images, args.axis, args.fixed, args.swept, jobs=args.jobs)
        grid.to_csv(out / "ablation.csv")
        for v, a in zip(grid.swept, grid.aucs):
            print(f"{args.axis}={v:4d} deletion_auc={a:.4f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="decigrad", description="Path attributions with importance-weighted gradients.")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = p.add_subparsers(dest="command", required=True)

    def seeded(sp):
        sp.add_argument("--seed", type=int, default=None, help="RNG seed (default: $DG_SEED or 0)")

    sp = sub.add_parser("make-data", help="generate the synthetic shapes dataset")
    sp.add_argument("--out", required=True)
    sp.add_argument("--count", type=int, default=300)
    sp.add_argument("--side", type=int, default=32)
    sp.add_argument("--kind", default="shapes")
    seeded(sp)
    sp.set_defaults(func=cmd_make_data)

    sp = sub.add_parser("make-model", help="write a built-in network to a weights file")
    sp.add_argument("--kind", choices=MODEL_KINDS, required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--side", type=int, default=None)
    sp.add_argument("--input-out", help="also write the model's reference input as a CSV tensor")
    seeded(sp)
    sp.set_defaults(func=cmd_make_model)

    sp = sub.add_parser("train", help="train the toy CNN on a dataset directory")
    sp.add_argument("--data", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--epochs", type=int, default=30)
    sp.add_argument("--lr", type=float, default=0.05)
    sp.add_argument("--batch-size", type=int, default=8)
    seeded(sp)
    sp.set_defaults(func=cmd_train)

    def method_args(sp):
        sp.add_argument("--m", type=int, default=50, help="uniform step count")
        sp.add_argument("--N", type=int, default=50, help="adaptive pre-characterisation regions")
        sp.add_argument("--M", type=int, default=50, help="adaptive integration nodes")
        sp.add_argument("--tau", type=float, default=0.9, help="Left-IG cut fraction")

    sp = sub.add_parser("attribute", help="attribution map for one input")
    sp.add_argument("--model", required=True)
    sp.add_argument("--image", required=True)
    sp.add_argument("--baseline")
    sp.add_argument("--method", choices=METHODS, default="idg-as")
    sp.add_argument("--class", dest="class_index", default="auto")
    sp.add_argument("--out", required=True)
    method_args(sp)
    seeded(sp)
    sp.set_defaults(func=cmd_attribute)

    sp = sub.add_parser("evaluate", help="perturbation-metric AUCs over a dataset")
    sp.add_argument("--model", required=True)
    sp.add_argument("--data", required=True)
    sp.add_argument("--methods", type=_str_list(METHODS), default=["ig", "idg-as"])
    sp.add_argument("--metrics", type=_str_list(METRICS), default=list(METRICS))
    sp.add_argument("--limit", type=int, default=None)
    sp.add_argument("--sigma", type=float, default=5.0)
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--out", required=True)
    method_args(sp)
    seeded(sp)
    sp.set_defaults(func=cmd_evaluate)

    sp = sub.add_parser("experiment", help="error curves, saturation reports and N/M ablation")
    sp.add_argument("name", choices=EXPERIMENTS)
    sp.add_argument("--model")
    sp.add_argument("--data")
    sp.add_argument("--image")
    sp.add_argument("--count", type=int, default=10)
    sp.add_argument("--n", type=_int_list, default=[10, 50, 250, 600])
    sp.add_argument("--method", choices=ERROR_METHODS, default="idg")
    sp.add_argument("--m-ref", type=int, default=2000)
    sp.add_argument("--class", dest="class_index", default="auto")
    sp.add_argument("--resolution", type=int, default=200)
    sp.add_argument("--fraction", type=float, default=0.9)
    sp.add_argument("--axis", choices=("N", "M"), default="N")
    sp.add_argument("--fixed", type=int, default=50)
    sp.add_argument("--swept", type=_int_list, default=[5, 10, 20, 50, 100])
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--out", required=True)
    seeded(sp)
    sp.set_defaults(func=cmd_experiment)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.seed is None:
            args.seed = _seed_default()
        if getattr(args, "side", 0) is None:
            args.side = 12 if args.kind == "steep" else 32
        return args.func(args)
    except UsageError as exc:
        print(f"decigrad: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, FormatError) as exc:
        print(f"decigrad: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, IndexError) as exc:
        print(f"decigrad: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
