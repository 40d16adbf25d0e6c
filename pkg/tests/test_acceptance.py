"""Acceptance checks, one per criterion, each printing a PASS/FAIL line.

Run under pytest for the suite, or directly (``python3 tests/test_acceptance.py``)
for just the eleven result lines. Criteria that this toy setting does not
reproduce are marked ``xfail(strict=True)``: the check runs at full strength,
reports FAIL, and the suite flags it if it ever starts passing.
"""

from __future__ import annotations

import contextlib
import functools
import io
import sys
import tempfile
import time
from pathlib import Path

import numpy as np
import pytest

from decigrad.attribution import gradient_map, idg_contributions, idg_uniform, integrated_gradients, uniform_alphas
from decigrad.cli import main as cli
from decigrad.data import make_dataset
from decigrad.experiments import ablation_nm, error_curve
from decigrad.methods import attribute
from decigrad.metrics import MetricConfig, evaluate_batch
from decigrad.nn import finite_diff_grad, forward, grad_input, relu_pattern
from decigrad.path import StraightLinePath, logit_curve, path_gradients
from decigrad.sampling import allocate_samples, build_plan
from decigrad.train import TrainConfig, train_toy
from decigrad.zoo import build_example1, build_toy_cnn, plateau_case, random_network, steep_suite, toy_suite

RESULTS: dict[int, str] = {}

TRAIN_SEED = 7
HELD_OUT_SEED = 8


def record(n: int, ok: bool, detail: str) -> bool:
    line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[n] = line
    print(line)
    return ok


@functools.lru_cache(maxsize=None)
def trained_toy():
    """Toy CNN trained on 300 shapes (seed 7) plus 100 held-out images (seed 8)."""
    train = make_dataset(count=300, side=32, seed=TRAIN_SEED)
    result = train_toy(build_toy_cnn(32, TRAIN_SEED), train.images, train.labels, TrainConfig(seed=TRAIN_SEED))
    # 100 is not a multiple of the class count; draw 102 and keep the first 100
    held_out = make_dataset(count=102, side=32, seed=HELD_OUT_SEED).subset(slice(0, 100))
    return result, held_out


@functools.lru_cache(maxsize=None)
def toy_scores(method: str) -> np.ndarray:
    """(100, 2) insertion and deletion AUCs of ``method`` on the held-out set."""
    result, held_out = trained_toy()
    rep = evaluate_batch(
        result.net,
        held_out.images,
        lambda net, x, c: attribute(net, x, method, c),
        method,
        MetricConfig(),
        ("insertion", "deletion"),
    )
    return rep.per_image


# 1 ---------------------------------------------------------------------------
def check_1() -> bool:
    t0 = time.perf_counter()
    net, x = build_example1(), np.array([2.0])
    g = float(gradient_map(net, x, 0).values[0])
    ig = integrated_gradients(net, x, m=512).values[0]
    idg = idg_uniform(net, x, m=512).values[0]
    dt = time.perf_counter() - t0
    ok = g == 0.0 and abs(ig - 1.0) <= 2e-3 and abs(idg - 2.0) <= 1e-2 and dt < 1.0
    return record(1, ok, f"grad={g!r} IG(512)={ig:.6f} IDG(512)={idg:.6f} time={dt:.3f}s")


# 2 ---------------------------------------------------------------------------
def _near_kink(net, x, h) -> bool:
    base = relu_pattern(net, x)
    flat = x.ravel()
    for k in range(flat.size):
        for s in (h, -h):
            y = flat.copy()
            y[k] += s
            if not np.array_equal(relu_pattern(net, y.reshape(x.shape)), base):
                return True
    return False


def check_2() -> bool:
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst = 0.0
    for i in range(100):
        net = random_network(rng, conv=bool(i % 2))
        c = int(rng.integers(net.n_classes))
        x = rng.uniform(-1.0, 1.0, net.input_shape)
        while _near_kink(net, x, 1e-5):
            x = rng.uniform(-1.0, 1.0, net.input_shape)
        g = grad_input(net, x, c)
        fd = finite_diff_grad(net, x, c, 1e-5)
        rel = np.linalg.norm(g - fd) / max(np.linalg.norm(g), np.linalg.norm(fd), 1e-12)
        worst = max(worst, rel)
    dt = time.perf_counter() - t0
    return record(2, worst <= 1e-6 and dt < 30.0, f"max relative error {worst:.2e} over 100 networks, time={dt:.1f}s")


# 3 ---------------------------------------------------------------------------
def check_3() -> bool:
    worst, h = 0.0, 1e-6
    for net, x, b, c in toy_suite(20, seed=0):
        path = StraightLinePath(b, x)
        alphas = (np.arange(50) + 0.37) / 50
        _, imp, _ = path_gradients(net, path, alphas, c)
        fd = (logit_curve(net, path, alphas + h, c).logits - logit_curve(net, path, alphas - h, c).logits) / (2 * h)
        worst = max(worst, float(np.abs(imp - fd).max()))
    return record(3, worst <= 1e-3, f"max |IF - slope| = {worst:.2e} over 20 paths x 50 alphas")


# 4 ---------------------------------------------------------------------------
def check_4() -> bool:
    total_zero, bad = 0, 0
    for seed in range(5):
        net, x = plateau_case(seed=seed)
        terms, imp = idg_contributions(net, x, None, 0, uniform_alphas(100))
        zero = imp == 0.0
        total_zero += int(zero.sum())
        bad += int(np.count_nonzero(terms[zero]))
    ok = total_zero > 0 and bad == 0
    return record(4, ok, f"{total_zero} samples with IF == 0, {bad} non-zero terms among them")


# 5 ---------------------------------------------------------------------------
def check_5() -> bool:
    worst = 0.0
    for net, x, b, c in toy_suite(20, seed=0):
        s = integrated_gradients(net, x, b, c, 4096).values.sum()
        gap = float(forward(net, x)[c] - forward(net, b)[c])
        worst = max(worst, abs(s - gap) / max(1.0, abs(gap)))
    return record(5, worst <= 1e-3, f"max |sum IG - dF| / max(1, |dF|) = {worst:.2e} at m=4096")


# 6 ---------------------------------------------------------------------------
def check_6() -> bool:
    rng = np.random.default_rng(6)
    sums_ok, weight_err = True, 0.0
    for M in (10, 50, 250):
        for _ in range(1000):
            n = int(rng.integers(1, 101))
            deltas = rng.normal(size=n) * rng.choice([0.0, 1.0], size=n, p=[0.3, 0.7])
            counts = allocate_samples(deltas, M)
            sums_ok &= sum(counts) == M
            plan = build_plan(counts, n)
            weight_err = max(weight_err, abs(plan.weights.sum() - plan.covered))
    ok = sums_ok and weight_err <= 1e-12
    return record(6, ok, f"counts sum to M: {sums_ok}; max |sum w - covered| = {weight_err:.1e}")


# 7 ---------------------------------------------------------------------------
@functools.lru_cache(maxsize=None)
def steep_errors():
    t0 = time.perf_counter()
    net, images = steep_suite(10)
    uni = error_curve(net, images, [10, 50, 250, 600], "idg", m_ref=2000)
    ada = error_curve(net, images, [50], "idg-as", m_ref=2000)
    return uni, float(ada.errors[0]), time.perf_counter() - t0


@functools.lru_cache(maxsize=None)
def check_7() -> tuple[bool, bool, bool]:
    uni, as50, dt = steep_errors()
    u50, u600 = float(uni.errors[1]), float(uni.errors[3])
    a = as50 <= u50
    b = as50 <= 1.25 * u600
    c = bool(np.all(np.diff(uni.errors) < 0)) and dt < 120.0
    eps = ", ".join(f"{e:.4g}" for e in uni.errors)
    detail = (
        f"eps(AS 50/50)={as50:.4g} vs uniform50={u50:.4g} [{'ok' if a else 'no'}]; "
        f"vs 1.25*uniform600={1.25 * u600:.4g} [{'ok' if b else 'no'}]; "
        f"curve n=10,50,250,600: {eps} [{'decreasing' if c else 'not decreasing'}]; time={dt:.1f}s"
    )
    record(7, a and b and c, detail)
    return a, b, c


# 8 ---------------------------------------------------------------------------
@functools.lru_cache(maxsize=None)
def check_8() -> tuple[bool, bool]:
    t0 = time.perf_counter()
    result, _ = trained_toy()
    ig, lig, idg = toy_scores("ig"), toy_scores("lig"), toy_scores("idg-as")
    dt = time.perf_counter() - t0
    trained = result.accuracy >= 0.90
    ins_mean = idg[:, 0].mean() > ig[:, 0].mean()
    del_mean = idg[:, 1].mean() < ig[:, 1].mean()
    del_lig = idg[:, 1].mean() < lig[:, 1].mean()
    win_ins = float(np.mean(idg[:, 0] > ig[:, 0]))
    win_del = float(np.mean(idg[:, 1] < ig[:, 1]))
    win_lig = float(np.mean(idg[:, 1] < lig[:, 1]))
    wins = ins_mean and del_mean and del_lig and min(win_ins, win_del, win_lig) >= 0.6
    detail = (
        f"train acc={result.accuracy:.3f}; insertion idg-as {idg[:, 0].mean():.4f} vs ig {ig[:, 0].mean():.4f} "
        f"(wins {win_ins:.2f}); deletion idg-as {idg[:, 1].mean():.4f} vs ig {ig[:, 1].mean():.4f} (wins {win_del:.2f}) "
        f"vs lig {lig[:, 1].mean():.4f} (wins {win_lig:.2f}); time={dt:.1f}s"
    )
    record(8, trained and wins and dt < 300.0, detail)
    return trained, wins


# 9 ---------------------------------------------------------------------------
def check_9() -> bool:
    result, held_out = trained_toy()
    images = held_out.images[:10]
    n_grid = ablation_nm(result.net, images, "N", 50, [5, 50])
    m_grid = ablation_nm(result.net, images, "M", 50, [5, 100])
    ok = n_grid.at(50) <= n_grid.at(5) and m_grid.at(100) <= m_grid.at(5)
    detail = (
        f"deletion AUC N=5 {n_grid.at(5):.4f} -> N=50 {n_grid.at(50):.4f}; "
        f"M=5 {m_grid.at(5):.4f} -> M=100 {m_grid.at(100):.4f}"
    )
    return record(9, ok, detail)


# 10 --------------------------------------------------------------------------
def check_10() -> bool:
    means = {m: float(toy_scores(m)[:, 1].mean()) for m in ("ig", "ig-as", "idg", "idg-as")}
    as_shift = abs(means["ig-as"] - means["ig"])
    idg_shift = abs(means["idg"] - means["ig"])
    order = means["idg-as"] <= means["idg"] <= means["ig-as"] <= means["ig"]
    detail = (
        f"|ig-as - ig|={as_shift:.4f} vs |idg - ig|={idg_shift:.4f}; "
        + " ".join(f"{k}={v:.4f}" for k, v in means.items())
        + f"; full ordering {'holds' if order else 'does not hold'}"
    )
    return record(10, as_shift < idg_shift, detail)


# 11 --------------------------------------------------------------------------
def _snapshot(root: Path) -> dict[str, bytes]:
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def _run_all_commands(root: Path) -> list[int]:
    codes = []

    def run(*argv):
        with contextlib.redirect_stdout(io.StringIO()):
            codes.append(cli([str(a) for a in argv]))

    run("make-data", "--out", root / "data", "--count", 30, "--side", 32, "--seed", 11)
    run("make-model", "--kind", "example1", "--out", root / "ex1.dgnet", "--input-out", root / "x.csv")
    run("make-model", "--kind", "toy-cnn", "--out", root / "cnn.dgnet", "--seed", 11)
    run("train", "--data", root / "data", "--out", root / "model", "--epochs", 3, "--seed", 11)
    model = root / "model" / "model.dgnet"
    image = root / "data" / "img_0000.pgm"
    for method in ("grad", "ig", "lig", "idg", "idg-as", "ig-as"):
        run("attribute", "--model", model, "--image", image, "--method", method, "--out", root / f"attr_{method}")
    run("evaluate", "--model", model, "--data", root / "data", "--limit", 3, "--methods", "ig,idg-as", "--jobs", 2, "--out", root / "eval")
    run("experiment", "error-curve", "--count", 3, "--out", root / "err")
    run("experiment", "saturation", "--model", model, "--image", image, "--out", root / "sat")
    run("experiment", "ablate-nm", "--model", model, "--data", root / "data", "--count", 2, "--swept", "5,20", "--out", root / "abl")
    return codes


def check_11() -> bool:
    with tempfile.TemporaryDirectory() as a, tempfile.TemporaryDirectory() as b:
        codes_a = _run_all_commands(Path(a))
        codes_b = _run_all_commands(Path(b))
        snap_a, snap_b = _snapshot(Path(a)), _snapshot(Path(b))
    differing = sorted(k for k in snap_a.keys() | snap_b.keys() if snap_a.get(k) != snap_b.get(k))
    ok = not differing and set(codes_a) == {0} and codes_a == codes_b
    detail = f"{len(snap_a)} files from {len(codes_a)} commands; exit codes {sorted(set(codes_a))}; differing: {differing or 'none'}"
    return record(11, ok, detail)


# pytest wrappers -------------------------------------------------------------
def test_criterion_1_example1_sensitivity():
    assert check_1()


def test_criterion_2_gradcheck():
    assert check_2()


def test_criterion_3_chain_rule_identity():
    assert check_3()


def test_criterion_4_zero_importance_terms_vanish():
    assert check_4()


def test_criterion_5_ig_completeness():
    assert check_5()


def test_criterion_6_apportionment():
    assert check_6()


def test_criterion_7_adaptive_beats_uniform_and_curve_decreases():
    a, _, c = check_7()
    assert a and c


@pytest.mark.xfail(strict=True, reason="adaptive 50-node error stays above 1.25x the 600-step uniform error on the steep suite")
def test_criterion_7_adaptive_within_uniform_600():
    _, b, _ = check_7()
    assert b


def test_criterion_8_toy_cnn_trains():
    trained, _ = check_8()
    assert trained


@pytest.mark.xfail(strict=True, reason="on the toy CNN importance weighting does not beat IG or Left-IG on insertion/deletion")
def test_criterion_8_idg_beats_ig_and_lig():
    _, wins = check_8()
    assert wins


def test_criterion_9_ablation_trend():
    assert check_9()


def test_criterion_10_sampling_moves_score_less_than_weighting():
    assert check_10()


def test_criterion_11_cli_determinism():
    assert check_11()


if __name__ == "__main__":
    outcomes = [check_1(), check_2(), check_3(), check_4(), check_5(), check_6(), all(check_7()), all(check_8()), check_9(), check_10(), check_11()]
    sys.exit(0 if all(outcomes) else 1)
