import numpy as np
import pytest

from decigrad.metrics import (
    MetricConfig,
    PerturbationCurve,
    aic_curve,
    auc,
    blur_baseline,
    block_blur,
    box_widths,
    deletion_curve,
    evaluate_batch,
    geometric_schedule,
    insertion_curve,
    linear_schedule,
    rank_pixels,
    sic_curve,
)
from decigrad.methods import attribute
from decigrad.nn import forward
from decigrad.train import softmax
from decigrad.zoo import build_toy_cnn


@pytest.fixture(scope="module")
def cnn():
    return build_toy_cnn(16, seed=2)


@pytest.fixture(scope="module")
def image():
    return np.random.default_rng(3).uniform(size=(1, 16, 16))


def test_box_widths_sigma5():
    assert box_widths(5.0) == [9, 9, 11]
    w = box_widths(5.0)
    # variance of the three boxes stays close to sigma^2
    assert sum((k * k - 1) / 12 for k in w) == pytest.approx(25.0, rel=0.1)


def test_blur_conserves_mass_and_constants():
    img = np.zeros((1, 64, 64))
    img[0, 32, 32] = 1.0
    assert blur_baseline(img, 5.0).sum() == pytest.approx(1.0, abs=1e-9)
    flat = np.full((1, 10, 10), 0.3)
    np.testing.assert_allclose(blur_baseline(flat), flat, rtol=1e-12)
    np.testing.assert_allclose(block_blur(flat, 4), flat, rtol=1e-12)
    with pytest.raises(ValueError):
        blur_baseline(flat, 0.0)


def test_block_blur_keeps_tiles_separate():
    img = np.zeros((1, 16, 16))
    img[0, :8, :8] = 1.0
    out = block_blur(img, blocks=2)
    assert np.all(out[0, 8:, :] == 0.0) and np.all(out[0, :, 8:] == 0.0)
    np.testing.assert_allclose(out[0, :8, :8], 1.0)


def test_rank_pixels_stable_on_ties():
    v = np.array([[[1.0, 3.0], [3.0, 0.0]], [[0.0, 0.0], [0.0, 1.0]]])
    assert rank_pixels(v).tolist() == [1, 2, 0, 3]


def test_schedules():
    assert linear_schedule(10, 4).tolist() == [0, 4, 8, 10]
    assert geometric_schedule(20).tolist() == [0, 1, 2, 4, 8, 16, 20]
    assert geometric_schedule(16).tolist() == [0, 1, 2, 4, 8, 16]


def test_auc_trapezoid():
    x = np.linspace(0, 1, 11)
    assert auc(PerturbationCurve(x, np.ones(11), "t")) == pytest.approx(1.0)
    assert auc(PerturbationCurve(x, x, "t")) == pytest.approx(0.5)
    assert auc(PerturbationCurve(np.array([0.0, 0.1, 1.0]), np.array([1.0, 0.0, 0.0]), "t")) == pytest.approx(0.05)
    with pytest.raises(ValueError):
        auc(PerturbationCurve(np.zeros(1), np.zeros(1), "t"))


def test_curve_endpoints(cnn, image):
    amap = attribute(cnn, image, "ig", 0)
    ins = insertion_curve(cnn, image, amap, class_index=0)
    dele = deletion_curve(cnn, image, amap, class_index=0)
    p_img = softmax(forward(cnn, image))[0]
    assert ins.fractions[0] == 0.0 and ins.fractions[-1] == 1.0
    assert ins.scores[-1] == pytest.approx(p_img, abs=1e-12)
    assert ins.scores[0] == pytest.approx(softmax(forward(cnn, blur_baseline(image)))[0], abs=1e-12)
    assert dele.scores[0] == pytest.approx(p_img, abs=1e-12)
    assert dele.scores[-1] == pytest.approx(softmax(forward(cnn, np.zeros_like(image)))[0], abs=1e-12)
    # step defaults to the image side: 256 / 16 = 16 steps plus the start
    assert len(ins.fractions) == 17


def test_aic_is_binary_and_sic_uses_geometric_schedule(cnn, image):
    amap = attribute(cnn, image, "grad", 1)
    aic = aic_curve(cnn, image, amap, class_index=1)
    assert set(np.unique(aic.scores)) <= {0.0, 1.0}
    sic = sic_curve(cnn, image, amap, class_index=1)
    assert sic.fractions.tolist() == (geometric_schedule(256) / 256).tolist()


def test_evaluate_batch_parallel_matches_serial(cnn):
    images = np.random.default_rng(9).uniform(size=(4, 1, 16, 16))
    fn = lambda n, x, c: attribute(n, x, "idg-as", c, N=10, M=10)  # noqa: E731
    a = evaluate_batch(cnn, images, fn, "idg-as", jobs=1)
    b = evaluate_batch(cnn, images, fn, "idg-as", jobs=3)
    np.testing.assert_array_equal(a.per_image, b.per_image)
    assert a.per_image.shape == (4, 4)


def test_single_image_mean_equals_value(cnn, image, tmp_path):
    rep = evaluate_batch(cnn, image[None], lambda n, x, c: attribute(n, x, "ig", c), "ig", metrics=("deletion",))
    assert rep.means["deletion"] == rep.per_image[0, 0]
    rep.to_csv(tmp_path / "r.csv")
    assert (tmp_path / "r.csv").read_text().splitlines()[0] == "image_id,metric,method,auc"


def test_evaluate_batch_validation(cnn):
    with pytest.raises(ValueError):
        evaluate_batch(cnn, np.zeros((0, 1, 16, 16)), None)
    with pytest.raises(ValueError):
        evaluate_batch(cnn, np.zeros((1, 1, 16, 16)), None, metrics=("bogus",))
    with pytest.raises(ValueError):
        MetricConfig(sigma=0)
