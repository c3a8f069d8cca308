import numpy as np
import pytest

from stratseg import GrayImage, PhantomSpec, ShapeSpec, generate_phantom, seg_metrics
from stratseg.errors import DimensionMismatch, InvalidSpec, NonBinaryInput


def binary(arr):
    return GrayImage(np.where(np.asarray(arr, dtype=bool), 255, 0).astype(np.uint8))


def test_plain_background_no_shapes():
    img, mask = generate_phantom(PhantomSpec(10, 8, background=60))
    assert img.pixels.shape == (8, 10)
    assert np.all(img.pixels == 60)
    assert np.all(mask.pixels == 0)


def test_shapes_painted_in_order_and_masked():
    spec = PhantomSpec(
        40,
        40,
        background=20,
        shapes=(
            ShapeSpec("rectangle", 10, 10, 6, 6, 200),
            ShapeSpec("rectangle", 14, 10, 4, 4, 90),  # later shape overwrites
        ),
    )
    img, mask = generate_phantom(spec)
    assert img.pixels[10, 16] == 90
    assert img.pixels[10, 5] == 200
    assert img.pixels[30, 30] == 20
    assert mask.pixels[10, 16] == 255 and mask.pixels[30, 30] == 0


def test_ellipse_rasterization_matches_inequality():
    spec = PhantomSpec(50, 40, shapes=(ShapeSpec("ellipse", 24.0, 19.0, 10.0, 7.0, 255),))
    _, mask = generate_phantom(spec)
    ys, xs = np.mgrid[0:40, 0:50].astype(np.float64)
    inside = ((xs - 24.0) / 10.0) ** 2 + ((ys - 19.0) / 7.0) ** 2 <= 1.0
    assert np.array_equal(mask.pixels == 255, inside)


def test_ramp_adds_amplitude_across_diagonal():
    spec = PhantomSpec(33, 17, background=100, ramp_amplitude=48.0)
    img, _ = generate_phantom(spec)
    assert img.pixels[0, 0] == 100
    assert img.pixels[16, 32] == 148  # far corner gains the full amplitude
    # ramp is monotone along rows and columns
    assert np.all(np.diff(img.pixels.astype(int), axis=0) >= 0)
    assert np.all(np.diff(img.pixels.astype(int), axis=1) >= 0)


def test_noise_is_seed_deterministic():
    spec = PhantomSpec(64, 64, background=128, noise_sigma=10.0, seed=99)
    img1, _ = generate_phantom(spec)
    img2, _ = generate_phantom(spec)
    assert np.array_equal(img1.pixels, img2.pixels)
    other, _ = generate_phantom(PhantomSpec(64, 64, background=128, noise_sigma=10.0, seed=100))
    assert not np.array_equal(img1.pixels, other.pixels)


def test_output_clamped_to_byte_range():
    img, _ = generate_phantom(PhantomSpec(32, 32, background=250, noise_sigma=30.0, seed=1))
    assert img.pixels.dtype == np.uint8
    img2, _ = generate_phantom(PhantomSpec(32, 32, background=2, noise_sigma=30.0, seed=1))
    assert img2.pixels.min() >= 0 and img.pixels.max() <= 255


def test_spec_json_roundtrip():
    spec = PhantomSpec(
        100,
        80,
        background=70,
        shapes=(ShapeSpec("ellipse", 30, 30, 10, 12, 140),),
        ramp_amplitude=25.0,
        noise_sigma=6.0,
        seed=42,
    )
    assert PhantomSpec.from_json(spec.to_json()) == spec


@pytest.mark.parametrize(
    "mutate",
    [
        lambda: PhantomSpec(0, 10),
        lambda: PhantomSpec(10, 10, background=300),
        lambda: PhantomSpec(10, 10, noise_sigma=-1.0),
        lambda: ShapeSpec("triangle", 0, 0, 1, 1, 10),
        lambda: ShapeSpec("ellipse", 0, 0, 0, 1, 10),
        lambda: ShapeSpec("ellipse", 0, 0, 1, 1, 999),
        lambda: PhantomSpec.from_json("{not json"),
        lambda: PhantomSpec.from_json('{"height": 5}'),
    ],
)
def test_invalid_specs_rejected(mutate):
    with pytest.raises(InvalidSpec):
        mutate()


def test_metrics_perfect_agreement():
    m = binary(np.eye(10))
    res = seg_metrics(m, m)
    assert res.distortion == 0.0 and res.reliability == 1.0


def test_metrics_total_disagreement():
    a = binary(np.ones((10, 10)))
    b = binary(np.zeros((10, 10)))
    res = seg_metrics(a, b)
    assert res.distortion == 1.0 and res.reliability == 0.0


def test_metrics_counted_exactly():
    truth = np.zeros((10, 10), dtype=bool)
    truth[:5] = True  # 50 foreground pixels
    pred = truth.copy()
    pred[0, :10] = False  # miss 10 of them
    res = seg_metrics(binary(pred), binary(truth))
    assert res.distortion == pytest.approx(10 / 100)
    assert res.reliability == pytest.approx(2 * 40 / (40 + 50))


def test_metrics_both_empty_is_perfect():
    e = binary(np.zeros((4, 4)))
    res = seg_metrics(e, e)
    assert res.distortion == 0.0 and res.reliability == 1.0


def test_metrics_input_validation():
    with pytest.raises(DimensionMismatch):
        seg_metrics(binary(np.zeros((3, 3))), binary(np.zeros((4, 4))))
    gray = GrayImage(np.full((3, 3), 7, dtype=np.uint8))
    with pytest.raises(NonBinaryInput):
        seg_metrics(gray, binary(np.zeros((3, 3))))


def test_metrics_json_has_definitions():
    res = seg_metrics(binary(np.eye(5)), binary(np.eye(5)))
    doc = res.to_json()
    assert '"distortion"' in doc and '"reliability"' in doc and "Dice" in doc
