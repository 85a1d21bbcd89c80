from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from PIL import Image as PILImage
from scipy import stats

from augforge.imaging import (
    BBox,
    DecodeError,
    Sample,
    boxes_from_mask,
    clip_box,
    derive_stream,
    load_image,
    load_mask,
    mask_hull,
    quantize,
    resize,
    save_image,
    save_mask,
)


def write_png(path, array, mode):
    PILImage.fromarray(array, mode=mode).save(path)


def test_load_endpoints_and_midpoint(tmp_path):
    p = tmp_path / "a.png"
    write_png(p, np.array([[[255, 0, 128]]], dtype=np.uint8), "RGB")
    img = load_image(p)
    assert img.shape == (1, 1, 3)
    assert img[0, 0, 0] == 1.0
    assert img[0, 0, 1] == 0.0
    assert img[0, 0, 2] == pytest.approx(0.50196078431, abs=1e-10)


def test_grayscale_is_widened(tmp_path):
    p = tmp_path / "g.png"
    write_png(p, np.array([[0, 51], [102, 255]], dtype=np.uint8), "L")
    img = load_image(p)
    assert img.shape == (2, 2, 3)
    assert np.array_equal(img[..., 0], img[..., 2])
    assert img[0, 1, 1] == pytest.approx(0.2)


@pytest.mark.parametrize("mode", ["RGBA", "P"])
def test_unsupported_modes_rejected(tmp_path, mode):
    p = tmp_path / "x.png"
    PILImage.new(mode, (3, 3)).save(p)
    with pytest.raises(DecodeError, match="x.png"):
        load_image(p)


def test_unreadable_file_names_path(tmp_path):
    p = tmp_path / "broken.png"
    p.write_bytes(b"not a png")
    with pytest.raises(DecodeError, match="broken.png"):
        load_image(p)


def test_sixteen_bit_rejected(tmp_path):
    p = tmp_path / "deep.png"
    PILImage.fromarray(np.full((4, 4), 40000, dtype=np.uint16)).save(p)
    with pytest.raises(DecodeError):
        load_image(p)


def test_quantization_rule():
    img = np.array([[[1.0, 0.5, 0.0]]])
    q = quantize(img)
    # round half away from zero: 127.5 -> 128
    assert q.tolist() == [[[255, 128, 0]]]


def test_save_writes_rgb8(tmp_path):
    p = tmp_path / "o.png"
    save_image(np.full((2, 3, 3), 0.5), p)
    with PILImage.open(p) as im:
        assert im.mode == "RGB" and im.size == (3, 2)
        assert np.asarray(im)[0, 0, 0] == 128


@settings(max_examples=30, deadline=None)
@given(arrays(np.uint8, st.tuples(st.integers(1, 12), st.integers(1, 12), st.just(3))))
def test_round_trip_is_bit_identical(tmp_path_factory, raw):
    p = tmp_path_factory.mktemp("rt") / "r.png"
    img = raw.astype(np.float64) / 255.0
    save_image(img, p)
    assert np.array_equal(load_image(p), img)


def test_mask_round_trip(tmp_path):
    m = np.zeros((5, 7), dtype=bool)
    m[1:3, 2:6] = True
    save_mask(m, tmp_path / "m.png")
    assert np.array_equal(load_mask(tmp_path / "m.png"), m)


def test_mask_nonzero_is_foreground(tmp_path):
    write_png(tmp_path / "m.png", np.array([[0, 1, 200]], dtype=np.uint8), "L")
    assert load_mask(tmp_path / "m.png").tolist() == [[False, True, True]]


def test_stream_determinism():
    a = derive_stream(7, 3, "img_001", 4).random(1000)
    b = derive_stream(7, 3, "img_001", 4).random(1000)
    assert np.array_equal(a, b)


@pytest.mark.parametrize(
    "other",
    [(8, 3, "img_001", 4), (7, 4, "img_001", 4), (7, 3, "img_002", 4), (7, 3, "img_001", 5)],
)
def test_every_key_component_matters(other):
    assert derive_stream(7, 3, "img_001", 4).random() != derive_stream(*other).random()


def test_adjacent_aug_index_collisions():
    # 10^4 key pairs differing only in aug_index; a shared first draw would be a collision
    collisions = 0
    for k in range(10_000):
        a = derive_stream(k % 97, k, f"s{k % 13}", 0).integers(0, 2**63)
        b = derive_stream(k % 97, k, f"s{k % 13}", 1).integers(0, 2**63)
        collisions += a == b
    assert collisions == 0


def test_stream_is_uniform():
    draws = derive_stream(0, 0, "ks", 0).random(100_000)
    assert draws.min() >= 0.0 and draws.max() < 1.0
    assert stats.kstest(draws, "uniform").pvalue > 1e-3


def test_bbox_validation_and_area():
    b = BBox(1, 2, 4, 6, 3)
    assert b.area == 12.0 and isinstance(b.x_min, float) and b.class_id == 3
    with pytest.raises(ValueError):
        BBox(5, 0, 5, 1)
    with pytest.raises(ValueError):
        BBox(0, 3, 1, 2)
    assert BBox.from_dict(b.to_dict()) == b


def test_clip_box():
    assert clip_box(BBox(-5, -5, 5, 5), 10, 10) == BBox(0, 0, 5, 5)
    assert clip_box(BBox(11, 0, 20, 5), 10, 10) is None


def test_sample_validates_shapes():
    with pytest.raises(ValueError):
        Sample(np.zeros((4, 4, 3)), np.zeros((4, 5), dtype=bool))
    with pytest.raises(ValueError):
        Sample(np.full((2, 2, 3), 1.5))
    with pytest.raises(ValueError):
        Sample(np.zeros((2, 2)))


def test_mask_hull_and_boxes():
    m = np.zeros((10, 10), dtype=bool)
    m[2:5, 3:9] = True
    assert mask_hull(m) == (3, 2, 9, 5)
    assert boxes_from_mask(m)[0].as_tuple() == (3.0, 2.0, 9.0, 5.0)
    assert mask_hull(np.zeros((3, 3), dtype=bool)) is None


def test_resize_constant_and_identity():
    img = np.random.default_rng(0).random((6, 8, 3))
    assert np.array_equal(resize(img, 8, 6), img)
    out = resize(np.full((6, 8, 3), 0.25), 13, 5)
    assert out.shape == (5, 13, 3) and np.allclose(out, 0.25)


def test_inputs_not_modified(tmp_path):
    img = np.random.default_rng(1).random((4, 4, 3))
    before = img.copy()
    save_image(img, tmp_path / "i.png")
    resize(img, 7, 7)
    quantize(img)
    assert np.array_equal(img, before)
