from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from cfia.compositing import (
    CompositingError, compose, export_composite, initial_composite, read_image, read_label_map,
    read_manifest, split_label_map,
)
from cfia.regions import FacialAttribute, parse_region_code
from cfia.synthetic import toy_face, toy_label_map

shapes = st.tuples(st.integers(1, 12), st.integers(1, 12))


@st.composite
def donor_pair(draw):
    h, w = draw(shapes)
    unit = st.floats(0.0, 1.0, allow_nan=False)
    im1 = draw(arrays(np.float64, (h, w, 3), elements=unit))
    im2 = draw(arrays(np.float64, (h, w, 3), elements=unit))
    m1 = draw(arrays(np.bool_, (h, w))).astype(np.float64)
    m2 = draw(arrays(np.bool_, (h, w))).astype(np.float64)
    return im1, im2, m1, m2


def _seg(image, mask):
    return mask, image * mask[..., None]


@given(donor_pair())
def test_alpha_one_complementary_masks_is_stitch(d):
    im1, im2, m1, _ = d
    m2 = 1.0 - m1
    out = initial_composite(_seg(im1, m1), _seg(im2, m2), alpha=1.0)
    stitch = np.where(m2[..., None] > 0, im2, im1 * m1[..., None])
    assert np.array_equal(out.image, stitch)
    assert np.all(out.mask == 1.0)


@given(donor_pair())
def test_half_alpha_full_overlap_is_mean(d):
    im1, im2, _, _ = d
    ones = np.ones(im1.shape[:2])
    out = initial_composite(_seg(im1, ones), _seg(im2, ones), alpha=0.5)
    np.testing.assert_allclose(out.image, (im1 + im2) / 2, rtol=0, atol=1e-12)


@given(donor_pair(), st.floats(0.01, 1.0))
def test_zero_outside_union_and_bounded(d, alpha):
    im1, im2, m1, m2 = d
    out = initial_composite(_seg(im1, m1), _seg(im2, m2), alpha=alpha)
    assert np.array_equal(out.mask, np.maximum(m1, m2))
    assert np.all(out.image[out.mask == 0] == 0)
    assert out.image.min() >= 0 and out.image.max() <= 1


@given(donor_pair(), st.floats(0.01, 1.0))
def test_scale_first_only_touches_donor_one(d, alpha):
    im1, im2, m1, m2 = d
    plain = initial_composite(_seg(im1, m1), _seg(im2, m2), alpha=alpha)
    scaled = initial_composite(_seg(im1, m1), _seg(im2, m2), alpha=alpha, scale_first=True)
    only1 = (m1 > 0) & (m2 == 0)
    np.testing.assert_allclose(scaled.image[only1], alpha * plain.image[only1], atol=1e-12)
    only2 = (m2 > 0) & (m1 == 0)
    assert np.array_equal(scaled.image[only2], plain.image[only2])


def test_hand_computed_pixel():
    seg1 = (np.array([[1.0]]), np.array([[0.8]]))
    seg2 = (np.array([[1.0]]), np.array([[0.2]]))
    out = initial_composite(seg1, seg2, alpha=0.25)
    # 0.25 * 0.2 + (1 - 0.25) * 0.8
    assert out.image[0, 0] == pytest.approx(0.65, abs=1e-15)


@pytest.mark.parametrize("alpha", [0.0, -0.1, 1.5])
def test_alpha_range(alpha):
    seg = (np.ones((2, 2)), np.ones((2, 2)))
    with pytest.raises(CompositingError):
        initial_composite(seg, seg, alpha)


def test_frame_mismatch():
    with pytest.raises(CompositingError, match="frame size"):
        initial_composite((np.ones((2, 2)), np.ones((2, 2))), (np.ones((3, 2)), np.ones((3, 2))))


def test_label_out_of_range():
    labels = np.zeros((3, 3), dtype=int)
    labels[1, 2] = 7
    with pytest.raises(CompositingError, match=r"\(1, 2\)"):
        split_label_map(labels, np.zeros((3, 3, 3)))


def test_split_label_map_partitions_image():
    rng = np.random.default_rng(0)
    labels = toy_label_map(32, 32)
    img = toy_face(labels, rng)
    parts = split_label_map(labels, img)
    total = sum(p[1] for p in parts.values())
    assert np.array_equal(total, img)
    assert parts[FacialAttribute.BACKGROUND][0].sum() == (labels == 0).sum()


def test_export_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    l1, l2 = toy_label_map(40, 40), toy_label_map(40, 40, shift=3)
    p1 = split_label_map(l1, toy_face(l1, rng, 0))
    p2 = split_label_map(l2, toy_face(l2, rng, 1))
    out = compose(p1, p2, "SEN-M", alpha=0.5)
    out.donor1_id, out.donor2_id = "alice", "bob"
    paths = export_composite(out, tmp_path)
    assert np.abs(read_image(paths["image"]) - out.image).max() <= 1 / 255 + 1e-12
    assert np.array_equal(read_image(paths["mask"])[..., 0], out.mask)
    man = read_manifest(paths["manifest"])
    assert man == {"alpha": 0.5, "combination": "SEN-M", "donor1_id": "alice", "donor2_id": "bob",
                   "image": "SEN-M_image.png", "mask": "SEN-M_mask.png"}


def test_compose_uses_each_donors_groups():
    labels = np.array([[2, 3, 4, 0]])
    img1 = np.full((1, 4, 3), 0.4)
    img2 = np.full((1, 4, 3), 0.8)
    out = compose(split_label_map(labels, img1), split_label_map(labels, img2),
                  parse_region_code("E-M"), alpha=1.0)
    np.testing.assert_array_equal(out.image[0, :, 0], [0.4, 0.0, 0.8, 0.0])
    np.testing.assert_array_equal(out.mask[0], [1, 0, 1, 0])


def test_rgb_label_map_rejected(tmp_path):
    from PIL import Image
    p = tmp_path / "rgb.png"
    Image.fromarray(np.zeros((4, 4, 3), dtype=np.uint8)).save(p)
    with pytest.raises(CompositingError, match="single-channel"):
        read_label_map(p)
