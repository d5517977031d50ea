from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from cfia.quality import QualityReport, psnr, ssim, ssim_components, ssim_map, to_gray

images = st.tuples(st.integers(12, 24), st.integers(12, 24)).flatmap(
    lambda hw: arrays(np.float64, (*hw, 3), elements=st.floats(0.0, 1.0, allow_nan=False)))


def test_psnr_offset_pair():
    a = np.full((16, 16, 3), 0.3)
    assert psnr(a, a + 0.1) == pytest.approx(20.0, abs=1e-9)


def test_psnr_identical_is_infinite():
    a = np.random.default_rng(0).random((8, 8))
    assert psnr(a, a) == math.inf


@given(images)
def test_ssim_self_similarity(a):
    assert ssim(a, a) == pytest.approx(1.0, abs=1e-9)


@given(images, images)
def test_ssim_symmetric_and_bounded(a, b):
    if a.shape != b.shape:
        return
    s = ssim(a, b)
    assert -1.0 <= s <= 1.0
    assert s == pytest.approx(ssim(b, a), abs=1e-12)


def test_ssim_matches_reference_implementation():
    metrics = pytest.importorskip("skimage.metrics")
    rng = np.random.default_rng(3)
    a = rng.random((40, 36, 3))
    b = np.clip(a + rng.normal(0, 0.1, a.shape), 0, 1)
    ref = metrics.structural_similarity(to_gray(a), to_gray(b), gaussian_weights=True, sigma=1.5,
                                        use_sample_covariance=False, data_range=1.0)
    assert ssim(a, b) == pytest.approx(ref, abs=1e-12)


def test_ssim_frozen_value():
    # frozen from scikit-image with Gaussian weights, sigma 1.5, population covariance
    yy, xx = np.mgrid[0:32, 0:32] / 31.0
    a = xx
    b = np.clip(xx + 0.05 * np.sin(6 * yy), 0, 1)
    assert ssim(a, b) == pytest.approx(0.9801108436151623, abs=1e-12)


def test_components_are_bounded():
    rng = np.random.default_rng(4)
    a, b = rng.random((24, 24)), rng.random((24, 24))
    comp = ssim_components(a, b)
    assert set(comp) == {"luminance", "contrast", "structure"}
    assert all(-1.0 <= v <= 1.0 for v in comp.values())


def test_gray_conversion():
    assert to_gray(np.array([[[1.0, 0.0, 0.0]]]))[0, 0] == pytest.approx(0.299)
    with pytest.raises(ValueError):
        to_gray(np.zeros((2, 2, 4)))


def test_mean_excludes_border():
    rng = np.random.default_rng(5)
    a, b = rng.random((20, 20)), rng.random((20, 20))
    full = ssim_map(a, b)
    assert full.shape == (20, 20)
    assert ssim(a, b) == pytest.approx(full[5:-5, 5:-5].mean(), abs=1e-15)


def test_shape_mismatch():
    with pytest.raises(ValueError):
        psnr(np.zeros((2, 2)), np.zeros((3, 2)))
    with pytest.raises(ValueError):
        ssim(np.zeros((12, 12)), np.zeros((13, 12)))


def test_report_aggregates_by_region():
    r = QualityReport()
    a = np.full((16, 16), 0.5)
    r.add("p1", "3", a, a + 0.1)
    r.add("p2", "3", a, a)
    r.add("p3", "5", a, a + 0.01)
    agg = r.aggregate()
    assert agg["3"]["n"] == 2
    assert agg["3"]["psnr"]["n_infinite"] == 1
    assert agg["3"]["psnr"]["mean"] == pytest.approx(20.0)
    assert agg["5"]["psnr"]["mean"] == pytest.approx(40.0)
    d = r.to_dict()
    assert d["pairs"][1]["psnr"] == "inf"
    assert d["ssim_settings"]["window"] == 11
