"""PSNR and SSIM between a composite and a donor reference, in the [0, 1] domain."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import gaussian_filter

# fixed SSIM configuration, echoed into every quality report
SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03
DATA_RANGE = 1.0
BT601 = np.array([0.299, 0.587, 0.114])


def ssim_settings() -> dict:
    return {"window": SSIM_WINDOW, "sigma": SSIM_SIGMA, "k1": SSIM_K1, "k2": SSIM_K2,
            "data_range": DATA_RANGE, "gray": "BT.601"}


def psnr(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(DATA_RANGE ** 2 / mse)


def to_gray(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 2:
        return x
    if x.ndim == 3 and x.shape[2] == 3:
        return x @ BT601
    if x.ndim == 3 and x.shape[2] == 1:
        return x[..., 0]
    raise ValueError(f"expected (H, W) or (H, W, 3) image, got shape {x.shape}")


def _local_stats(a, b):
    # radius 5 Gaussian -> 11x11 window at sigma 1.5
    truncate = (SSIM_WINDOW // 2) / SSIM_SIGMA

    def filt(x):
        return gaussian_filter(x, SSIM_SIGMA, truncate=truncate, mode="reflect")

    mu_a, mu_b = filt(a), filt(b)
    var_a = filt(a * a) - mu_a ** 2
    var_b = filt(b * b) - mu_b ** 2
    cov = filt(a * b) - mu_a * mu_b
    return mu_a, mu_b, var_a, var_b, cov


def _prepare(a, b):
    a, b = to_gray(a), to_gray(b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    if min(a.shape) < SSIM_WINDOW:
        raise ValueError(f"image {a.shape} smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} SSIM window")
    return a, b


def _crop(x):
    pad = SSIM_WINDOW // 2
    return x[pad:-pad, pad:-pad]


def ssim_map(a, b) -> np.ndarray:
    a, b = _prepare(a, b)
    c1 = (SSIM_K1 * DATA_RANGE) ** 2
    c2 = (SSIM_K2 * DATA_RANGE) ** 2
    mu_a, mu_b, var_a, var_b, cov = _local_stats(a, b)
    num = (2 * mu_a * mu_b + c1) * (2 * cov + c2)
    den = (mu_a ** 2 + mu_b ** 2 + c1) * (var_a + var_b + c2)
    return num / den


def ssim(a, b) -> float:
    """Mean local SSIM, excluding the border where the window overhangs."""
    return float(_crop(ssim_map(a, b)).mean())


def ssim_components(a, b) -> dict:
    """Mean luminance, contrast and structure terms (C3 = C2 / 2)."""
    a, b = _prepare(a, b)
    c1 = (SSIM_K1 * DATA_RANGE) ** 2
    c2 = (SSIM_K2 * DATA_RANGE) ** 2
    c3 = c2 / 2
    mu_a, mu_b, var_a, var_b, cov = _local_stats(a, b)
    sd_a = np.sqrt(np.maximum(var_a, 0.0))
    sd_b = np.sqrt(np.maximum(var_b, 0.0))
    lum = (2 * mu_a * mu_b + c1) / (mu_a ** 2 + mu_b ** 2 + c1)
    con = (2 * sd_a * sd_b + c2) / (var_a + var_b + c2)
    struct = (cov + c3) / (sd_a * sd_b + c3)
    return {k: float(_crop(v).mean()) for k, v in
            (("luminance", lum), ("contrast", con), ("structure", struct))}


@dataclass
class QualityReport:
    pairs: list = field(default_factory=list)  # dicts: pair_id, region, psnr, ssim

    def add(self, pair_id: str, region: str, reference, composite) -> dict:
        row = {"pair_id": pair_id, "region": region,
               "psnr": psnr(reference, composite), "ssim": ssim(reference, composite)}
        self.pairs.append(row)
        return row

    def aggregate(self) -> dict:
        out = {}
        for region in sorted({p["region"] for p in self.pairs}):
            rows = [p for p in self.pairs if p["region"] == region]
            out[region] = {"n": len(rows)}
            for key in ("psnr", "ssim"):
                vals = np.array([r[key] for r in rows])
                finite = vals[np.isfinite(vals)]
                out[region][key] = {
                    "mean": float(finite.mean()) if finite.size else None,
                    "std": float(finite.std()) if finite.size else None,
                    "n_infinite": int((~np.isfinite(vals)).sum()),
                }
        return out

    def to_dict(self) -> dict:
        pairs = [{**p, "psnr": _json_float(p["psnr"])} for p in self.pairs]
        return {"pairs": pairs, "by_region": self.aggregate(), "ssim_settings": ssim_settings()}


def _json_float(x: float):
    return "inf" if math.isinf(x) else x
