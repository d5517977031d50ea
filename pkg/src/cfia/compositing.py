"""Initial composite image and blended mask from two segmented donors.

Images are float arrays in [0, 1] of shape (H, W) or (H, W, C); masks are
float arrays of shape (H, W) holding exactly 0.0 or 1.0. Quantisation to
8 bits only happens when reading or writing files.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .regions import ALL_ATTRIBUTES, FacialAttribute, RegionCombination, parse_region_code

Segment = tuple  # (mask, segment image)


class CompositingError(ValueError):
    pass


def _check_same_frame(a: np.ndarray, b: np.ndarray, what: str) -> None:
    if a.shape[:2] != b.shape[:2]:
        raise CompositingError(f"{what}: frame size mismatch {a.shape[:2]} vs {b.shape[:2]}")


def _expand(mask: np.ndarray, image: np.ndarray) -> np.ndarray:
    return mask[..., None] if image.ndim == 3 else mask


def split_label_map(labels: np.ndarray, image: np.ndarray) -> dict[FacialAttribute, Segment]:
    """Per-attribute (mask, masked image) for every class of a label map."""
    labels = np.asarray(labels)
    image = np.asarray(image, dtype=np.float64)
    _check_same_frame(labels, image, "label map and image")
    if labels.ndim != 2:
        raise CompositingError(f"label map must be 2-D, got shape {labels.shape}")
    bad = (labels < 0) | (labels > 5)
    if bad.any():
        r, c = np.argwhere(bad)[0]
        raise CompositingError(f"label {labels[r, c]} at pixel ({r}, {c}) outside 0..5")
    parts = {}
    for attr in ALL_ATTRIBUTES:
        mask = (labels == attr.label).astype(np.float64)
        parts[attr] = (mask, image * _expand(mask, image))
    return parts


def mask_for_set(parts: dict, attributes) -> np.ndarray:
    """Union of the masks of the selected attributes."""
    missing = [a.value for a in attributes if a not in parts]
    if missing:
        raise CompositingError(f"attributes missing from segmentation: {missing}")
    masks = [parts[a][0] for a in attributes]
    return np.maximum.reduce(masks) if len(masks) > 1 else masks[0].copy()


def segment_for_set(parts: dict, attributes) -> Segment:
    mask = mask_for_set(parts, attributes)
    image = sum(parts[a][1] for a in attributes)
    return mask, np.clip(image, 0.0, 1.0)


def blend_union(sm1: np.ndarray, sm2: np.ndarray) -> np.ndarray:
    if sm1.shape != sm2.shape:
        raise CompositingError(f"mask shape mismatch {sm1.shape} vs {sm2.shape}")
    return np.maximum(sm1, sm2)


@dataclass
class CompositeOutput:
    image: np.ndarray
    mask: np.ndarray
    combination: RegionCombination | None
    alpha: float
    donor1_id: str = "donor1"
    donor2_id: str = "donor2"

    def manifest(self) -> dict:
        return {
            "combination": self.combination.code if self.combination is not None else None,
            "alpha": self.alpha,
            "donor1_id": self.donor1_id,
            "donor2_id": self.donor2_id,
        }


def initial_composite(
    seg1: Segment,
    seg2: Segment,
    alpha: float = 0.5,
    *,
    combination: RegionCombination | None = None,
    scale_first: bool = False,
) -> CompositeOutput:
    """Two-step compositing of donor segments.

    Step one paints donor one's segment (``IC = IS1``, or ``alpha * IS1`` when
    ``scale_first``); step two overlays donor two with transparency,
    ``IC = alpha * IS2 + (1 - alpha * SM2) * IC``. ``alpha=1`` is the plain
    overwrite of donor one by donor two.
    """
    if not 0.0 < alpha <= 1.0:
        raise CompositingError(f"alpha must be in (0, 1], got {alpha}")
    sm1, is1 = (np.asarray(x, dtype=np.float64) for x in seg1)
    sm2, is2 = (np.asarray(x, dtype=np.float64) for x in seg2)
    for m, im, name in ((sm1, is1, "donor one"), (sm2, is2, "donor two")):
        _check_same_frame(m, im, name)
    _check_same_frame(sm1, sm2, "donors")
    if is1.shape != is2.shape:
        raise CompositingError(f"donor image shape mismatch {is1.shape} vs {is2.shape}")

    ic = alpha * is1 if scale_first else is1.copy()
    ic = alpha * is2 + (1.0 - alpha * _expand(sm2, is2)) * ic
    ic = np.clip(ic, 0.0, 1.0)
    return CompositeOutput(ic, blend_union(sm1, sm2), combination, alpha)


def compose(
    parts1: dict,
    parts2: dict,
    combination: RegionCombination | str,
    alpha: float = 0.5,
    scale_first: bool = False,
) -> CompositeOutput:
    """Composite for one region combination from two split donors."""
    if isinstance(combination, str):
        combination = parse_region_code(combination)
    seg1 = segment_for_set(parts1, combination.donor_one)
    seg2 = segment_for_set(parts2, combination.donor_two)
    return initial_composite(seg1, seg2, alpha, combination=combination, scale_first=scale_first)


# -- file boundary -------------------------------------------------------------


def to_uint8(x: np.ndarray) -> np.ndarray:
    return np.rint(np.clip(x, 0.0, 1.0) * 255.0).astype(np.uint8)


def read_image(path) -> np.ndarray:
    with Image.open(path) as im:
        arr = np.asarray(im.convert("RGB"), dtype=np.float64)
    return arr / 255.0


def read_label_map(path) -> np.ndarray:
    with Image.open(path) as im:
        if im.mode not in ("L", "P", "I"):
            raise CompositingError(f"{path}: label map must be single-channel, got mode {im.mode}")
        labels = np.asarray(im, dtype=np.int64)
    if labels.max(initial=0) > 5:
        raise CompositingError(f"{path}: label values must be within 0..5")
    return labels


def write_image(path, x: np.ndarray) -> None:
    Image.fromarray(to_uint8(x)).save(path)


def resize_image(x: np.ndarray, size: tuple[int, int]) -> np.ndarray:
    """Explicit bilinear resample to (width, height); compositing never resamples implicitly."""
    im = Image.fromarray(to_uint8(x))
    return np.asarray(im.resize(size, Image.BILINEAR), dtype=np.float64) / 255.0


def resize_label_map(labels: np.ndarray, size: tuple[int, int]) -> np.ndarray:
    im = Image.fromarray(np.asarray(labels, dtype=np.uint8))
    return np.asarray(im.resize(size, Image.NEAREST), dtype=np.int64)


def export_composite(c: CompositeOutput, out_dir, stem: str | None = None) -> dict[str, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = stem or (c.combination.code if c.combination is not None else "composite")
    paths = {
        "image": out_dir / f"{stem}_image.png",
        "mask": out_dir / f"{stem}_mask.png",
        "manifest": out_dir / f"{stem}.json",
    }
    write_image(paths["image"], c.image)
    write_image(paths["mask"], c.mask)
    manifest = c.manifest()
    manifest["image"] = paths["image"].name
    manifest["mask"] = paths["mask"].name
    paths["manifest"].write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return paths


def read_manifest(path) -> dict:
    return json.loads(Path(path).read_text())
