"""Deterministic synthetic inputs for the tests and the CLI examples."""
from __future__ import annotations

import csv

import numpy as np
from PIL import Image


def random_records(rng: np.random.Generator, *, n_frs=2, n_types=1, n_morphs=3, n_attempts=2,
                   n_slots=2, variable_attempts=False, ftar_rate=0.1, grid=10):
    """Flat score records on a coarse grid so that ties with thresholds occur.

    With ``variable_attempts`` each morph draws its attempt count from
    1..n_attempts; the same attempts are used on every FRS.
    """
    records = []
    for d in range(n_types):
        for j in range(n_morphs):
            p = int(rng.integers(1, n_attempts + 1)) if variable_attempts else n_attempts
            for f in range(n_frs):
                for i in range(p):
                    failed = int(rng.random() < ftar_rate)
                    for k in range(1, n_slots + 1):
                        score = float(rng.integers(0, grid + 1)) / grid
                        records.append((f"frs{f}", f"type{d}", f"m{j:04d}", f"a{i:02d}", k, score, failed))
    return records


def random_thresholds(rng: np.random.Generator, frs_ids, grid=10) -> dict:
    return {f: float(rng.integers(0, grid + 1)) / grid for f in frs_ids}


def detection_scores(rng: np.random.Generator, n_bonafide=200, n_attack=200, separation=2.0):
    bonafide = rng.normal(0.0, 1.0, n_bonafide)
    attack = rng.normal(separation, 1.0, n_attack)
    return bonafide, attack


def toy_label_map(height=64, width=64, *, shift=0, scale=1.0) -> np.ndarray:
    """Cartoon face: hair cap, skin oval, two eyes, nose, mouth on background."""
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    cy, cx = height * 0.55, width / 2 + shift
    ry, rx = height * 0.36 * scale, width * 0.28 * scale
    labels = np.zeros((height, width), dtype=np.int64)
    face = ((yy - cy) / ry) ** 2 + ((xx - cx) / rx) ** 2 <= 1.0
    hair = (((yy - cy + ry * 0.25) / (ry * 1.05)) ** 2 + ((xx - cx) / (rx * 1.15)) ** 2 <= 1.0) & (yy < cy - ry * 0.45)
    labels[hair] = 5
    labels[face & ~hair] = 1
    for ex in (cx - rx * 0.42, cx + rx * 0.42):
        eye = ((yy - (cy - ry * 0.22)) / (ry * 0.09)) ** 2 + ((xx - ex) / (rx * 0.2)) ** 2 <= 1.0
        labels[eye] = 2
    nose = (np.abs(xx - cx) <= rx * 0.12) & (yy >= cy - ry * 0.12) & (yy <= cy + ry * 0.22)
    labels[nose] = 3
    mouth = ((yy - (cy + ry * 0.5)) / (ry * 0.08)) ** 2 + ((xx - cx) / (rx * 0.38)) ** 2 <= 1.0
    labels[mouth] = 4
    return labels


_PALETTES = {
    0: [(0.20, 0.30, 0.45), (0.85, 0.67, 0.55), (0.10, 0.10, 0.10), (0.75, 0.55, 0.45), (0.60, 0.20, 0.25), (0.25, 0.15, 0.08)],
    1: [(0.35, 0.45, 0.30), (0.62, 0.45, 0.35), (0.25, 0.35, 0.50), (0.55, 0.40, 0.30), (0.70, 0.30, 0.30), (0.80, 0.70, 0.40)],
}


def toy_face(labels: np.ndarray, rng: np.random.Generator, palette: int = 0, noise=0.03) -> np.ndarray:
    colours = np.array(_PALETTES[palette % len(_PALETTES)])
    image = colours[labels]
    image = image + rng.normal(0.0, noise, image.shape)
    return np.clip(image, 0.0, 1.0)


def frontal_landmarks(rng: np.random.Generator, skew=0.0):
    """Mirror-symmetric five-point landmarks; ``skew`` pushes the right eye outward."""
    a, b = rng.uniform(15, 25), rng.uniform(10, 20)
    c, e = rng.uniform(10, 18), rng.uniform(15, 25)
    cx, cy = rng.uniform(40, 60), rng.uniform(40, 60)
    le = (cx - a, cy - b)
    re = (cx + a + skew, cy - b)
    n = (cx, cy)
    lm = (cx - c, cy + e)
    rm = (cx + c, cy + e)
    return [le, re, n, lm, rm]


def score_tensor_records(rng: np.random.Generator, *, n_frs=2, n_types=2, n_morphs=20, n_attempts=2,
                         mated_mean=0.62, spread=0.12, ftar_rate=0.02):
    """Continuous-valued records resembling mated-morph comparison scores."""
    records = []
    for d in range(n_types):
        shift = 0.05 * d
        for j in range(n_morphs):
            for f in range(n_frs):
                for i in range(n_attempts):
                    failed = int(rng.random() < ftar_rate)
                    for k in (1, 2):
                        s = float(np.clip(rng.normal(mated_mean + shift - 0.04 * f, spread), 0.0, 1.0))
                        records.append((f"frs{f}", f"type{d}", f"m{j:04d}", f"a{i:02d}", k, s, failed))
    return records


def write_fixture_set(out_dir, seed: int = 7, size: int = 64) -> dict:
    """Write a small, fully synthetic input set for every CLI subcommand.

    Returns a mapping from input kind to path.
    """
    from pathlib import Path

    from .compositing import compose, export_composite, split_label_map, write_image
    from .io import DETECTION_HEADER, IMPOSTOR_HEADER, LANDMARK_HEADER, QUALITY_HEADER, tensor_from_records, \
        write_csv, write_scores
    from .regions import parse_region_code

    rng = np.random.default_rng(seed)
    out = Path(out_dir)
    (out / "donors").mkdir(parents=True, exist_ok=True)
    paths = {}

    labels = [toy_label_map(size, size, shift=0), toy_label_map(size, size, shift=2, scale=0.95)]
    faces = [toy_face(labels[0], rng, palette=0), toy_face(labels[1], rng, palette=1)]
    for n, (lab, img) in enumerate(zip(labels, faces), start=1):
        paths[f"donor{n}"] = out / "donors" / f"donor{n}.png"
        paths[f"labels{n}"] = out / "donors" / f"donor{n}_labels.png"
        write_image(paths[f"donor{n}"], img)
        Image.fromarray(lab.astype(np.uint8), mode="L").save(paths[f"labels{n}"])

    # quality pairs: composites of the two donors scored against donor one
    parts1 = split_label_map(labels[0], faces[0])
    parts2 = split_label_map(labels[1], faces[1])
    rows = []
    for code in ("S-E", "SEN-M", "SE-NM", "HSEN-NM"):
        combo = parse_region_code(code)
        comp = compose(parts1, parts2, combo, 0.5)
        stem = code.replace("-", "_")
        export_composite(comp, out / "composites", stem)
        rows.append([stem, combo.region_index, "donors/donor1.png", f"composites/{stem}_image.png"])
    paths["quality_pairs"] = out / "quality_pairs.csv"
    write_csv(paths["quality_pairs"], QUALITY_HEADER, rows)

    paths["scores"] = out / "scores.csv"
    write_scores(tensor_from_records(score_tensor_records(rng)), paths["scores"])
    paths["impostors"] = out / "impostors.csv"
    write_csv(paths["impostors"], IMPOSTOR_HEADER,
              [[f"frs{f}", repr(float(s))] for f in range(2) for s in rng.normal(0.3, 0.1, 2000)])

    bonafide, attack = detection_scores(rng, 150, 150, separation=2.5)
    paths["detector_scores"] = out / "detector_scores.csv"
    with open(paths["detector_scores"], "w", encoding="utf-8") as fh:
        fh.write("# polarity=attack_high\n")
    det_rows = [[f"bf{i:03d}", "bonafide", repr(float(s))] for i, s in enumerate(bonafide)]
    det_rows += [[f"at{i:03d}", "attack", repr(float(s))] for i, s in enumerate(attack)]
    with open(paths["detector_scores"], "a", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(DETECTION_HEADER)
        w.writerows(det_rows)

    paths["landmarks"] = out / "landmarks.csv"
    lm_rows = []
    for i in range(12):
        pts = frontal_landmarks(rng, skew=0.0 if i % 3 else 6.0)
        lm_rows.append([f"img{i:02d}"] + [repr(float(v)) for p in pts for v in p])
    write_csv(paths["landmarks"], LANDMARK_HEADER, lm_rows)

    paths["embeddings"] = out / "embeddings.csv"
    emb = rng.normal(size=(12, 8))
    write_csv(paths["embeddings"], ["subject_id"] + [f"e{c}" for c in range(8)],
              [[f"subj{i:02d}"] + [repr(float(v)) for v in row] for i, row in enumerate(emb)])
    return paths
