"""Orchestration of the in-scope stages and the fixture self-check."""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, oracles
from . import io as cio
from .compositing import read_image
from .config import RunConfig
from .detection import DetectionScoreSet, deer, detection_report
from .pairing import angle_diff, find_optimal_pairs, pose_angles, cosine_distance_matrix
from .quality import QualityReport
from .regions import (
    CORRECTIONS_FILE, INDEX_SIZES, PUBLISHED_RAW_COUNTS, PUBLISHED_RAW_TOTAL, REFERENCE_FILE,
    RegionCodeError, catalog_summary, enumerate_all, fixture_dir, load_corrections,
    parse_region_code, raw_count,
)
from .synthetic import random_records, random_thresholds
from .vulnerability import (
    ThresholdSet, fmmpmr, gmap, gmap_per_type, map_matrix, mmpmr, threshold_at_far,
    thresholds_from_impostors,
)

logger = logging.getLogger(__name__)


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: Exception):
        self.stage, self.cause = stage, cause
        super().__init__(f"stage {stage!r} failed: {cause}")


@dataclass
class PipelineInputs:
    scores: Path | None = None
    impostors: Path | None = None
    detection: Path | None = None
    quality_pairs: Path | None = None
    landmarks: Path | None = None
    embeddings: Path | None = None


@dataclass
class MetricReportBundle:
    config: dict
    catalog: dict
    vulnerability: dict | None = None
    detection: dict | None = None
    quality: dict | None = None
    pose: dict | None = None
    pairs: dict | None = None
    checks: list = field(default_factory=list)
    tool_version: str = __version__

    def to_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if v is not None}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=False) + "\n"

    def summary(self) -> str:
        lines = [f"cfia {self.tool_version}"]
        c = self.catalog
        lines.append(f"catalog: {c['raw_total']} raw combinations, {c['unique_total']} unique "
                     f"under rule {c['dedup_rule']!r}")
        lines += [f"  finding: {f}" for f in c["findings"]]
        if self.vulnerability:
            v = self.vulnerability
            lines.append(f"G-MAP: {v['gmap']:.4f} (include_ftar={v['config']['include_ftar']}, "
                         f"FAR={v['config']['far']})")
            for d, val in sorted(v["gmap_per_type"].items()):
                lines.append(f"  type {d}: {val:.4f}")
        if self.detection:
            dt = self.detection
            lines.append(f"D-EER: {dt['d_eer']:.4f}")
            for p in dt["bpcer_at_apcer"]:
                lines.append(f"  BPCER @ APCER={p['target_apcer']:.2f}: {p['bpcer']:.4f}")
        if self.quality:
            for region, agg in self.quality["by_region"].items():
                lines.append(f"quality {region}: PSNR {agg['psnr']['mean']} dB, SSIM {agg['ssim']['mean']}")
        if self.pose:
            lines.append(f"pose: {self.pose['n_frontal']}/{len(self.pose['faces'])} frontal")
        if self.pairs:
            lines.append(f"pairs: {len(self.pairs['pairs'])}")
        failed = [ch["name"] for ch in self.checks if not ch["passed"]]
        lines.append(f"checks: {len(self.checks) - len(failed)}/{len(self.checks)} passed"
                     + (f" (failed: {', '.join(failed)})" if failed else ""))
        return "\n".join(lines) + "\n"

    def write(self, out_dir) -> None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "bundle.json").write_text(self.to_json())
        (out_dir / "summary.txt").write_text(self.summary())


def _check(name: str, passed: bool, detail: str = "") -> dict:
    return {"name": name, "passed": bool(passed), "detail": detail}


def _stage(name):
    def wrap(fn):
        def inner(*args, **kwargs):
            try:
                return fn(*args, **kwargs)
            except StageError:
                raise
            except Exception as exc:
                raise StageError(name, exc) from exc
        return inner
    return wrap


@_stage("catalog")
def _catalog(config: RunConfig):
    summary = catalog_summary(config.dedup_rule)
    checks = [_check("catalog-raw-total", summary["raw_total"] == PUBLISHED_RAW_TOTAL,
                     f"{summary['raw_total']} raw combinations")]
    return summary, checks


@_stage("vulnerability")
def _vulnerability(config: RunConfig, inputs: PipelineInputs):
    tensor = cio.load_scores(inputs.scores)
    impostors = cio.load_impostors(inputs.impostors)
    thresholds = thresholds_from_impostors(impostors, config.far)
    report = gmap(tensor, thresholds, config.include_ftar, with_baselines=True)
    checks = []
    rates = [report.gmap, *report.gmap_per_type.values()]
    for per in (report.mmpmr, report.fmmpmr, report.gmap_per_frs):
        for vals in per.values():
            rates += list(vals.values())
    checks.append(_check("rates-in-unit-interval", all(0.0 <= r <= 1.0 for r in rates)))
    checks.append(_check("fmmpmr-le-mmpmr", all(
        report.fmmpmr[d][f] <= report.mmpmr[d][f] for d in report.mmpmr for f in report.mmpmr[d])))
    checks.append(_check("map-monotone", all(
        np.all(np.diff(m["matrix"], axis=0) <= 0) and np.all(np.diff(m["matrix"], axis=1) <= 0)
        for m in report.map.values())))
    checks.append(_check("gmap-le-fmmpmr", all(
        report.gmap_per_type[d] <= min(report.fmmpmr[d].values()) for d in report.fmmpmr)))
    out = report.to_dict()
    out["n_impostors"] = {f: int(len(s)) for f, s in impostors.items()}
    return out, checks


@_stage("detection")
def _detection(inputs: PipelineInputs):
    scores = cio.load_detection_scores(inputs.detection)
    return detection_report(scores), []


@_stage("quality")
def _quality(inputs: PipelineInputs):
    report = QualityReport()
    for pair in cio.load_quality_pairs(inputs.quality_pairs):
        report.add(pair["pair_id"], pair["region"], read_image(pair["reference"]), read_image(pair["composite"]))
    out = report.to_dict()
    ssims = [p["ssim"] for p in report.pairs]
    return out, [_check("ssim-bounded", all(-1.0 <= s <= 1.0 for s in ssims))]


@_stage("pose")
def _pose(config: RunConfig, inputs: PipelineInputs):
    faces = []
    for image_id, lm in cio.load_landmarks(inputs.landmarks):
        t1, t2 = pose_angles(lm)
        diff = angle_diff(lm)
        faces.append({"image_id": image_id, "theta1": t1, "theta2": t2,
                      "angle_diff": diff, "frontal": diff <= config.tau})
    return {"tau": config.tau, "faces": faces, "n_frontal": sum(f["frontal"] for f in faces)}, []


@_stage("pairing")
def _pairs(inputs: PipelineInputs):
    ids, emb = cio.load_embeddings(inputs.embeddings)
    pairs = find_optimal_pairs(emb)
    dist = cosine_distance_matrix(emb)
    rows = [{"subject_a": ids[i], "subject_b": ids[j], "distance": float(dist[i, j])} for i, j in pairs]
    seen = {(p["subject_a"], p["subject_b"]) for p in rows}
    ok = all((b, a) not in seen and a != b for a, b in seen)
    return {"pairs": rows}, [_check("pairs-no-swapped-duplicates", ok)]


def run_pipeline(config: RunConfig, inputs: PipelineInputs | None = None) -> MetricReportBundle:
    """Run every stage whose inputs are given; the catalog summary always runs."""
    inputs = inputs or PipelineInputs()
    catalog, checks = _catalog(config)
    bundle = MetricReportBundle(config=config.to_dict(), catalog=catalog)
    if (inputs.scores is None) != (inputs.impostors is None):
        raise StageError("vulnerability", ValueError("scores and impostors must be given together"))
    if inputs.scores is not None:
        bundle.vulnerability, more = _vulnerability(config, inputs)
        checks += more
    if inputs.detection is not None:
        bundle.detection, more = _detection(inputs)
        checks += more
    if inputs.quality_pairs is not None:
        bundle.quality, more = _quality(inputs)
        checks += more
    if inputs.landmarks is not None:
        bundle.pose, more = _pose(config, inputs)
        checks += more
    if inputs.embeddings is not None:
        bundle.pairs, more = _pairs(inputs)
        checks += more
    bundle.checks = checks
    return bundle


# -- self check ------------------------------------------------------------------


def _scan_fixture(path: Path, corrections: dict):
    parsed, errors = [], []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        raw = line.strip()
        if not raw or raw.startswith("#"):
            continue
        try:
            parsed.append((lineno, parse_region_code(corrections.get(raw, raw))))
        except RegionCodeError as exc:
            errors.append(f"line {lineno}: {exc}")
    return parsed, errors


def validate_fixture_suite(seed: int = 0, n_random: int = 25) -> list[dict]:
    """Self-check of the shipped fixtures and of the metric code against the oracles."""
    results = []
    generated = enumerate_all()
    gen_counts = generated.counts_by_index()
    results.append(_check(
        "raw-counts",
        tuple(gen_counts[i] for i in INDEX_SIZES) == PUBLISHED_RAW_COUNTS
        and all(gen_counts[i] == raw_count(i) for i in INDEX_SIZES),
        f"per-index counts {[gen_counts[i] for i in INDEX_SIZES]}"))
    results.append(_check("raw-total", len(generated) == PUBLISHED_RAW_TOTAL,
                          f"raw catalog count {len(generated)}"))

    fdir = fixture_dir()
    table, sidecar = fdir / REFERENCE_FILE, fdir / CORRECTIONS_FILE
    try:
        corrections = load_corrections(sidecar)
        bad = []
        for raw, fixed in corrections.items():
            try:
                parse_region_code(fixed)
            except RegionCodeError as exc:
                bad.append(str(exc))
        results.append(_check("corrections-sidecar", not bad, "; ".join(bad) or f"{len(corrections)} corrections"))
    except (OSError, ValueError) as exc:
        corrections = {}
        results.append(_check("corrections-sidecar", False, str(exc)))
    try:
        parsed, errors = _scan_fixture(table, corrections)
    except OSError as exc:
        results.append(_check("fixture-parse", False, str(exc)))
        parsed, errors = [], None
    if errors is not None:
        results.append(_check("fixture-parse", not errors,
                              "; ".join(errors) or f"{len(parsed)} entries parsed"))
        combos = [c for _, c in parsed]
        dupes = len(combos) - len(set(combos))
        results.append(_check("fixture-unique", dupes == 0, f"{dupes} duplicate entries"))
        outside = [c.code for c in combos if c not in set(generated.combinations)]
        results.append(_check("fixture-subset", not outside, ", ".join(outside)))
        full = sum(1 for c in combos if c.code == "HBSENM-HBSENM")
        results.append(_check("fixture-full-face-once", full == 1, f"{full} occurrences"))
        idx = [c.region_index for c in combos]
        results.append(_check("fixture-index-order", all(a <= b for a, b in zip(idx, idx[1:]))))

    results.append(_oracle_check("oracle-vulnerability", _oracle_vulnerability, seed, n_random))
    results.append(_oracle_check("oracle-pairing", _oracle_pairing, seed, n_random))
    results.append(_oracle_check("oracle-threshold", _oracle_threshold, seed, n_random))
    results.append(_oracle_check("oracle-deer", _oracle_deer, seed, n_random))
    return results


def _oracle_check(name, fn, seed, n):
    try:
        mismatches = fn(np.random.default_rng(seed), n)
    except Exception as exc:  # a crash is reported as a failed check
        return _check(name, False, f"{type(exc).__name__}: {exc}")
    return _check(name, not mismatches, "; ".join(mismatches[:3]) or f"{n} random cases agree")


def _oracle_vulnerability(rng, n):
    bad = []
    for case in range(n):
        records = random_records(rng, n_frs=int(rng.integers(1, 4)), n_types=int(rng.integers(1, 3)),
                                 n_morphs=int(rng.integers(1, 5)), n_attempts=int(rng.integers(1, 4)),
                                 variable_attempts=bool(rng.integers(0, 2)))
        t = cio.tensor_from_records(records)
        th = random_thresholds(rng, t.frs_ids)
        ts = ThresholdSet(th)
        for d, block in t.blocks.items():
            for f in block.frs_ids:
                if mmpmr(t, f, d, th[f]) != oracles.mmpmr(records, f, d, th[f]):
                    bad.append(f"case {case}: mmpmr {f}/{d}")
                if fmmpmr(t, f, d, th[f]) != oracles.fmmpmr(records, f, d, th[f]):
                    bad.append(f"case {case}: fmmpmr {f}/{d}")
            if map_matrix(t, d, ts).tolist() != oracles.map_matrix(records, d, th):
                bad.append(f"case {case}: map {d}")
            if gmap_per_type(t, d, ts) != oracles.gmap_per_type(records, d, th):
                bad.append(f"case {case}: gmap {d}")
        if gmap(t, ts).gmap != oracles.gmap(records, th):
            bad.append(f"case {case}: gmap overall")
    return bad


def _oracle_pairing(rng, n):
    bad = []
    for case in range(n):
        e = rng.normal(size=(int(rng.integers(2, 13)), 2))
        if find_optimal_pairs(e) != oracles.optimal_pairs(e.tolist()):
            bad.append(f"case {case}")
    return bad


def _oracle_threshold(rng, n):
    bad = []
    for case in range(n):
        s = (rng.integers(0, 20, size=int(rng.integers(1, 40))) / 20).tolist()
        far = float(rng.choice([0.001, 0.01, 0.05, 0.1, 0.25, 0.5, 0.9]))
        if threshold_at_far(s, far) != oracles.threshold_at_far(s, far):
            bad.append(f"case {case}")
    return bad


def _oracle_deer(rng, n):
    bad = []
    for case in range(n):
        b = rng.normal(0, 1, int(rng.integers(1, 30)))
        a = rng.normal(rng.uniform(-1, 3), 1, int(rng.integers(1, 30)))
        got = deer(DetectionScoreSet(b, a))
        want = oracles.deer(b.tolist(), a.tolist())
        if not (math.isclose(got[0], want[0], abs_tol=1e-12) and got[1] == want[1]):
            bad.append(f"case {case}")
    return bad
