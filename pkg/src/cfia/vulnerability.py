"""FRS thresholds and the morph-vulnerability metric family.

Scores are grouped per attack generation type into a dense block of shape
(n_frs, n_morphs, n_attempts, n_slots). Morphs may carry different numbers
of probe attempts; absent attempts are marked in ``present`` and never
count as successes. Acceptance is always the strict comparison
``score > threshold``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np


class MetricError(ValueError):
    pass


@dataclass
class TypeBlock:
    frs_ids: tuple
    morph_ids: tuple
    attempt_ids: tuple
    scores: np.ndarray   # (F, M, P, K); -inf where no score was acquired
    present: np.ndarray  # (M, P) bool
    ftar: np.ndarray     # (F, M, P) bool

    def __post_init__(self):
        self.scores = np.asarray(self.scores, dtype=np.float64)
        self.present = np.asarray(self.present, dtype=bool)
        self.ftar = np.asarray(self.ftar, dtype=bool)
        f, m, p, k = self.scores.shape
        if (f, m, p) != (len(self.frs_ids), len(self.morph_ids), len(self.attempt_ids)):
            raise MetricError("score block shape does not match its id lists")
        if self.present.shape != (m, p) or self.ftar.shape != (f, m, p):
            raise MetricError("present/ftar shapes do not match the score block")
        if k < 1:
            raise MetricError("need at least one subject slot")
        if m and np.any(self.present.sum(axis=1) == 0):
            raise MetricError("every morph needs at least one probe attempt")

    @property
    def n_slots(self) -> int:
        return self.scores.shape[3]

    def frs_index(self, frs_id) -> int:
        try:
            return self.frs_ids.index(frs_id)
        except ValueError:
            raise MetricError(f"FRS {frs_id!r} not present for this generation type") from None

    def attempts_per_morph(self) -> np.ndarray:
        return self.present.sum(axis=1)

    def with_frs(self, frs_id, scores: np.ndarray, ftar: np.ndarray | None = None) -> "TypeBlock":
        """Copy with one more FRS slice of shape (M, P, K)."""
        m, p = self.present.shape
        ftar = np.zeros((m, p), dtype=bool) if ftar is None else ftar
        return TypeBlock(
            self.frs_ids + (frs_id,),
            self.morph_ids,
            self.attempt_ids,
            np.concatenate([self.scores, np.asarray(scores, dtype=np.float64)[None]]),
            self.present.copy(),
            np.concatenate([self.ftar, np.asarray(ftar, dtype=bool)[None]]),
        )


@dataclass
class ScoreTensor:
    blocks: dict = field(default_factory=dict)  # gen_type -> TypeBlock

    @property
    def gen_types(self) -> list:
        return list(self.blocks)

    @property
    def frs_ids(self) -> list:
        seen = {}
        for b in self.blocks.values():
            for f in b.frs_ids:
                seen.setdefault(f, None)
        return list(seen)

    def block(self, d) -> TypeBlock:
        try:
            return self.blocks[d]
        except KeyError:
            raise MetricError(f"generation type {d!r} not in score tensor") from None


# -- thresholds ------------------------------------------------------------------


def allowed_count(rate: float, n: int) -> int:
    """Largest count c with c / n <= rate (guarding against float noise in rate * n)."""
    return min(n, math.floor(rate * n + 1e-9))


def threshold_at_far(impostor_scores, far: float) -> float:
    """Smallest impostor score leaving at most ``far`` of impostors strictly above it."""
    s = np.sort(np.asarray(impostor_scores, dtype=np.float64))
    if s.size == 0:
        raise MetricError("cannot set a threshold from an empty impostor score set")
    if not 0.0 < far < 1.0:
        raise MetricError(f"FAR must lie in (0, 1), got {far}")
    n = s.size
    return float(s[max(0, n - 1 - allowed_count(far, n))])


@dataclass
class ThresholdSet:
    thresholds: dict
    far: float | None = None

    def __getitem__(self, frs_id) -> float:
        try:
            return self.thresholds[frs_id]
        except KeyError:
            raise MetricError(f"no threshold for FRS {frs_id!r}") from None

    def to_dict(self) -> dict:
        return {"far": self.far, "thresholds": {str(k): v for k, v in self.thresholds.items()}}


def thresholds_from_impostors(impostors: dict, far: float) -> ThresholdSet:
    return ThresholdSet({frs: threshold_at_far(s, far) for frs, s in impostors.items()}, far)


# -- per-attempt success ------------------------------------------------------------


def _paired_success(block: TypeBlock, fi: int, tau: float) -> np.ndarray:
    """(M, P) bool: every subject slot of the attempt is above threshold."""
    return np.all(block.scores[fi] > tau, axis=2) & block.present


def _rate(per_morph_counts: np.ndarray, attempts: np.ndarray) -> float:
    """Mean over morphs of successes / attempts, summed exactly."""
    m = len(per_morph_counts)
    if m == 0:
        raise MetricError("no morphs to evaluate")
    if np.all(attempts == attempts[0]):
        return float(Fraction(int(per_morph_counts.sum()), int(attempts[0]) * m))
    total = Fraction(0)
    for p in np.unique(attempts):
        total += Fraction(int(per_morph_counts[attempts == p].sum()), int(p))
    return float(total / m)


def _paired_rate(block: TypeBlock, fi: int, tau: float, include_ftar: bool) -> float:
    ok = _paired_success(block, fi, tau)
    if include_ftar:
        ok = ok & ~block.ftar[fi]
    return _rate(ok.sum(axis=1), block.attempts_per_morph())


def mmpmr(t: ScoreTensor, frs_id, d, tau: float) -> float:
    """Share of morphs whose every subject matches on at least one of its attempts."""
    block = t.block(d)
    fi = block.frs_index(frs_id)
    s = np.where(block.present[..., None], block.scores[fi], -np.inf)
    best = s.max(axis=1)  # (M, K) best attempt per subject
    accepted = np.all(best > tau, axis=1)
    return float(Fraction(int(accepted.sum()), len(block.morph_ids)))


def fmmpmr(t: ScoreTensor, frs_id, d, tau: float) -> float:
    """Share of (attempt, morph) trials in which all subjects match together."""
    block = t.block(d)
    return _paired_rate(block, block.frs_index(frs_id), tau, include_ftar=False)


def map_matrix(t: ScoreTensor, d, thresholds: ThresholdSet) -> np.ndarray:
    """Entry [r-1, c-1]: share of morphs with at least r successful paired
    attempts on at least c FRSs. Rows run to the largest attempt count."""
    block = t.block(d)
    if not block.frs_ids:
        raise MetricError("MAP needs at least one FRS")
    counts = np.stack([
        _paired_success(block, fi, thresholds[f]).sum(axis=1)
        for fi, f in enumerate(block.frs_ids)
    ])  # (F, M)
    n_frs, m = counts.shape
    rows = int(block.attempts_per_morph().max())
    out = np.empty((rows, n_frs))
    for r in range(1, rows + 1):
        n_systems = (counts >= r).sum(axis=0)
        for c in range(1, n_frs + 1):
            out[r - 1, c - 1] = float(Fraction(int((n_systems >= c).sum()), m))
    return out


def gmap_per_frs(t: ScoreTensor, d, thresholds: ThresholdSet, include_ftar: bool = True) -> dict:
    block = t.block(d)
    return {
        f: _paired_rate(block, fi, thresholds[f], include_ftar)
        for fi, f in enumerate(block.frs_ids)
    }


def gmap_per_type(t: ScoreTensor, d, thresholds: ThresholdSet, include_ftar: bool = True) -> float:
    """Worst case over FRSs of the FTAR-discounted paired acceptance rate."""
    per_frs = gmap_per_frs(t, d, thresholds, include_ftar)
    if not per_frs:
        raise MetricError(f"generation type {d!r} has no FRS scores")
    return min(per_frs.values())


@dataclass
class VulnerabilityReport:
    gmap: float
    gmap_per_type: dict
    gmap_per_frs: dict
    thresholds: ThresholdSet
    include_ftar: bool
    mmpmr: dict = field(default_factory=dict)
    fmmpmr: dict = field(default_factory=dict)
    map: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "gmap": self.gmap,
            "gmap_per_type": {str(d): v for d, v in self.gmap_per_type.items()},
            "gmap_per_frs": {str(d): {str(f): v for f, v in per.items()}
                             for d, per in self.gmap_per_frs.items()},
            "mmpmr": {str(d): {str(f): v for f, v in per.items()} for d, per in self.mmpmr.items()},
            "fmmpmr": {str(d): {str(f): v for f, v in per.items()} for d, per in self.fmmpmr.items()},
            "map": {str(d): {"frs": [str(f) for f in m["frs"]], "matrix": m["matrix"].tolist()}
                    for d, m in self.map.items()},
            "config": {"include_ftar": self.include_ftar, **self.thresholds.to_dict()},
        }


def gmap(t: ScoreTensor, thresholds: ThresholdSet, include_ftar: bool = True,
         with_baselines: bool = False) -> VulnerabilityReport:
    """Mean over generation types of the per-type value; optionally also the
    MMPMR/FMMPMR/MAP baselines on the same thresholds."""
    if not t.blocks:
        raise MetricError("empty score tensor")
    per_type, per_frs = {}, {}
    for d in t.gen_types:
        per_frs[d] = gmap_per_frs(t, d, thresholds, include_ftar)
        per_type[d] = min(per_frs[d].values())
    overall = float(sum(Fraction(v) for v in per_type.values()) / len(per_type))
    report = VulnerabilityReport(overall, per_type, per_frs, thresholds, include_ftar)
    if with_baselines:
        for d, block in t.blocks.items():
            report.mmpmr[d] = {f: mmpmr(t, f, d, thresholds[f]) for f in block.frs_ids}
            report.fmmpmr[d] = {f: fmmpmr(t, f, d, thresholds[f]) for f in block.frs_ids}
            report.map[d] = {"frs": list(block.frs_ids), "matrix": map_matrix(t, d, thresholds)}
    return report
