"""Attack-detection error rates: APCER, BPCER, D-EER and BPCER at a fixed APCER.

Scores follow the convention that higher means more attack-like; a sample
with score > threshold is classified as an attack.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .vulnerability import allowed_count


@dataclass
class DetectionScoreSet:
    bonafide: np.ndarray
    attack: np.ndarray

    def __post_init__(self):
        self.bonafide = np.asarray(self.bonafide, dtype=np.float64)
        self.attack = np.asarray(self.attack, dtype=np.float64)
        if self.bonafide.size == 0 or self.attack.size == 0:
            raise ValueError("both bona fide and attack scores are required")

    def swapped(self) -> "DetectionScoreSet":
        """Labels exchanged and polarity flipped so the convention still holds."""
        return DetectionScoreSet(-self.attack, -self.bonafide)


def det_errors(s: DetectionScoreSet, tau: float) -> tuple[float, float]:
    apcer = float(np.mean(s.attack <= tau))
    bpcer = float(np.mean(s.bonafide > tau))
    return apcer, bpcer


def candidate_thresholds(s: DetectionScoreSet) -> np.ndarray:
    u = np.unique(np.concatenate([s.bonafide, s.attack]))
    mids = (u[:-1] + u[1:]) / 2
    return np.concatenate([[u[0] - 1.0], mids, [u[-1] + 1.0]])


def deer(s: DetectionScoreSet) -> tuple[float, float]:
    """(D-EER, threshold) from an exhaustive sweep over score midpoints."""
    taus = candidate_thresholds(s)
    a_sorted, b_sorted = np.sort(s.attack), np.sort(s.bonafide)
    apcer = np.searchsorted(a_sorted, taus, side="right") / a_sorted.size
    bpcer = (b_sorted.size - np.searchsorted(b_sorted, taus, side="right")) / b_sorted.size
    gap = np.abs(apcer - bpcer)
    best = int(np.argmin(gap))
    return float((apcer[best] + bpcer[best]) / 2), float(taus[best])


@dataclass
class OperatingPoint:
    target_apcer: float
    apcer: float
    bpcer: float
    threshold: float
    resolved: bool  # False when the attack set is too small to resolve the target


def bpcer_at_apcer(s: DetectionScoreSet, target: float) -> OperatingPoint:
    """BPCER at the least strict threshold whose APCER stays within target."""
    if not 0.0 < target < 1.0:
        raise ValueError(f"target APCER must lie in (0, 1), got {target}")
    a = np.sort(s.attack)
    n = a.size
    k = allowed_count(target, n)
    # largest threshold keeping at most k attacks at or below it: just under a[k]
    tau = float(np.nextafter(a[k], -np.inf)) if k < n else float(a[-1])
    apcer, bpcer = det_errors(s, tau)
    return OperatingPoint(target, apcer, bpcer, tau, resolved=n * target >= 1.0)


def detection_report(s: DetectionScoreSet, targets=(0.05, 0.10)) -> dict:
    rate, tau = deer(s)
    points = [bpcer_at_apcer(s, t) for t in targets]
    return {
        "n_bonafide": int(s.bonafide.size),
        "n_attack": int(s.attack.size),
        "d_eer": rate,
        "d_eer_threshold": tau,
        "bpcer_at_apcer": [p.__dict__ for p in points],
    }
