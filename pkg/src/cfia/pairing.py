"""Frontal-pose screening from five landmarks and nearest-neighbour donor pairing."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

DEFAULT_TAU = math.radians(3.0)


class DegenerateLandmarks(ValueError):
    pass


@dataclass(frozen=True)
class LandmarkSet5:
    left_eye: tuple[float, float]
    right_eye: tuple[float, float]
    nose: tuple[float, float]
    left_mouth: tuple[float, float]
    right_mouth: tuple[float, float]

    def __post_init__(self):
        pts = self.as_array()
        if not np.all(np.isfinite(pts)):
            raise DegenerateLandmarks("landmark coordinates must be finite")
        for i in range(5):
            for j in range(i + 1, 5):
                if np.array_equal(pts[i], pts[j]):
                    raise DegenerateLandmarks("two landmarks coincide")

    def as_array(self) -> np.ndarray:
        return np.array(
            [self.left_eye, self.right_eye, self.nose, self.left_mouth, self.right_mouth],
            dtype=np.float64,
        )

    @classmethod
    def from_array(cls, pts) -> "LandmarkSet5":
        pts = np.asarray(pts, dtype=np.float64).reshape(5, 2)
        return cls(*(tuple(p) for p in pts))


def angle_between(origin_a, tip_a, origin_b, tip_b) -> float:
    """Angle in radians between the vectors origin_a->tip_a and origin_b->tip_b.

    Same value as arccos of the dot product of the normalised vectors, but
    computed with atan2 so it stays accurate near 0 and pi.
    """
    u = np.asarray(tip_a, dtype=np.float64) - np.asarray(origin_a, dtype=np.float64)
    v = np.asarray(tip_b, dtype=np.float64) - np.asarray(origin_b, dtype=np.float64)
    nu, nv = math.hypot(*u), math.hypot(*v)
    if nu == 0.0 or nv == 0.0:
        raise DegenerateLandmarks("zero-length landmark vector")
    u, v = u / nu, v / nv
    cross = u[0] * v[1] - u[1] * v[0]
    dot = u[0] * v[0] + u[1] * v[1]
    return math.atan2(abs(cross), dot)


def pose_angles(lm: LandmarkSet5) -> tuple[float, float]:
    """(theta1, theta2): left eye/mouth vectors into the nose, nose out to right eye/mouth."""
    n = lm.nose
    theta1 = angle_between(lm.left_eye, n, lm.left_mouth, n)
    theta2 = angle_between(n, lm.right_eye, n, lm.right_mouth)
    return theta1, theta2


def angle_diff(lm: LandmarkSet5) -> float:
    theta1, theta2 = pose_angles(lm)
    return abs(theta1 - theta2)


def is_frontal(lm: LandmarkSet5, tau: float = DEFAULT_TAU) -> bool:
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    return angle_diff(lm) <= tau


def cosine_distance(u, v) -> float:
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch {u.shape} vs {v.shape}")
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise ValueError("cosine distance undefined for a zero vector")
    cos = float(np.dot(u, v) / (nu * nv))
    return 1.0 - min(1.0, max(-1.0, cos))


def cosine_distance_matrix(embeddings) -> np.ndarray:
    e = np.asarray(embeddings, dtype=np.float64)
    if e.ndim != 2:
        raise ValueError("embeddings must be a 2-D array (n, d)")
    norms = np.linalg.norm(e, axis=1)
    if np.any(norms == 0.0):
        raise ValueError(f"zero embedding at row {int(np.argmin(norms))}")
    unit = e / norms[:, None]
    return 1.0 - np.clip(unit @ unit.T, -1.0, 1.0)


def find_optimal_pairs(embeddings) -> list[tuple[int, int]]:
    """Greedy look-alike pairing over row indices of an (n, d) embedding array.

    Each row in order takes its nearest neighbour unless that would repeat an
    already chosen pair in swapped order, in which case the next-nearest
    non-conflicting neighbour is taken. Distance ties go to the lower index.
    A row whose every neighbour conflicts contributes no pair (with two rows
    the result is just ``[(0, 1)]``).
    """
    e = np.asarray(embeddings, dtype=np.float64)
    n = len(e)
    if n < 2:
        raise ValueError("need at least two embeddings to pair")
    dist = cosine_distance_matrix(e)
    chosen: list[tuple[int, int]] = []
    taken: set[tuple[int, int]] = set()
    for i in range(n):
        # stable sort keeps the lower index first among equal distances
        for j in np.argsort(dist[i], kind="stable"):
            j = int(j)
            if j == i or (j, i) in taken:
                continue
            chosen.append((i, j))
            taken.add((i, j))
            break
    return chosen
