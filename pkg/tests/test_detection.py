from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cfia import oracles
from cfia.detection import DetectionScoreSet, bpcer_at_apcer, deer, det_errors, detection_report

seeds = st.integers(0, 2**32 - 1)


def test_fully_separated_scores():
    s = DetectionScoreSet(np.linspace(0, 1, 50), np.linspace(2, 3, 70))
    rate, tau = deer(s)
    assert rate == 0.0
    assert 1.0 < tau < 2.0


@given(st.lists(st.floats(-5, 5, allow_nan=False), min_size=1, max_size=80))
def test_identical_scores_give_half(values):
    rate, _ = deer(DetectionScoreSet(values, values))
    assert abs(rate - 0.5) <= 1 / len(values)


def test_frozen_deer():
    rate, tau = deer(DetectionScoreSet([0, 1, 2, 3], [2.5, 3.5, 4, 5]))
    assert (rate, tau) == (0.25, 2.75)


@given(seeds)
def test_deer_matches_oracle(seed):
    rng = np.random.default_rng(seed)
    b = rng.normal(0, 1, int(rng.integers(1, 40)))
    a = rng.normal(rng.uniform(-1, 3), 1, int(rng.integers(1, 40)))
    got = deer(DetectionScoreSet(b, a))
    want = oracles.deer(b.tolist(), a.tolist())
    assert got[1] == want[1]
    assert got[0] == pytest.approx(want[0], abs=1e-12)


@given(seeds, st.floats(-3, 3))
def test_det_errors_match_oracle(seed, tau):
    rng = np.random.default_rng(seed)
    b, a = rng.normal(0, 1, 30), rng.normal(1, 1, 30)
    assert det_errors(DetectionScoreSet(b, a), tau) == oracles.det_errors(b.tolist(), a.tolist(), tau)


@given(seeds)
def test_swapping_labels_and_polarity_keeps_deer(seed):
    rng = np.random.default_rng(seed)
    s = DetectionScoreSet(rng.normal(0, 1, 25), rng.normal(1, 1, 31))
    assert deer(s)[0] == pytest.approx(deer(s.swapped())[0], abs=1 / 25 + 1 / 31)


@given(seeds, st.sampled_from([0.05, 0.1, 0.2]))
def test_bpcer_at_apcer_respects_target(seed, target):
    rng = np.random.default_rng(seed)
    s = DetectionScoreSet(rng.normal(0, 1, 60), rng.normal(2, 1, int(rng.integers(5, 80))))
    op = bpcer_at_apcer(s, target)
    assert op.apcer <= target + 1e-12
    # the next looser threshold would break the target
    looser = np.sort(s.attack)[np.searchsorted(np.sort(s.attack), op.threshold, side="right")] \
        if op.apcer < 1 and (s.attack > op.threshold).any() else None
    if looser is not None:
        assert det_errors(s, looser)[0] > target


def test_bpcer_at_apcer_frozen():
    attack = np.arange(1, 21, dtype=float)     # 20 attacks
    bonafide = np.array([0.0, 1.5, 2.5, 3.5])
    op = bpcer_at_apcer(DetectionScoreSet(bonafide, attack), 0.10)
    # two attacks (1, 2) may fall at or below tau; tau sits just under 3
    assert op.apcer == 0.10
    assert op.bpcer == 0.25
    assert op.resolved


def test_unresolvable_target_is_flagged():
    op = bpcer_at_apcer(DetectionScoreSet([0.0, 1.0], [2.0, 3.0, 4.0]), 0.05)
    assert not op.resolved
    assert op.apcer == 0.0


def test_empty_sets_rejected():
    with pytest.raises(ValueError):
        DetectionScoreSet([], [1.0])


def test_report_keys():
    rep = detection_report(DetectionScoreSet([0.0, 1.0], [2.0, 3.0]))
    assert rep["d_eer"] == 0.0
    assert [p["target_apcer"] for p in rep["bpcer_at_apcer"]] == [0.05, 0.10]
