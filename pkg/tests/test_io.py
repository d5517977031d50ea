from __future__ import annotations

import math
import tempfile
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given

from cfia import io as cio
from cfia.synthetic import random_records
from cfia.vulnerability import fmmpmr

from conftest import small_records

HEADER = ",".join(cio.SCORE_HEADER)


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_canonical_round_trip_1000_morphs(tmp_path):
    rng = np.random.default_rng(11)
    records = random_records(rng, n_frs=4, n_types=1, n_morphs=1000, n_attempts=2, grid=1000)
    t = cio.tensor_from_records(records)
    p = tmp_path / "s.csv"
    cio.write_scores(t, p)
    text = p.read_text()
    again = cio.load_scores(p)
    assert cio.dump_scores(again) == text
    b0, b1 = t.blocks["type0"], again.blocks["type0"]
    assert np.array_equal(b0.scores, b1.scores)
    assert np.array_equal(b0.ftar, b1.ftar)


@given(small_records())
def test_round_trip_preserves_metrics(case):
    _, t, th = case
    text = cio.dump_scores(t)
    with tempfile.TemporaryDirectory() as tmp:
        p = Path(tmp) / "s.csv"
        p.write_text(text)
        again = cio.load_scores(p)
    assert cio.dump_scores(again) == text
    for d, block in t.blocks.items():
        for f in block.frs_ids:
            assert fmmpmr(again, f, d, th[f]) == fmmpmr(t, f, d, th[f])


def test_failed_acquisition_without_score(tmp_path):
    p = write(tmp_path, "s.csv", f"{HEADER}\nA,x,m1,a1,1,,1\nA,x,m1,a1,2,0.9,1\n")
    t = cio.load_scores(p)
    b = t.blocks["x"]
    assert b.scores[0, 0, 0, 0] == -math.inf
    assert b.ftar[0, 0, 0]
    assert cio.dump_scores(t).splitlines()[1] == "A,x,m1,a1,1,,1"


@pytest.mark.parametrize("body,line,rule", [
    ("A,x,m1,a1,1,0.5,0\nA,x,m1,a1,1,0.6,0\nA,x,m1,a1,2,0.6,0\n", 3, "duplicate row"),
    ("A,x,m1,a1,1,0.5,0\nA,x,m1,a1,2,0.5,0\nA,x,m1,a2,1,0.5,0\n", 4, "unpaired attempt"),
    ("A,x,m1,a1,1,abc,0\n", 2, "non-numeric value"),
    ("A,x,m1,a1,1,0.5,2\n", 2, "ftar outside {0,1}"),
    ("A,x,m1,a1,1,,0\n", 2, "non-numeric value"),
    ("A,x,m1,a1,1,0.5\n", 2, "schema"),
])
def test_score_errors_name_line_and_rule(tmp_path, body, line, rule):
    p = write(tmp_path, "s.csv", f"{HEADER}\n{body}")
    with pytest.raises(cio.InputError) as exc:
        cio.load_scores(p)
    assert exc.value.line == line
    assert exc.value.rule == rule
    assert str(p) in str(exc.value)


def test_unpaired_attempt_names_morph_and_attempt(tmp_path):
    p = write(tmp_path, "s.csv", f"{HEADER}\nA,x,m1,a1,1,0.5,0\nA,x,m1,a1,2,0.5,0\nA,x,m7,a3,2,0.5,0\n")
    with pytest.raises(cio.InputError, match="m7 attempt a3"):
        cio.load_scores(p)


def test_incomplete_frs_coverage(tmp_path):
    body = "A,x,m1,a1,1,0.5,0\nA,x,m1,a1,2,0.5,0\nA,x,m1,a2,1,0.5,0\nA,x,m1,a2,2,0.5,0\n" \
           "B,x,m1,a1,1,0.5,0\nB,x,m1,a1,2,0.5,0\n"
    with pytest.raises(cio.InputError, match="incomplete FRS coverage"):
        cio.load_scores(write(tmp_path, "s.csv", f"{HEADER}\n{body}"))


def test_bad_header(tmp_path):
    with pytest.raises(cio.InputError) as exc:
        cio.load_scores(write(tmp_path, "s.csv", "frs,type\n"))
    assert exc.value.line == 1


def test_missing_file(tmp_path):
    with pytest.raises(cio.InputError, match="unreadable"):
        cio.load_scores(tmp_path / "nope.csv")


def test_detection_polarity(tmp_path):
    body = "image_id,label,score\na,bonafide,0.9\nb,attack,0.1\n"
    with pytest.raises(cio.InputError, match="polarity"):
        cio.load_detection_scores(write(tmp_path, "d.csv", body))
    s = cio.load_detection_scores(write(tmp_path, "d2.csv", "# polarity=attack_low\n" + body))
    assert s.bonafide.tolist() == [-0.9] and s.attack.tolist() == [-0.1]


def test_detection_label(tmp_path):
    body = "# polarity=attack_high\nimage_id,label,score\na,genuine,0.9\n"
    with pytest.raises(cio.InputError) as exc:
        cio.load_detection_scores(write(tmp_path, "d.csv", body))
    assert exc.value.line == 3


def test_landmarks(tmp_path):
    head = ",".join(cio.LANDMARK_HEADER)
    rows = cio.load_landmarks(write(tmp_path, "l.csv", f"{head}\nf1,-1,-1,1,-1,0,0,-1,1,1,1\n"))
    assert rows[0][0] == "f1"
    with pytest.raises(cio.InputError, match="degenerate"):
        cio.load_landmarks(write(tmp_path, "l2.csv", f"{head}\nf1,0,0,0,0,0,0,-1,1,1,1\n"))


def test_embeddings(tmp_path):
    ids, e = cio.load_embeddings(write(tmp_path, "e.csv", "subject_id,a,b\ns1,1,0\ns2,0,1\n"))
    assert ids == ["s1", "s2"] and e.shape == (2, 2)
    with pytest.raises(cio.InputError, match="zero embedding"):
        cio.load_embeddings(write(tmp_path, "e2.csv", "subject_id,a,b\ns1,0,0\ns2,0,1\n"))
    with pytest.raises(cio.InputError) as exc:
        cio.load_embeddings(write(tmp_path, "e3.csv", "subject_id,a,b\ns1,1,0\ns2,0\n"))
    assert exc.value.line == 3


def test_impostors(tmp_path):
    imp = cio.load_impostors(write(tmp_path, "i.csv", "frs_id,score\nB,0.2\nA,0.1\nA,0.3\n"))
    assert list(imp) == ["A", "B"]
    assert imp["A"].tolist() == [0.1, 0.3]


def test_quality_pairs_resolve_relative_paths(tmp_path):
    p = write(tmp_path, "q.csv", "pair_id,region,reference,composite\np1,3,ref.png,comp.png\n")
    row = cio.load_quality_pairs(p)[0]
    assert row["reference"] == tmp_path / "ref.png"
