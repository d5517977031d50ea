"""CSV ingestion and canonical serialisation.

Every reader is total over user data: malformed input raises ``InputError``
naming the file, the 1-based line and the violated rule.
"""
from __future__ import annotations

import csv
import io
import math
from collections import defaultdict
from pathlib import Path

import numpy as np

from .detection import DetectionScoreSet
from .pairing import DegenerateLandmarks, LandmarkSet5
from .vulnerability import ScoreTensor, TypeBlock

SCORE_HEADER = ["frs_id", "gen_type", "morph_id", "attempt_id", "subject_slot", "score", "ftar"]
IMPOSTOR_HEADER = ["frs_id", "score"]
DETECTION_HEADER = ["image_id", "label", "score"]
LANDMARK_HEADER = ["image_id", "lex", "ley", "rex", "rey", "nx", "ny", "lmx", "lmy", "rmx", "rmy"]
QUALITY_HEADER = ["pair_id", "region", "reference", "composite"]


class InputError(ValueError):
    def __init__(self, path, line: int | None, rule: str, detail: str):
        self.path, self.line, self.rule, self.detail = str(path), line, rule, detail
        where = f"{path}:{line}" if line is not None else str(path)
        super().__init__(f"{where}: {rule}: {detail}")


def _rows(path, header: list[str], *, prefix_ok: bool = False):
    """Yield (line number, row) after checking the header line."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(path, None, "unreadable file", str(exc)) from None
    lines = text.splitlines()
    directives = {}
    start = 0
    while start < len(lines) and lines[start].startswith("#"):
        body = lines[start][1:].strip()
        if "=" in body:
            k, v = body.split("=", 1)
            directives[k.strip()] = v.strip()
        start += 1
    if start >= len(lines):
        raise InputError(path, None, "schema", "missing header row")
    got = next(csv.reader([lines[start]]))
    got = [h.strip() for h in got]
    ok = got[: len(header)] == header if prefix_ok else got == header
    if not ok:
        raise InputError(path, start + 1, "schema", f"expected header {','.join(header)}, got {','.join(got)}")
    reader = csv.reader(lines[start + 1:])
    rows = []
    for offset, row in enumerate(reader):
        lineno = start + 2 + offset
        if not row or all(not c.strip() for c in row):
            continue
        if not prefix_ok and len(row) != len(header):
            raise InputError(path, lineno, "schema", f"expected {len(header)} fields, got {len(row)}")
        rows.append((lineno, [c.strip() for c in row]))
    return directives, got, rows


def _float(path, lineno, text, what):
    try:
        v = float(text)
    except ValueError:
        raise InputError(path, lineno, "non-numeric value", f"{what} {text!r}") from None
    if math.isnan(v):
        raise InputError(path, lineno, "non-numeric value", f"{what} is NaN")
    return v


# -- score tensor ------------------------------------------------------------------


def load_scores(path) -> ScoreTensor:
    _, _, rows = _rows(path, SCORE_HEADER)
    entries = []
    for lineno, (frs, d, morph, attempt, slot_text, score_text, ftar_text) in rows:
        for name, value in (("frs_id", frs), ("gen_type", d), ("morph_id", morph), ("attempt_id", attempt)):
            if not value:
                raise InputError(path, lineno, "schema", f"empty {name}")
        try:
            slot = int(slot_text)
        except ValueError:
            raise InputError(path, lineno, "schema", f"subject_slot {slot_text!r} is not an integer") from None
        if ftar_text not in ("0", "1"):
            raise InputError(path, lineno, "ftar outside {0,1}", f"got {ftar_text!r}")
        failed = ftar_text == "1"
        if score_text == "" and failed:
            score = -math.inf  # nothing acquired, never a match
        else:
            score = _float(path, lineno, score_text, "score")
        entries.append((lineno, frs, d, morph, attempt, slot, score, failed))
    return build_tensor(entries, path)


def tensor_from_records(records, source="<records>") -> ScoreTensor:
    """Tensor from (frs_id, gen_type, morph_id, attempt_id, slot, score, ftar) tuples."""
    entries = []
    for n, (frs, d, morph, attempt, slot, score, ftar) in enumerate(records, 1):
        if ftar not in (0, 1, False, True):
            raise InputError(source, n, "ftar outside {0,1}", f"got {ftar!r}")
        entries.append((n, frs, d, morph, attempt, int(slot), float(score), bool(ftar)))
    return build_tensor(entries, source)


def build_tensor(entries, path) -> ScoreTensor:
    # (d, l, j, i) -> {slot: score}; (d, l, j, i) -> ftar of the attempt
    scores: dict = defaultdict(dict)
    ftar: dict = defaultdict(bool)
    first_line: dict = {}
    for lineno, frs, d, morph, attempt, slot, score, failed in entries:
        if slot < 1:
            raise InputError(path, lineno, "schema", f"subject_slot must be >= 1, got {slot}")
        key = (d, frs, morph, attempt)
        if slot in scores[key]:
            raise InputError(path, lineno, "duplicate row",
                             f"FRS {frs} type {d} morph {morph} attempt {attempt} slot {slot} repeated")
        scores[key][slot] = score
        ftar[key] |= failed
        first_line.setdefault(key, lineno)

    if not scores:
        raise InputError(path, None, "schema", "no score rows")
    n_slots = max(max(v) for v in scores.values())
    for key, slots in scores.items():
        if sorted(slots) != list(range(1, n_slots + 1)):
            d, frs, morph, attempt = key
            missing = sorted(set(range(1, n_slots + 1)) - set(slots))
            raise InputError(path, first_line[key], "unpaired attempt",
                             f"morph {morph} attempt {attempt} (FRS {frs}, type {d}) lacks subject slot(s) {missing}")

    by_type: dict = defaultdict(lambda: defaultdict(set))  # d -> frs -> {(morph, attempt)}
    for d, frs, morph, attempt in scores:
        by_type[d][frs].add((morph, attempt))

    tensor = ScoreTensor()
    for d in sorted(by_type):
        per_frs = by_type[d]
        frs_ids = tuple(sorted(per_frs))
        trials = per_frs[frs_ids[0]]
        for f in frs_ids[1:]:
            if per_frs[f] != trials:
                diff = sorted(per_frs[f] ^ trials)[0]
                raise InputError(path, None, "incomplete FRS coverage",
                                 f"type {d}: FRS {f} and {frs_ids[0]} disagree on morph {diff[0]} attempt {diff[1]}")
        morph_ids = tuple(sorted({m for m, _ in trials}))
        attempt_ids = tuple(sorted({a for _, a in trials}))
        mi = {m: k for k, m in enumerate(morph_ids)}
        ai = {a: k for k, a in enumerate(attempt_ids)}
        s = np.full((len(frs_ids), len(morph_ids), len(attempt_ids), n_slots), -np.inf)
        present = np.zeros((len(morph_ids), len(attempt_ids)), dtype=bool)
        fl = np.zeros((len(frs_ids), len(morph_ids), len(attempt_ids)), dtype=bool)
        for fi, f in enumerate(frs_ids):
            for morph, attempt in trials:
                key = (d, f, morph, attempt)
                j, i = mi[morph], ai[attempt]
                s[fi, j, i] = [scores[key][k] for k in range(1, n_slots + 1)]
                fl[fi, j, i] = ftar[key]
                present[j, i] = True
        tensor.blocks[d] = TypeBlock(frs_ids, morph_ids, attempt_ids, s, present, fl)
    return tensor


def _fmt(x: float, failed: bool) -> str:
    return "" if x == -math.inf and failed else repr(float(x))


def dump_scores(t: ScoreTensor) -> str:
    """Canonical CSV: rows sorted by type, FRS, morph, attempt, slot."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SCORE_HEADER)
    for d in sorted(t.blocks):
        b = t.blocks[d]
        for fi, f in enumerate(b.frs_ids):
            for j, morph in enumerate(b.morph_ids):
                for i, attempt in enumerate(b.attempt_ids):
                    if not b.present[j, i]:
                        continue
                    for k in range(b.n_slots):
                        w.writerow([f, d, morph, attempt, k + 1, _fmt(b.scores[fi, j, i, k], b.ftar[fi, j, i]),
                                    int(b.ftar[fi, j, i])])
    return buf.getvalue()


def write_scores(t: ScoreTensor, path) -> None:
    Path(path).write_text(dump_scores(t), encoding="utf-8")


def load_impostors(path) -> dict[str, np.ndarray]:
    _, _, rows = _rows(path, IMPOSTOR_HEADER)
    out = defaultdict(list)
    for lineno, (frs, score) in rows:
        if not frs:
            raise InputError(path, lineno, "schema", "empty frs_id")
        out[frs].append(_float(path, lineno, score, "score"))
    if not out:
        raise InputError(path, None, "schema", "no impostor scores")
    return {f: np.array(v) for f, v in sorted(out.items())}


# -- detector scores -----------------------------------------------------------------


def load_detection_scores(path) -> DetectionScoreSet:
    """Detector scores, normalised so that higher means more attack-like."""
    directives, _, rows = _rows(path, DETECTION_HEADER)
    polarity = directives.get("polarity")
    if polarity not in ("attack_high", "attack_low"):
        raise InputError(path, 1, "polarity directive",
                         "first line must declare '# polarity=attack_high' or '# polarity=attack_low'")
    sign = 1.0 if polarity == "attack_high" else -1.0
    bonafide, attack = [], []
    for lineno, (_, label, score) in rows:
        value = sign * _float(path, lineno, score, "score")
        if label == "bonafide":
            bonafide.append(value)
        elif label == "attack":
            attack.append(value)
        else:
            raise InputError(path, lineno, "label", f"expected bonafide or attack, got {label!r}")
    if not bonafide or not attack:
        raise InputError(path, None, "empty class", "need both bona fide and attack scores")
    return DetectionScoreSet(np.array(bonafide), np.array(attack))


# -- landmarks and embeddings ----------------------------------------------------------


def load_landmarks(path) -> list[tuple[str, LandmarkSet5]]:
    _, _, rows = _rows(path, LANDMARK_HEADER)
    out = []
    for lineno, row in rows:
        vals = [_float(path, lineno, v, name) for v, name in zip(row[1:], LANDMARK_HEADER[1:])]
        try:
            lm = LandmarkSet5.from_array(vals)
        except DegenerateLandmarks as exc:
            raise InputError(path, lineno, "degenerate landmarks", str(exc)) from None
        out.append((row[0], lm))
    return out


def load_embeddings(path) -> tuple[list[str], np.ndarray]:
    _, header, rows = _rows(path, ["subject_id"], prefix_ok=True)
    dim = len(header) - 1
    if dim < 1:
        raise InputError(path, 1, "schema", "expected subject_id followed by at least one component column")
    ids, vecs = [], []
    for lineno, row in rows:
        if len(row) != dim + 1:
            raise InputError(path, lineno, "schema", f"expected {dim + 1} fields, got {len(row)}")
        v = [_float(path, lineno, x, "component") for x in row[1:]]
        if not any(v):
            raise InputError(path, lineno, "zero embedding", f"subject {row[0]}")
        ids.append(row[0])
        vecs.append(v)
    if len(ids) < 2:
        raise InputError(path, None, "schema", "need at least two embeddings")
    return ids, np.array(vecs)


def load_quality_pairs(path) -> list[dict]:
    _, _, rows = _rows(path, QUALITY_HEADER)
    base = Path(path).parent
    out = []
    for lineno, (pair_id, region, ref, comp) in rows:
        out.append({"pair_id": pair_id, "region": region, "line": lineno,
                    "reference": base / ref, "composite": base / comp})
    return out


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
