"""Brute-force reference implementations used to cross-check the fast paths.

These work directly on flat score records
``(frs_id, gen_type, morph_id, attempt_id, slot, score, ftar)`` with plain
loops and share no code with the array implementations.
"""
from __future__ import annotations

import math
from fractions import Fraction


def _index(records):
    scores, ftar = {}, {}
    for frs, d, morph, attempt, slot, score, flag in records:
        scores[(frs, d, morph, attempt, slot)] = score
        key = (frs, d, morph, attempt)
        ftar[key] = ftar.get(key, 0) or int(flag)
    return scores, ftar


def _layout(records, d):
    frs_ids = sorted({r[0] for r in records if r[1] == d})
    morphs = sorted({r[2] for r in records if r[1] == d})
    attempts = {m: sorted({r[3] for r in records if r[1] == d and r[2] == m}) for m in morphs}
    slots = sorted({r[4] for r in records})
    return frs_ids, morphs, attempts, slots


def mmpmr(records, frs, d, tau):
    scores, _ = _index(records)
    _, morphs, attempts, slots = _layout(records, d)
    hits = 0
    for m in morphs:
        ok = True
        for k in slots:
            best = -math.inf
            for a in attempts[m]:
                best = max(best, scores[(frs, d, m, a, k)])
            if not best > tau:
                ok = False
        hits += ok
    return float(Fraction(hits, len(morphs)))


def _attempt_ok(scores, frs, d, m, a, slots, tau):
    for k in slots:
        if not scores[(frs, d, m, a, k)] > tau:
            return False
    return True


def _paired(records, frs, d, tau, use_ftar):
    scores, ftar = _index(records)
    _, morphs, attempts, slots = _layout(records, d)
    total = Fraction(0)
    for m in morphs:
        c = 0
        for a in attempts[m]:
            if _attempt_ok(scores, frs, d, m, a, slots, tau):
                c += 1 - (ftar[(frs, d, m, a)] if use_ftar else 0)
        total += Fraction(c, len(attempts[m]))
    return float(total / len(morphs))


def fmmpmr(records, frs, d, tau):
    return _paired(records, frs, d, tau, False)


def gmap_per_type(records, d, thresholds, include_ftar=True):
    frs_ids, _, _, _ = _layout(records, d)
    return min(_paired(records, f, d, thresholds[f], include_ftar) for f in frs_ids)


def gmap(records, thresholds, include_ftar=True):
    types = sorted({r[1] for r in records})
    vals = [Fraction(gmap_per_type(records, d, thresholds, include_ftar)) for d in types]
    return float(sum(vals) / len(vals))


def map_matrix(records, d, thresholds):
    scores, _ = _index(records)
    frs_ids, morphs, attempts, slots = _layout(records, d)
    rows = max(len(a) for a in attempts.values())
    out = []
    for r in range(1, rows + 1):
        row = []
        for c in range(1, len(frs_ids) + 1):
            hits = 0
            for m in morphs:
                systems = 0
                for f in frs_ids:
                    wins = sum(_attempt_ok(scores, f, d, m, a, slots, thresholds[f]) for a in attempts[m])
                    systems += wins >= r
                hits += systems >= c
            row.append(float(Fraction(hits, len(morphs))))
        out.append(row)
    return out


def threshold_at_far(scores, far):
    """Scan every observed score as a candidate and keep the smallest admissible one."""
    n = len(scores)
    best = None
    for t in scores:
        above = sum(1 for s in scores if s > t)
        if above <= far * n + 1e-9 and (best is None or t < best):
            best = t
    return best


def optimal_pairs(embeddings):
    """Pairing rules applied literally, with pure-Python cosine distances."""
    n = len(embeddings)

    def dist(u, v):
        dot = sum(x * y for x, y in zip(u, v))
        nu = math.sqrt(sum(x * x for x in u))
        nv = math.sqrt(sum(x * x for x in v))
        return 1.0 - max(-1.0, min(1.0, dot / (nu * nv)))

    pairs = []
    for i in range(n):
        ranked = sorted((dist(embeddings[i], embeddings[j]), j) for j in range(n) if j != i)
        for _, j in ranked:
            if (j, i) not in pairs:
                pairs.append((i, j))
                break
    return pairs


def det_errors(bonafide, attack, tau):
    apcer = sum(1 for s in attack if s <= tau) / len(attack)
    bpcer = sum(1 for s in bonafide if s > tau) / len(bonafide)
    return apcer, bpcer


def deer(bonafide, attack):
    values = sorted(set(bonafide) | set(attack))
    taus = [values[0] - 1.0] + [(a + b) / 2 for a, b in zip(values, values[1:])] + [values[-1] + 1.0]
    best = None
    for t in taus:
        ap, bp = det_errors(bonafide, attack, t)
        if best is None or abs(ap - bp) < best[0]:
            best = (abs(ap - bp), (ap + bp) / 2, t)
    return best[1], best[2]
