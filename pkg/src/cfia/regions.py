"""Facial-attribute region combinations used to build composite attacks.

A combination names which attributes come from donor one and which from
donor two, written as two letter groups joined by a hyphen, e.g. ``SEN-M``.
Combinations are grouped into 16 region indices by the sizes of the two
groups.
"""
from __future__ import annotations

import enum
import itertools
import logging
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable

logger = logging.getLogger(__name__)


class FacialAttribute(enum.Enum):
    BACKGROUND = "B"
    SKIN = "S"
    EYE = "E"
    NOSE = "N"
    MOUTH = "M"
    HAIR = "H"

    @property
    def label(self) -> int:
        """Class value of this attribute in a label map."""
        return _LABELS[self]


_LABELS = {
    FacialAttribute.BACKGROUND: 0,
    FacialAttribute.SKIN: 1,
    FacialAttribute.EYE: 2,
    FacialAttribute.NOSE: 3,
    FacialAttribute.MOUTH: 4,
    FacialAttribute.HAIR: 5,
}
_BY_CODE = {a.value: a for a in FacialAttribute}

# presentation order inside a group; B sits after H so the full-face entry reads HBSENM
CANONICAL_ORDER = "HBSENM"
_RANK = {c: i for i, c in enumerate(CANONICAL_ORDER)}

FACE_ATTRIBUTES = tuple(_BY_CODE[c] for c in "HSENM")
ALL_ATTRIBUTES = tuple(_BY_CODE[c] for c in CANONICAL_ORDER)

# region index -> (size of donor-one group, size of donor-two group)
INDEX_SIZES = {
    1: (1, 1),
    2: (2, 1),
    3: (2, 2),
    4: (3, 1),
    5: (3, 2),
    6: (3, 3),
    7: (4, 1),
    8: (4, 2),
    9: (4, 3),
    10: (4, 4),
    11: (5, 1),
    12: (5, 2),
    13: (5, 3),
    14: (5, 4),
    15: (5, 5),
    16: (6, 6),
}
SIZES_INDEX = {v: k for k, v in INDEX_SIZES.items()}

# published raw pair counts per region index, and the unique counts printed beside them
PUBLISHED_RAW_COUNTS = (25, 50, 100, 50, 100, 100, 25, 50, 50, 25, 5, 10, 10, 5, 1, 1)
PUBLISHED_UNIQUE_COUNTS = (13, 26, 100, 50, 78, 86, 25, 50, 47, 25, 5, 10, 10, 5, 1, 1)
PUBLISHED_RAW_TOTAL = 607
PUBLISHED_UNIQUE_TOTAL = 526

FIXTURE_DIR = Path(__file__).parent / "fixtures"
REFERENCE_FILE = "reference_regions.txt"
CORRECTIONS_FILE = "reference_corrections.tsv"


class RegionCodeError(ValueError):
    """A region code that does not satisfy the GROUP-GROUP grammar."""

    def __init__(self, code: str, message: str, char: str | None = None):
        self.code = code
        self.char = char
        super().__init__(f"invalid region code {code!r}: {message}")


AttributeSet = frozenset  # frozenset[FacialAttribute]


def _group_code(group: Iterable[FacialAttribute]) -> str:
    return "".join(sorted((a.value for a in group), key=_RANK.__getitem__))


@dataclass(frozen=True)
class RegionCombination:
    donor_one: frozenset
    donor_two: frozenset
    region_index: int = field(compare=False, default=0)

    def __post_init__(self):
        sizes = (len(self.donor_one), len(self.donor_two))
        if sizes not in SIZES_INDEX:
            raise ValueError(f"no region index for group sizes {sizes}")
        background = FacialAttribute.BACKGROUND
        if sizes != (6, 6) and (background in self.donor_one or background in self.donor_two):
            raise ValueError("background is only used in the full six-attribute combination")
        object.__setattr__(self, "region_index", SIZES_INDEX[sizes])

    @property
    def code(self) -> str:
        return format_region_code(self)

    def __str__(self) -> str:
        return self.code

    def __repr__(self) -> str:
        return f"RegionCombination({self.code!r}, index={self.region_index})"


def parse_region_code(code: str) -> RegionCombination:
    text = code.strip()
    if text.count("-") != 1:
        raise RegionCodeError(code, "expected exactly one '-' separating two groups")
    groups = []
    for part in text.split("-"):
        if not 1 <= len(part) <= 6:
            raise RegionCodeError(code, f"group {part!r} must have 1 to 6 letters")
        seen = set()
        for ch in part:
            if ch not in _BY_CODE:
                raise RegionCodeError(code, f"unknown attribute letter {ch!r}", ch)
            if ch in seen:
                raise RegionCodeError(code, f"duplicate letter {ch!r} in group {part!r}", ch)
            seen.add(ch)
        groups.append(frozenset(_BY_CODE[ch] for ch in part))
    try:
        return RegionCombination(groups[0], groups[1])
    except ValueError as exc:
        raise RegionCodeError(code, str(exc)) from None


def format_region_code(c: RegionCombination) -> str:
    return f"{_group_code(c.donor_one)}-{_group_code(c.donor_two)}"


def raw_count(index: int) -> int:
    """Binomial product for one region index."""
    k, m = INDEX_SIZES[index]
    n = 6 if index == 16 else 5
    return math.comb(n, k) * math.comb(n, m)


def enumerate_raw(index: int) -> list[RegionCombination]:
    if index not in INDEX_SIZES:
        raise ValueError(f"region index must be in 1..16, got {index}")
    k, m = INDEX_SIZES[index]
    pool = ALL_ATTRIBUTES if index == 16 else FACE_ATTRIBUTES
    return [
        RegionCombination(frozenset(a), frozenset(b))
        for a in itertools.combinations(pool, k)
        for b in itertools.combinations(pool, m)
    ]


@dataclass
class CombinationCatalog:
    combinations: list[RegionCombination]
    source: str = "generated"
    raw_counts: dict[int, int] = field(default_factory=dict)
    unique_counts: dict[int, int] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.combinations)

    def codes(self) -> list[str]:
        return [c.code for c in self.combinations]

    def counts_by_index(self) -> dict[int, int]:
        counts = {i: 0 for i in INDEX_SIZES}
        for c in self.combinations:
            counts[c.region_index] += 1
        return counts


def enumerate_all() -> CombinationCatalog:
    combos: list[RegionCombination] = []
    raw = {}
    for index in INDEX_SIZES:
        block = enumerate_raw(index)
        raw[index] = len(block)
        combos.extend(block)
    return CombinationCatalog(combos, "generated", raw_counts=raw, unique_counts=dict(raw))


# -- fixture -----------------------------------------------------------------


class FixtureError(ValueError):
    def __init__(self, path, line: int, message: str):
        self.path = str(path)
        self.line = line
        super().__init__(f"{path}:{line}: {message}")


def load_corrections(path) -> dict[str, str]:
    corrections = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise FixtureError(path, lineno, "expected two tab-separated columns raw<TAB>corrected")
        corrections[parts[0].strip()] = parts[1].strip()
    return corrections


def load_fixture_catalog(path=None, corrections_path=None) -> CombinationCatalog:
    """Load the transcribed region list.

    Raw lines are kept verbatim in the file; entries listed in the corrections
    sidecar are replaced by their corrected code before parsing.
    """
    path = Path(path) if path is not None else fixture_dir() / REFERENCE_FILE
    if corrections_path is None:
        corrections_path = path.with_name(CORRECTIONS_FILE)
    corrections = load_corrections(corrections_path) if Path(corrections_path).exists() else {}
    combos = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        raw = line.strip()
        if not raw or raw.startswith("#"):
            continue
        code = corrections.get(raw, raw)
        try:
            combos.append(parse_region_code(code))
        except RegionCodeError as exc:
            raise FixtureError(path, lineno, str(exc)) from None
    catalog = CombinationCatalog(combos, "fixture")
    catalog.raw_counts = catalog.counts_by_index()
    catalog.unique_counts = {i: len({c for c in combos if c.region_index == i}) for i in INDEX_SIZES}
    logger.info("loaded %d fixture region codes from %s", len(combos), path)
    return catalog


def fixture_dir() -> Path:
    override = os.environ.get("CFIA_FIXTURES")
    return Path(override) if override else FIXTURE_DIR


# -- deduplication -------------------------------------------------------------


def _identity_rule() -> Callable[[RegionCombination], object]:
    return lambda c: c


def _fixture_rule() -> Callable[[RegionCombination], object]:
    allowed = set(load_fixture_catalog().combinations)
    # combinations absent from the reference list map to None and are dropped
    return lambda c: c if c in allowed else None


DEDUP_RULES = {"identity": _identity_rule, "fixture": _fixture_rule}


def dedup(catalog: CombinationCatalog, rule: str = "identity") -> CombinationCatalog:
    """Collapse equivalent combinations under a named rule.

    Output is ordered by region index, then by code. The per-index unique
    counts are compared with the published column and mismatches are logged.
    """
    if rule not in DEDUP_RULES:
        raise ValueError(f"unknown dedup rule {rule!r}; expected one of {sorted(DEDUP_RULES)}")
    key = DEDUP_RULES[rule]()
    representatives: dict[object, RegionCombination] = {}
    for c in catalog.combinations:
        k = key(c)
        if k is None:
            continue
        best = representatives.get(k)
        if best is None or _sort_key(c) < _sort_key(best):
            representatives[k] = c
    kept = sorted(representatives.values(), key=_sort_key)
    out = CombinationCatalog(kept, catalog.source, raw_counts=dict(catalog.raw_counts))
    out.unique_counts = out.counts_by_index()
    for row in compare_unique_counts(out)["rows"]:
        if not row["match"]:
            logger.warning(
                "region index %d: %d unique combinations under rule %r, published %d",
                row["index"], row["unique"], rule, row["published_unique"],
            )
    return out


def _sort_key(c: RegionCombination):
    return (c.region_index, c.code)


def compare_unique_counts(catalog: CombinationCatalog) -> dict:
    """Per-index comparison of a deduplicated catalog with the published counts."""
    rows = []
    for index in INDEX_SIZES:
        unique = catalog.unique_counts.get(index, 0)
        published = PUBLISHED_UNIQUE_COUNTS[index - 1]
        rows.append({
            "index": index,
            "sizes": list(INDEX_SIZES[index]),
            "raw": raw_count(index),
            "published_raw": PUBLISHED_RAW_COUNTS[index - 1],
            "unique": unique,
            "published_unique": published,
            "match": unique == published,
        })
    column_sum = sum(PUBLISHED_UNIQUE_COUNTS)
    findings = []
    if column_sum != PUBLISHED_UNIQUE_TOTAL:
        findings.append(
            f"published per-index unique counts sum to {column_sum}, "
            f"but the stated unique total is {PUBLISHED_UNIQUE_TOTAL}"
        )
    mismatched = [r["index"] for r in rows if not r["match"]]
    if mismatched:
        findings.append(f"unique counts differ from the published column at indices {mismatched}")
    return {
        "rows": rows,
        "unique_total": sum(r["unique"] for r in rows),
        "published_unique_column_sum": column_sum,
        "published_unique_total": PUBLISHED_UNIQUE_TOTAL,
        "raw_total": sum(r["raw"] for r in rows),
        "published_raw_total": PUBLISHED_RAW_TOTAL,
        "findings": findings,
    }


def catalog_summary(rule: str = "fixture") -> dict:
    raw = enumerate_all()
    unique = dedup(raw, rule)
    report = compare_unique_counts(unique)
    report["dedup_rule"] = rule
    return report
