"""Five-point Likert responses collapsed into agree / neutral / disagree shares.

Counts are kept as integers and percentages derived from them exactly, so
the three shares of an item always sum to 100; rounding only happens for
display (half-up, to whole percents).
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

from ismkit.errors import ParseError, ValidationError

AGREE = frozenset({4, 5})
NEUTRAL = frozenset({3})
DISAGREE = frozenset({1, 2})
REQUIRED_COLUMNS = ("respondent_id", "item_id", "score")


class SurveyWarning(UserWarning):
    pass


@dataclass(frozen=True)
class LikertResponse:
    respondent_id: str
    item_id: str
    score: int

    def __post_init__(self):
        if not self.item_id:
            raise ParseError("item_id must be non-empty")
        if isinstance(self.score, bool) or not isinstance(self.score, int) or not 1 <= self.score <= 5:
            raise ParseError(f"score must be an integer 1-5, got {self.score!r}")


def round_half_up(x: Fraction | float) -> int:
    return math.floor(Fraction(x) + Fraction(1, 2))


@dataclass(frozen=True)
class FrequencyRow:
    item_id: str
    n: int
    n_agree: int
    n_neutral: int
    n_disagree: int

    def share(self, count: int) -> Fraction:
        return Fraction(100 * count, self.n)

    @property
    def pct_agree(self) -> float:
        return float(self.share(self.n_agree))

    @property
    def pct_neutral(self) -> float:
        return float(self.share(self.n_neutral))

    @property
    def pct_disagree(self) -> float:
        return float(self.share(self.n_disagree))

    def exact(self) -> tuple[Fraction, Fraction, Fraction]:
        return self.share(self.n_agree), self.share(self.n_neutral), self.share(self.n_disagree)

    def display(self) -> tuple[int, int, int]:
        return tuple(round_half_up(v) for v in self.exact())

    def to_dict(self) -> dict:
        a, m, d = self.display()
        return {
            "item_id": self.item_id,
            "n": self.n,
            "pct_agree": self.pct_agree,
            "pct_neutral": self.pct_neutral,
            "pct_disagree": self.pct_disagree,
            "display": {"agree": a, "neutral": m, "disagree": d},
        }


def dedupe(responses: Iterable[LikertResponse]) -> list[LikertResponse]:
    """Drop repeated (respondent, item) pairs, keeping the first and warning once per repeat."""
    seen = set()
    kept = []
    for r in responses:
        key = (r.respondent_id, r.item_id)
        if key in seen:
            warnings.warn(
                f"duplicate response for respondent {r.respondent_id!r}, item {r.item_id!r}; keeping the first",
                SurveyWarning,
                stacklevel=3,
            )
            continue
        seen.add(key)
        kept.append(r)
    return kept


def aggregate_frequencies(
    responses: Iterable[LikertResponse], items: Optional[Sequence[str]] = None
) -> dict[str, FrequencyRow]:
    """One FrequencyRow per item.

    With ``items`` the output follows that order, and items nobody answered
    are dropped with a coverage warning. Otherwise items appear in order of
    first occurrence.
    """
    responses = dedupe(responses)
    if not responses:
        raise ValidationError("no survey responses")
    buckets: dict[str, Counter] = {}
    for r in responses:
        buckets.setdefault(r.item_id, Counter())[r.score] += 1
    order = list(items) if items is not None else list(buckets)
    uncovered = [i for i in order if i not in buckets]
    if uncovered:
        warnings.warn(f"no responses for item(s): {', '.join(uncovered)}", SurveyWarning, stacklevel=2)
    rows = {}
    for item in order:
        if item not in buckets:
            continue
        c = buckets[item]
        rows[item] = FrequencyRow(
            item,
            sum(c.values()),
            sum(c[s] for s in AGREE),
            sum(c[s] for s in NEUTRAL),
            sum(c[s] for s in DISAGREE),
        )
    return rows


@dataclass(frozen=True)
class GroupAverage:
    items: tuple[str, ...]
    pct_agree: float
    pct_neutral: float
    pct_disagree: float

    def display(self) -> tuple[int, int, int]:
        return tuple(round_half_up(v) for v in (self.pct_agree, self.pct_neutral, self.pct_disagree))

    def to_dict(self) -> dict:
        a, m, d = self.display()
        return {
            "items": list(self.items),
            "pct_agree": self.pct_agree,
            "pct_neutral": self.pct_neutral,
            "pct_disagree": self.pct_disagree,
            "display": {"agree": a, "neutral": m, "disagree": d},
        }


def group_average(rows: Mapping[str, FrequencyRow], group: Iterable[str]) -> GroupAverage:
    """Unweighted mean of the unrounded item percentages over ``group``."""
    group = tuple(group)
    if not group:
        raise ValidationError("group is empty")
    unknown = [g for g in group if g not in rows]
    if unknown:
        raise ValidationError(f"group item(s) without a frequency row: {', '.join(unknown)}")
    sums = [sum(rows[g].exact()[k] for g in group) / len(group) for k in range(3)]
    return GroupAverage(group, *(float(s) for s in sums))


@dataclass
class SurveyData:
    responses: list[LikertResponse]
    demographics: dict[str, dict[str, str]] = field(default_factory=dict)
    columns: tuple[str, ...] = ()

    @property
    def respondents(self) -> list[str]:
        return list(dict.fromkeys(r.respondent_id for r in self.responses))


def parse_responses(text: str, where: str = "responses") -> SurveyData:
    reader = csv.DictReader(io.StringIO(text))
    header = tuple(h.strip() for h in (reader.fieldnames or ()))
    missing = [c for c in REQUIRED_COLUMNS if c not in header]
    if missing:
        raise ParseError(f"{where}: row 1: missing column(s) {', '.join(missing)}")
    extra = tuple(h for h in header if h not in REQUIRED_COLUMNS)
    reader.fieldnames = list(header)
    responses, demographics = [], {}
    for lineno, row in enumerate(reader, start=2):
        if None in row:
            raise ParseError(f"{where}: row {lineno}: more cells than header columns")
        if any(row[c] is None for c in header):
            raise ParseError(f"{where}: row {lineno}: fewer cells than header columns")
        raw = row["score"].strip()
        try:
            score = int(raw)
        except ValueError:
            raise ParseError(f"{where}: row {lineno}: score {raw!r} is not an integer") from None
        try:
            responses.append(LikertResponse(row["respondent_id"].strip(), row["item_id"].strip(), score))
        except ParseError as exc:
            raise ParseError(f"{where}: row {lineno}: {exc}") from None
        rid = row["respondent_id"].strip()
        if rid not in demographics:
            demographics[rid] = {c: row[c].strip() for c in extra}
    return SurveyData(responses, demographics, extra)


def load_responses(path) -> SurveyData:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"{path}: cannot read file ({exc.strerror})") from None
    return parse_responses(text, where=str(path))


def breakdown_by(data: SurveyData, column: str) -> dict[str, dict]:
    """Respondent counts and shares per category of a demographic column.

    Each respondent counts once, with the value from their first row.
    Categories are listed by descending count, then name.
    """
    if column not in data.columns:
        available = ", ".join(data.columns) or "none"
        raise ValidationError(f"unknown demographic column {column!r}; available: {available}")
    respondents = data.respondents
    counts = Counter(data.demographics[r][column] for r in respondents)
    total = len(respondents)
    ordered = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return {
        cat: {"count": cnt, "percent": 100 * cnt / total, "display": round_half_up(Fraction(100 * cnt, total))}
        for cat, cnt in ordered
    }
