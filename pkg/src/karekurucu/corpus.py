"""Answer-clue corpus ingestion, filter chain, and dataset statistics."""
from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Iterator, NamedTuple, Sequence

from .textnorm import NonAlphabetCharacter, to_grid_form, word_count

# Rule names, reported in FilterReport and rejected-row sidecars.
RULE_NON_ALPHABET = "non_alphabet"
RULE_TOO_SHORT = "too_short"
RULE_TOO_LONG = "too_long"
RULE_LOW_POPULARITY = "low_popularity"
RULE_LOW_RELEVANCE = "low_relevance"
RULE_TOO_FEW_WORDS = "too_few_words"
RULE_TOO_MANY_WORDS = "too_many_words"
RULE_MALFORMED = "malformed"
RULE_DUPLICATE = "duplicate"
RULE_CLUE_EQUALS_ANSWER = "clue_equals_answer"

PAIR_COLUMNS = ("answer", "clue")
RECORD_COLUMNS = ("title", "text", "keyword", "category", "views", "relevance", "url")


class UnreadableSource(OSError):
    """The input stream could not be opened or decoded."""


@dataclass(frozen=True)
class AnswerCluePair:
    answer: str  # grid form (uppercase Turkish letters)
    clue: str
    source: str = ""


@dataclass(frozen=True)
class TextRecord:
    title: str
    text: str
    keyword: str
    category: str
    views: int
    relevance: float
    url: str = ""


@dataclass(frozen=True)
class FilterConfig:
    """Bounds for keyword and text-record filtering (all bounds inclusive)."""

    min_answer_len: int = 3
    max_answer_len: int = 20
    min_text_words: int = 50
    max_text_words: int = 982
    min_views: int = 0
    min_relevance: float = 0.0

    def __post_init__(self):
        if self.min_answer_len > self.max_answer_len:
            raise ValueError("min_answer_len must be <= max_answer_len")
        if self.min_text_words > self.max_text_words:
            raise ValueError("min_text_words must be <= max_text_words")
        if self.min_views < 0 or self.min_relevance < 0:
            raise ValueError("thresholds must be >= 0")


@dataclass
class FilterReport:
    input_count: int = 0
    accepted_count: int = 0
    rejected_by_rule: dict[str, int] = field(default_factory=dict)

    def add_accept(self) -> None:
        self.input_count += 1
        self.accepted_count += 1

    def add_reject(self, rule: str) -> None:
        self.input_count += 1
        self.rejected_by_rule[rule] = self.rejected_by_rule.get(rule, 0) + 1

    def merge(self, other: "FilterReport") -> "FilterReport":
        merged = FilterReport(
            input_count=self.input_count + other.input_count,
            accepted_count=self.accepted_count + other.accepted_count,
            rejected_by_rule=dict(self.rejected_by_rule),
        )
        for rule, n in other.rejected_by_rule.items():
            merged.rejected_by_rule[rule] = merged.rejected_by_rule.get(rule, 0) + n
        return merged

    @property
    def rejected_count(self) -> int:
        return sum(self.rejected_by_rule.values())

    def reconciles(self) -> bool:
        return self.accepted_count + self.rejected_count == self.input_count


@dataclass(frozen=True)
class Decision:
    """Outcome of a filter rule chain: accepted, or rejected by a named rule."""

    accepted: bool
    word: str | None = None  # normalized keyword when available
    rule: str | None = None

    @classmethod
    def accept(cls, word: str | None = None) -> "Decision":
        return cls(True, word=word)

    @classmethod
    def reject(cls, rule: str) -> "Decision":
        return cls(False, rule=rule)


def filter_keyword(raw: str, cfg: FilterConfig | None = None) -> Decision:
    """Classify a raw keyword per the keyword rules.

    Whitespace is removed before normalization (grids store multi-word
    answers without spaces); digits, punctuation, and Q/W/X are rejected,
    not stripped. Length bounds are inclusive and measured on the
    normalized form.
    """
    cfg = cfg or FilterConfig()
    compact = "".join(raw.split())
    if not compact:
        return Decision.reject(RULE_TOO_SHORT)
    try:
        word = to_grid_form(compact)
    except NonAlphabetCharacter:
        return Decision.reject(RULE_NON_ALPHABET)
    if len(word) < cfg.min_answer_len:
        return Decision.reject(RULE_TOO_SHORT)
    if len(word) > cfg.max_answer_len:
        return Decision.reject(RULE_TOO_LONG)
    return Decision.accept(word)


def filter_text_record(rec: TextRecord, cfg: FilterConfig | None = None) -> Decision:
    """Classify a text record; the first failing rule (popularity, relevance,
    text length, keyword) is the one reported."""
    cfg = cfg or FilterConfig()
    if rec.views < cfg.min_views:
        return Decision.reject(RULE_LOW_POPULARITY)
    if rec.relevance < cfg.min_relevance:
        return Decision.reject(RULE_LOW_RELEVANCE)
    n_words = word_count(rec.text)
    if n_words < cfg.min_text_words:
        return Decision.reject(RULE_TOO_FEW_WORDS)
    if n_words > cfg.max_text_words:
        return Decision.reject(RULE_TOO_MANY_WORDS)
    return filter_keyword(rec.keyword, cfg)


def _clue_equals_answer(clue: str, answer: str) -> bool:
    try:
        return to_grid_form("".join(clue.split())) == answer
    except (ValueError, NonAlphabetCharacter):
        return False


def ingest_pairs(
    rows: Iterable[Sequence[str]],
    cfg: FilterConfig | None = None,
    source: str = "",
    on_reject: Callable[[Sequence[str], str], None] | None = None,
) -> tuple[list[AnswerCluePair], FilterReport]:
    """Ingest (answer, clue) rows: normalize answers, apply keyword rules,
    drop exact duplicate pairs. Malformed rows are counted, not fatal."""
    cfg = cfg or FilterConfig()
    report = FilterReport()
    pairs: list[AnswerCluePair] = []
    seen: set[tuple[str, str]] = set()

    def reject(row: Sequence[str], rule: str) -> None:
        report.add_reject(rule)
        if on_reject is not None:
            on_reject(row, rule)

    for row in rows:
        if len(row) < 2 or not row[0].strip() or not row[1].strip():
            reject(row, RULE_MALFORMED)
            continue
        raw_answer, clue = row[0].strip(), row[1].strip()
        decision = filter_keyword(raw_answer, cfg)
        if not decision.accepted:
            reject(row, decision.rule)
            continue
        answer = decision.word
        if _clue_equals_answer(clue, answer):
            reject(row, RULE_CLUE_EQUALS_ANSWER)
            continue
        key = (answer, clue)
        if key in seen:
            reject(row, RULE_DUPLICATE)
            continue
        seen.add(key)
        pairs.append(AnswerCluePair(answer=answer, clue=clue, source=source))
        report.add_accept()
    return pairs, report


class LengthStats(NamedTuple):
    pairs: int
    unique_answers: int
    unique_pairs: int


def answer_length_histogram(pairs: Iterable[AnswerCluePair]) -> dict[int, LengthStats]:
    """Per answer-length counts of pairs, unique answers, and unique pairs."""
    total: Counter[int] = Counter()
    answers: dict[int, set[str]] = {}
    uniq_pairs: dict[int, set[tuple[str, str]]] = {}
    for p in pairs:
        n = len(p.answer)
        total[n] += 1
        answers.setdefault(n, set()).add(p.answer)
        uniq_pairs.setdefault(n, set()).add((p.answer, p.clue))
    return {
        n: LengthStats(total[n], len(answers[n]), len(uniq_pairs[n]))
        for n in sorted(total)
    }


def category_distribution(records: Iterable[TextRecord]) -> dict[str, int]:
    counts = Counter(rec.category for rec in records)
    return dict(sorted(counts.items()))


# ---------------------------------------------------------------------------
# TSV / CSV file interfaces
# ---------------------------------------------------------------------------

def _open_tsv(path: str | Path) -> Iterator[list[str]]:
    try:
        handle = open(path, encoding="utf-8", newline="")
    except OSError as exc:
        raise UnreadableSource(f"cannot open {path}: {exc}") from exc

    def rows() -> Iterator[list[str]]:
        with handle:
            try:
                yield from csv.reader(handle, delimiter="\t")
            except (csv.Error, UnicodeDecodeError) as exc:
                raise UnreadableSource(f"cannot decode {path}: {exc}") from exc

    return rows()


def _header_index(header: Sequence[str], required: Sequence[str], path) -> list[int]:
    normalized = [h.strip().lower() for h in header]
    try:
        return [normalized.index(col) for col in required]
    except ValueError as exc:
        raise UnreadableSource(
            f"{path}: header must contain columns {', '.join(required)}"
        ) from exc


def read_pair_rows(path: str | Path) -> Iterator[tuple[str, str]]:
    """Rows of an answer-clue TSV (header with answer, clue columns)."""
    rows = _open_tsv(path)
    header = next(rows, None)
    if header is None:
        return iter(())
    idx = _header_index(header, PAIR_COLUMNS, path)

    def gen() -> Iterator[tuple[str, str]]:
        for row in rows:
            if not row:
                continue
            padded = row + [""] * (max(idx) + 1 - len(row))
            yield padded[idx[0]], padded[idx[1]]

    return gen()


def read_text_records(
    path: str | Path,
    on_reject: Callable[[Sequence[str], str], None] | None = None,
) -> Iterator[TextRecord]:
    """Rows of a text-record TSV. Rows with unparsable numeric fields are
    passed to `on_reject` as malformed and skipped."""
    rows = _open_tsv(path)
    header = next(rows, None)
    if header is None:
        return iter(())
    idx = _header_index(header, RECORD_COLUMNS, path)

    def gen() -> Iterator[TextRecord]:
        for row in rows:
            if not row:
                continue
            padded = row + [""] * (max(idx) + 1 - len(row))
            title, text, keyword, category, views, relevance, url = (
                padded[i] for i in idx
            )
            try:
                yield TextRecord(
                    title=title,
                    text=text,
                    keyword=keyword,
                    category=category,
                    views=int(views),
                    relevance=float(relevance),
                    url=url,
                )
            except ValueError:
                if on_reject is not None:
                    on_reject(row, RULE_MALFORMED)

    return gen()


def sidecar_path(input_path: str | Path) -> Path:
    return Path(f"{input_path}.rejected.tsv")


class RejectSidecar:
    """Collects rejected rows and writes `<input>.rejected.tsv` with an
    extra trailing rule column."""

    def __init__(self, input_path: str | Path):
        self.path = sidecar_path(input_path)
        self.rows: list[list[str]] = []

    def __call__(self, row: Sequence[str], rule: str) -> None:
        self.rows.append(list(row) + [rule])

    def write(self) -> Path:
        with open(self.path, "w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle, delimiter="\t")
            writer.writerows(self.rows)
        return self.path


def histogram_csv(hist: dict[int, LengthStats]) -> str:
    lines = ["length,pairs,unique_answers,unique_pairs"]
    for length in sorted(hist):
        s = hist[length]
        lines.append(f"{length},{s.pairs},{s.unique_answers},{s.unique_pairs}")
    return "\n".join(lines) + "\n"


def category_csv(dist: dict[str, int]) -> str:
    lines = ["category,count"]
    for category in sorted(dist):
        lines.append(f"{category},{dist[category]}")
    return "\n".join(lines) + "\n"
