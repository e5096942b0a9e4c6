"""Clue-quality evaluation: ROUGE-1/2/L F1 and human acceptability rates."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

from .textnorm import tokenize_words

METRICS = ("rouge1", "rouge2", "rougeL")


class EmptyEvaluationSet(ValueError):
    """An aggregation was requested over zero items."""


@dataclass(frozen=True)
class RougeScore:
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_pr(cls, precision: float, recall: float) -> "RougeScore":
        denom = precision + recall
        f1 = 2.0 * precision * recall / denom if denom > 0 else 0.0
        return cls(precision, recall, f1)


def _ngrams(tokens: Sequence[str], n: int) -> list[tuple[str, ...]]:
    return [tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1)]


def rouge_n(candidate: str, reference: str, n: int) -> RougeScore:
    """ROUGE-N over word tokens, overlap clipped by multiplicity."""
    if n < 1:
        raise ValueError("n must be >= 1")
    cand = _ngrams(tokenize_words(candidate), n)
    ref = _ngrams(tokenize_words(reference), n)
    if not cand or not ref:
        return RougeScore(0.0, 0.0, 0.0)
    overlap = sum((Counter(cand) & Counter(ref)).values())
    return RougeScore.from_pr(overlap / len(cand), overlap / len(ref))


def _lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    # Rolling single-row DP.
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        row = [0]
        for j, y in enumerate(b, start=1):
            if x == y:
                row.append(prev[j - 1] + 1)
            else:
                row.append(max(prev[j], row[j - 1]))
        prev = row
    return prev[-1]


def rouge_l(candidate: str, reference: str) -> RougeScore:
    """ROUGE-L: longest common subsequence over word tokens."""
    cand = tokenize_words(candidate)
    ref = tokenize_words(reference)
    if not cand or not ref:
        return RougeScore(0.0, 0.0, 0.0)
    lcs = _lcs_length(cand, ref)
    return RougeScore.from_pr(lcs / len(cand), lcs / len(ref))


def rouge_all(candidate: str, reference: str) -> dict[str, RougeScore]:
    return {
        "rouge1": rouge_n(candidate, reference, 1),
        "rouge2": rouge_n(candidate, reference, 2),
        "rougeL": rouge_l(candidate, reference),
    }


def rouge_multi(candidate: str, references: Sequence[str]) -> dict[str, RougeScore]:
    """Against multiple references, keep the max-F1 score per metric."""
    if not references:
        raise EmptyEvaluationSet("no references")
    best: dict[str, RougeScore] = {}
    for ref in references:
        for metric, score in rouge_all(candidate, ref).items():
            if metric not in best or score.f1 > best[metric].f1:
                best[metric] = score
    return best


def corpus_rouge(pairs: Sequence[tuple[str, str]]) -> dict[str, RougeScore]:
    """Unweighted mean of per-pair precision/recall/F1 for each metric."""
    if not pairs:
        raise EmptyEvaluationSet("no candidate/reference pairs")
    sums = {m: [0.0, 0.0, 0.0] for m in METRICS}
    for candidate, reference in pairs:
        for metric, score in rouge_all(candidate, reference).items():
            acc = sums[metric]
            acc[0] += score.precision
            acc[1] += score.recall
            acc[2] += score.f1
    n = len(pairs)
    return {
        m: RougeScore(acc[0] / n, acc[1] / n, acc[2] / n)
        for m, acc in sums.items()
    }


def format_percent(value: float) -> str:
    """Fraction as a percentage with 2 decimals, e.g. 1/3 -> '33.33'."""
    return f"{value * 100:.2f}"


def rouge_report_csv(scores: dict[str, RougeScore]) -> str:
    lines = ["metric,precision,recall,f1"]
    for metric in METRICS:
        s = scores[metric]
        lines.append(
            f"{metric},{format_percent(s.precision)},"
            f"{format_percent(s.recall)},{format_percent(s.f1)}"
        )
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Human rating aggregation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RatingRecord:
    candidate_id: str
    model_id: str
    accepted: bool
    rater: str = ""


@dataclass(frozen=True)
class RateLine:
    accepted: int
    total: int

    @property
    def rate(self) -> float:
        return self.accepted / self.total if self.total else 0.0

    @property
    def display(self) -> str:
        """Rate rounded to 0.1% for reporting, e.g. '51.8%'."""
        return f"{self.rate * 100:.1f}%"


@dataclass(frozen=True)
class AcceptabilitySummary:
    overall: RateLine
    per_model: dict[str, RateLine]


def acceptability_rate(ratings: Iterable[RatingRecord]) -> AcceptabilitySummary:
    records = list(ratings)
    if not records:
        raise EmptyEvaluationSet("no rating records")
    accepted = sum(1 for r in records if r.accepted)
    by_model: dict[str, list[int]] = {}
    for r in records:
        acc = by_model.setdefault(r.model_id, [0, 0])
        acc[0] += 1 if r.accepted else 0
        acc[1] += 1
    per_model = {
        model: RateLine(acc[0], acc[1]) for model, acc in sorted(by_model.items())
    }
    return AcceptabilitySummary(RateLine(accepted, len(records)), per_model)


def ratings_report_csv(summary: AcceptabilitySummary) -> str:
    lines = ["model_id,accepted,total,rate"]
    for model, line in summary.per_model.items():
        lines.append(f"{model},{line.accepted},{line.total},{line.display}")
    o = summary.overall
    lines.append(f"overall,{o.accepted},{o.total},{o.display}")
    return "\n".join(lines) + "\n"
