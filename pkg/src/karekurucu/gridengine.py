"""Crossword schema generation: layout model, scoring, and heuristic search.

Layouts are criss-cross style: words interlock at perpendicular crossings and
unused cells stay blocked. Search inserts words greedily by composite score,
perturbing with removals and resets when stuck.
"""
from __future__ import annotations

import json
import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, Iterator, Sequence

from .textnorm import to_grid_form


class Direction(str, Enum):
    ACROSS = "across"
    DOWN = "down"


class TerminationReason(str, Enum):
    MIN_WORDS_AND_FILL_REACHED = "min_words_and_fill_reached"
    MAX_ADJUSTMENTS_EXHAUSTED = "max_adjustments_exhausted"
    TIME_BUDGET_EXHAUSTED = "time_budget_exhausted"
    NO_MOVES_REMAIN = "no_moves_remain"


class IllegalPlacement(ValueError):
    pass


class WordNotPresent(KeyError):
    pass


class NoWordFits(ValueError):
    pass


class MissingClue(KeyError):
    def __init__(self, answer: str):
        self.answer = answer
        super().__init__(f"no clue for placed answer {answer!r}")


_ACROSS_BIT = 1
_DOWN_BIT = 2


@dataclass(frozen=True)
class Placement:
    word: str
    row: int
    col: int
    direction: Direction

    def cells(self) -> Iterator[tuple[int, int, str]]:
        dr, dc = (0, 1) if self.direction is Direction.ACROSS else (1, 0)
        for i, letter in enumerate(self.word):
            yield self.row + dr * i, self.col + dc * i, letter

    def tiebreak(self) -> tuple[str, int, int, str]:
        return (self.word, self.row, self.col, self.direction.value)


@dataclass(frozen=True, eq=False)
class Layout:
    """Immutable grid snapshot.

    `grid` holds one string per cell row-major ("" when empty); `cover` is a
    per-cell bitmask of the directions occupying it (1 across, 2 down).
    apply/remove return new snapshots and keep the fill and crossing counts
    incrementally.
    """

    width: int
    height: int
    placements: tuple[Placement, ...]
    grid: tuple[str, ...]
    cover: tuple[int, ...]
    n_filled: int
    n_crossings: int
    words: frozenset[str]

    @classmethod
    def empty(cls, width: int, height: int) -> "Layout":
        if width < 1 or height < 1:
            raise ValueError("grid dimensions must be positive")
        size = width * height
        return cls(
            width=width,
            height=height,
            placements=(),
            grid=("",) * size,
            cover=(0,) * size,
            n_filled=0,
            n_crossings=0,
            words=frozenset(),
        )

    @property
    def filled_count(self) -> int:
        return self.n_filled

    def letter_at(self, row: int, col: int) -> str | None:
        if not (0 <= row < self.height and 0 <= col < self.width):
            return None
        return self.grid[row * self.width + col] or None

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Layout):
            return NotImplemented
        return (
            self.width == other.width
            and self.height == other.height
            and set(self.placements) == set(other.placements)
        )


@dataclass(frozen=True)
class ScoreBreakdown:
    fw: int
    ll: int
    fr: float
    lr: float
    score: float

    @classmethod
    def from_counts(
        cls, fw: int, ll: int, filled: int, area: int, ll_weight: float = 0.5
    ) -> "ScoreBreakdown":
        fr = filled / area if area else 0.0
        lr = ll / filled if filled else 0.0
        return cls(fw=fw, ll=ll, fr=fr, lr=lr, score=(fw + ll_weight * ll) * fr * lr)


def score(layout: Layout, ll_weight: float = 0.5) -> ScoreBreakdown:
    return ScoreBreakdown.from_counts(
        fw=len(layout.placements),
        ll=layout.n_crossings,
        filled=layout.n_filled,
        area=layout.width * layout.height,
        ll_weight=ll_weight,
    )


# ---------------------------------------------------------------------------
# Placement legality
# ---------------------------------------------------------------------------

def check_placement(layout: Layout, placement: Placement) -> tuple[bool, int]:
    """Test a placement against the legality rules.

    Returns (legal, crossing_count). Rules: fits in bounds; never repeats a
    placed word; overlapped cells match letters and may only ride the
    perpendicular direction; at least one overlap unless the layout is empty;
    the cells flanking the word along its axis are empty or boundary; new
    cells have no side-adjacent letters (lateral contact only at crossings).
    """
    word = placement.word
    n = len(word)
    row, col = placement.row, placement.col
    width, height = layout.width, layout.height
    if n == 0 or row < 0 or col < 0:
        return False, 0
    if placement.direction is Direction.ACROSS:
        if row >= height or col + n > width:
            return False, 0
        stride = 1
        own_bit = _ACROSS_BIT
        lat_off = width
        lat_before, lat_after = row > 0, row < height - 1
        flank_before, flank_after = col > 0, col + n < width
    else:
        if col >= width or row + n > height:
            return False, 0
        stride = width
        own_bit = _DOWN_BIT
        lat_off = 1
        lat_before, lat_after = col > 0, col < width - 1
        flank_before, flank_after = row > 0, row + n < height
    if word in layout.words:
        return False, 0

    grid = layout.grid
    cover = layout.cover
    start = row * width + col
    crossings = 0
    idx = start
    for letter in word:
        existing = grid[idx]
        if existing:
            if existing != letter or cover[idx] & own_bit:
                return False, 0
            crossings += 1
        else:
            if lat_before and grid[idx - lat_off]:
                return False, 0
            if lat_after and grid[idx + lat_off]:
                return False, 0
        idx += stride
    if crossings == 0 and layout.placements:
        return False, 0
    if flank_before and grid[start - stride]:
        return False, 0
    if flank_after and grid[start + n * stride]:
        return False, 0
    return True, crossings


def legal_placements(layout: Layout, word: str) -> list[Placement]:
    """Every placement of `word` satisfying the legality rules, ordered by
    (row, col, direction)."""
    return [p for p, _ in legal_placements_with_crossings(layout, word)]


def legal_placements_with_crossings(
    layout: Layout, word: str
) -> list[tuple[Placement, int]]:
    n = len(word)
    width = layout.width
    results: list[tuple[Placement, int]] = []
    if not layout.placements:
        for row in range(layout.height):
            for col in range(width - n + 1):
                p = Placement(word, row, col, Direction.ACROSS)
                ok, crossings = check_placement(layout, p)
                if ok:
                    results.append((p, crossings))
        for row in range(layout.height - n + 1):
            for col in range(width):
                p = Placement(word, row, col, Direction.DOWN)
                ok, crossings = check_placement(layout, p)
                if ok:
                    results.append((p, crossings))
    else:
        # Anchor on matching letters: any legal placement crosses at least
        # one existing cell, so this enumeration is exhaustive.
        by_letter: dict[str, list[int]] = {}
        for idx, letter in enumerate(layout.grid):
            if letter:
                by_letter.setdefault(letter, []).append(idx)
        seen: set[tuple[int, int, Direction]] = set()
        for i, letter in enumerate(word):
            for idx in by_letter.get(letter, ()):
                r, c = divmod(idx, width)
                for direction, start_r, start_c in (
                    (Direction.ACROSS, r, c - i),
                    (Direction.DOWN, r - i, c),
                ):
                    key = (start_r, start_c, direction)
                    if key in seen:
                        continue
                    seen.add(key)
                    p = Placement(word, start_r, start_c, direction)
                    ok, crossings = check_placement(layout, p)
                    if ok:
                        results.append((p, crossings))
    results.sort(key=lambda pc: (pc[0].row, pc[0].col, pc[0].direction.value))
    return results


# ---------------------------------------------------------------------------
# Layout mutation (returns new snapshots)
# ---------------------------------------------------------------------------

def apply(layout: Layout, placement: Placement) -> Layout:
    ok, crossings = check_placement(layout, placement)
    if not ok:
        raise IllegalPlacement(f"illegal placement {placement}")
    grid = list(layout.grid)
    cover = list(layout.cover)
    own_bit = _ACROSS_BIT if placement.direction is Direction.ACROSS else _DOWN_BIT
    stride = 1 if placement.direction is Direction.ACROSS else layout.width
    idx = placement.row * layout.width + placement.col
    for letter in placement.word:
        grid[idx] = letter
        cover[idx] |= own_bit
        idx += stride
    return Layout(
        width=layout.width,
        height=layout.height,
        placements=layout.placements + (placement,),
        grid=tuple(grid),
        cover=tuple(cover),
        n_filled=layout.n_filled + len(placement.word) - crossings,
        n_crossings=layout.n_crossings + crossings,
        words=layout.words | {placement.word},
    )


def remove(layout: Layout, word: str) -> Layout:
    target = next((p for p in layout.placements if p.word == word), None)
    if target is None:
        raise WordNotPresent(word)
    grid = list(layout.grid)
    cover = list(layout.cover)
    own_bit = _ACROSS_BIT if target.direction is Direction.ACROSS else _DOWN_BIT
    stride = 1 if target.direction is Direction.ACROSS else layout.width
    idx = target.row * layout.width + target.col
    crossings_lost = 0
    for _ in target.word:
        cover[idx] &= ~own_bit
        if cover[idx]:
            crossings_lost += 1  # cell kept by the perpendicular word
        else:
            grid[idx] = ""
        idx += stride
    return Layout(
        width=layout.width,
        height=layout.height,
        placements=tuple(p for p in layout.placements if p is not target),
        grid=tuple(grid),
        cover=tuple(cover),
        n_filled=layout.n_filled - (len(target.word) - crossings_lost),
        n_crossings=layout.n_crossings - crossings_lost,
        words=layout.words - {word},
    )


def placement_crossings(layout: Layout, placement: Placement) -> int:
    """Crossing-cell count of an already-placed word."""
    stride = 1 if placement.direction is Direction.ACROSS else layout.width
    idx = placement.row * layout.width + placement.col
    count = 0
    for _ in placement.word:
        if layout.cover[idx] == (_ACROSS_BIT | _DOWN_BIT):
            count += 1
        idx += stride
    return count


# ---------------------------------------------------------------------------
# Generation search
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GenConfig:
    width: int = 11
    height: int = 11
    min_words: int = 6
    target_fill_ratio: float = 0.4
    max_adjustments: int = 20
    time_budget: float = 10.0  # seconds, wall clock
    seed: int = 0
    removal_batch: int = 2
    max_resets: int = 3
    ll_weight: float = 0.5

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("grid dimensions must be positive")
        if self.min_words < 1:
            raise ValueError("min_words must be >= 1")
        if not 0 < self.target_fill_ratio <= 1:
            raise ValueError("target_fill_ratio must be in (0, 1]")
        if self.max_adjustments < 0 or self.max_resets < 0:
            raise ValueError("adjustment limits must be >= 0")
        if self.time_budget <= 0:
            raise ValueError("time_budget must be positive")
        if self.removal_batch < 1:
            raise ValueError("removal_batch must be >= 1")


@dataclass
class GenStats:
    steps: int = 0
    adjustments: int = 0
    removals: int = 0
    resets: int = 0
    elapsed: float = 0.0


@dataclass(frozen=True)
class GenResult:
    layout: Layout
    score: ScoreBreakdown
    reason: TerminationReason
    stats: GenStats


@dataclass(frozen=True)
class _Candidate:
    placement: Placement
    breakdown: ScoreBreakdown

    def beats(self, other: "_Candidate | None") -> bool:
        if other is None:
            return True
        if self.breakdown.score != other.breakdown.score:
            return self.breakdown.score > other.breakdown.score
        return self.placement.tiebreak() < other.placement.tiebreak()


def _extract_words(words: Iterable) -> list[str]:
    out: list[str] = []
    seen: set[str] = set()
    for item in words:
        raw = item if isinstance(item, str) else item.answer
        word = to_grid_form(raw)
        if word not in seen:
            seen.add(word)
            out.append(word)
    return out


def generate(
    words: Sequence,
    cfg: GenConfig,
    priority: Iterable[str] = (),
    workers: int = 1,
    trace: Callable[[dict], None] | None = None,
) -> GenResult:
    """Build a layout from answer words (strings or objects with `.answer`).

    Greedy insertion by best resulting score; when stuck, removes the least
    crossed words, and after `max_resets` fruitless removal rounds resets to
    an empty grid with a reshuffled word order. Returns the best-scoring
    layout seen (ties broken toward more words, then more crossings).
    """
    pool = _extract_words(words)
    if not pool:
        raise NoWordFits("empty word list")
    if not any(len(w) <= cfg.width or len(w) <= cfg.height for w in pool):
        raise NoWordFits(f"no word fits a {cfg.width}x{cfg.height} grid")
    fits = [w for w in pool if len(w) <= cfg.width or len(w) <= cfg.height]
    priority_set = {to_grid_form(w) for w in priority}
    rng = random.Random(cfg.seed)

    order = sorted(fits, key=lambda w: (-len(w), w))
    layout = Layout.empty(cfg.width, cfg.height)
    area = cfg.width * cfg.height
    stats = GenStats()
    start = time.monotonic()

    def emit(action: str, word: str, value: float) -> None:
        if trace is not None:
            trace(
                {"step": stats.steps, "action": action, "word": word, "score": value}
            )

    best_score = score(layout, cfg.ll_weight)
    best_key = (best_score.score, best_score.fw, best_score.ll)
    best_layout = layout
    key_at_last_stall = best_key
    fruitless_rounds = 0

    def finish(reason: TerminationReason) -> GenResult:
        stats.elapsed = time.monotonic() - start
        emit("stop", reason.value, best_score.score)
        return GenResult(best_layout, best_score, reason, stats)

    def note_apply(word: str) -> None:
        nonlocal best_key, best_layout, best_score
        stats.steps += 1
        s = score(layout, cfg.ll_weight)
        key = (s.score, s.fw, s.ll)
        if key > best_key:
            best_key, best_layout, best_score = key, layout, s
        emit("apply", word, s.score)

    def place_initial() -> Placement:
        word = next(w for w in order if len(w) <= cfg.width or len(w) <= cfg.height)
        if len(word) <= cfg.width:
            return Placement(
                word, cfg.height // 2, (cfg.width - len(word)) // 2, Direction.ACROSS
            )
        return Placement(
            word, (cfg.height - len(word)) // 2, cfg.width // 2, Direction.DOWN
        )

    executor = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None

    def best_candidate(current: Layout, subset: list[str]) -> _Candidate | None:
        fw = len(current.placements)
        ll = current.n_crossings
        filled = current.n_filled

        def evaluate(word: str) -> list[_Candidate]:
            out = []
            for placement, crossings in legal_placements_with_crossings(current, word):
                breakdown = ScoreBreakdown.from_counts(
                    fw + 1,
                    ll + crossings,
                    filled + len(word) - crossings,
                    area,
                    cfg.ll_weight,
                )
                out.append(_Candidate(placement, breakdown))
            return out

        if executor is not None:
            evaluated = list(executor.map(evaluate, subset))
        else:
            evaluated = [evaluate(word) for word in subset]
        # Reduce in word order so the pick is scheduling-independent.
        winner: _Candidate | None = None
        for group in evaluated:
            for cand in group:
                if cand.beats(winner):
                    winner = cand
        return winner

    try:
        while True:
            if time.monotonic() - start >= cfg.time_budget:
                return finish(TerminationReason.TIME_BUDGET_EXHAUSTED)

            if not layout.placements:
                initial = place_initial()
                layout = apply(layout, initial)
                note_apply(initial.word)
                continue

            current = score(layout, cfg.ll_weight)
            if current.fw >= cfg.min_words and current.fr >= cfg.target_fill_ratio:
                return finish(TerminationReason.MIN_WORDS_AND_FILL_REACHED)

            placed = layout.words
            unplaced = [w for w in order if w not in placed]
            if not unplaced:
                return finish(TerminationReason.NO_MOVES_REMAIN)

            preferred = [w for w in unplaced if w in priority_set]
            candidate = best_candidate(layout, preferred) if preferred else None
            if candidate is None:
                candidate = best_candidate(layout, unplaced)

            if candidate is not None:
                layout = apply(layout, candidate.placement)
                note_apply(candidate.placement.word)
                continue

            # Stuck: no unplaced word has a legal placement.
            if stats.adjustments >= cfg.max_adjustments:
                return finish(TerminationReason.MAX_ADJUSTMENTS_EXHAUSTED)
            if best_key > key_at_last_stall:
                fruitless_rounds = 0
            key_at_last_stall = best_key

            if fruitless_rounds >= cfg.max_resets:
                rng.shuffle(order)
                layout = Layout.empty(cfg.width, cfg.height)
                stats.adjustments += 1
                stats.resets += 1
                fruitless_rounds = 0
                emit("reset", "", 0.0)
            else:
                layout = _remove_batch(layout, cfg.removal_batch)
                stats.adjustments += 1
                stats.removals += 1
                fruitless_rounds += 1
                emit("remove", "", score(layout, cfg.ll_weight).score)
    finally:
        if executor is not None:
            executor.shutdown(wait=False)


def _remove_batch(layout: Layout, batch: int) -> Layout:
    """Remove the `batch` least-crossed words, then cascade out any word left
    without a crossing so the layout stays interlocked."""
    ranked = sorted(
        layout.placements,
        key=lambda p: (placement_crossings(layout, p), p.word),
    )
    for placement in ranked[:batch]:
        layout = remove(layout, placement.word)
    while len(layout.placements) > 1:
        floater = next(
            (
                p
                for p in sorted(layout.placements, key=lambda pl: pl.word)
                if placement_crossings(layout, p) == 0
            ),
            None,
        )
        if floater is None:
            break
        layout = remove(layout, floater.word)
    return layout


# ---------------------------------------------------------------------------
# Numbering and rendering
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PuzzleEntry:
    num: int
    clue: str
    answer: str
    len: int


@dataclass(frozen=True)
class PuzzleDocument:
    width: int
    height: int
    cells: tuple[str, ...]  # one string per row, "." for empty cells
    numbers: tuple[tuple[int, ...], ...]  # 0 for unnumbered cells
    across: tuple[PuzzleEntry, ...]
    down: tuple[PuzzleEntry, ...]

    def to_dict(self) -> dict:
        return {
            "width": self.width,
            "height": self.height,
            "cells": list(self.cells),
            "numbers": [list(row) for row in self.numbers],
            "across": [vars(e).copy() for e in self.across],
            "down": [vars(e).copy() for e in self.down],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PuzzleDocument":
        return cls(
            width=data["width"],
            height=data["height"],
            cells=tuple(data["cells"]),
            numbers=tuple(tuple(row) for row in data["numbers"]),
            across=tuple(PuzzleEntry(**e) for e in data["across"]),
            down=tuple(PuzzleEntry(**e) for e in data["down"]),
        )

    def to_json(self) -> str:
        """Canonical serialization; byte-stable for identical documents."""
        return json.dumps(
            self.to_dict(), ensure_ascii=False, sort_keys=True, separators=(",", ":")
        )

    def to_text(self) -> str:
        lines = [" ".join(row) for row in self.cells]
        lines.append("")
        lines.append("Across:")
        for e in self.across:
            lines.append(f" {e.num}. {e.clue} ({e.len})")
        lines.append("Down:")
        for e in self.down:
            lines.append(f" {e.num}. {e.clue} ({e.len})")
        return "\n".join(lines) + "\n"


def number_and_render(layout: Layout, clue_map: dict[str, str]) -> PuzzleDocument:
    """Standard crossword numbering: scan row-major, a cell earns the next
    number when an across or down word starts there."""
    for placement in layout.placements:
        if placement.word not in clue_map:
            raise MissingClue(placement.word)

    starts: dict[tuple[int, int], list[Placement]] = {}
    for placement in layout.placements:
        starts.setdefault((placement.row, placement.col), []).append(placement)

    numbers = [[0] * layout.width for _ in range(layout.height)]
    across_entries: list[PuzzleEntry] = []
    down_entries: list[PuzzleEntry] = []
    counter = 0
    for r in range(layout.height):
        for c in range(layout.width):
            here = starts.get((r, c))
            if not here:
                continue
            counter += 1
            numbers[r][c] = counter
            for placement in here:
                entry = PuzzleEntry(
                    num=counter,
                    clue=clue_map[placement.word],
                    answer=placement.word,
                    len=len(placement.word),
                )
                if placement.direction is Direction.ACROSS:
                    across_entries.append(entry)
                else:
                    down_entries.append(entry)

    cells = tuple(
        "".join(
            layout.grid[r * layout.width + c] or "." for c in range(layout.width)
        )
        for r in range(layout.height)
    )
    return PuzzleDocument(
        width=layout.width,
        height=layout.height,
        cells=cells,
        numbers=tuple(tuple(row) for row in numbers),
        across=tuple(sorted(across_entries, key=lambda e: e.num)),
        down=tuple(sorted(down_entries, key=lambda e: e.num)),
    )
