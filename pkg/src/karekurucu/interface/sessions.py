"""Educator session state: one JSON file per session, atomic writes, locking."""
from __future__ import annotations

import fcntl
import json
import os
import re
import tempfile
import threading
import uuid
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable

from .. import clueforge, gridengine
from ..clueforge import ClueProvider, ClueRequest
from ..gridengine import GenConfig
from ..textnorm import NonAlphabetCharacter, to_grid_form, word_count
from .errors import (
    AllProvidersFailed,
    Conflict,
    GenerationFailed,
    NoWordFitsError,
    SessionNotFound,
    UnknownCandidate,
    ValidationFailed,
)

STATUS_DRAFT = "draft"
STATUS_CLUES_READY = "clues_ready"
STATUS_GENERATED = "generated"

GEN_NONE = "none"
GEN_RUNNING = "running"
GEN_FAILED = "failed"

_ID_RE = re.compile(r"^[0-9a-f]{32}$")


def canonical_json(payload) -> str:
    """Canonical JSON used wherever byte-stable output matters."""
    return json.dumps(payload, ensure_ascii=False, sort_keys=True,
                      separators=(",", ":"))


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass
class Session:
    id: str
    created_at: str
    version: int = 1
    status: str = STATUS_DRAFT
    inputs: list[dict] = field(default_factory=list)
    candidates: list[dict] = field(default_factory=list)
    failures: list[dict] = field(default_factory=list)
    selections: dict[str, str] = field(default_factory=dict)  # answer -> clue
    puzzle: dict | None = None
    generation: dict = field(
        default_factory=lambda: {"state": GEN_NONE, "reason": None, "error": None}
    )

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "Session":
        return cls(**data)

    def candidate_by_id(self, candidate_id: str) -> dict | None:
        return next((c for c in self.candidates if c["id"] == candidate_id), None)


def validate_inputs(raw_inputs: list[dict]) -> list[dict]:
    """Normalize and validate session inputs (answer required, text optional)."""
    if not raw_inputs:
        raise ValidationFailed("at least one input is required")
    inputs = []
    for i, item in enumerate(raw_inputs):
        answer = (item.get("answer") or "").strip()
        if not answer:
            raise ValidationFailed(f"input {i}: answer is required", {"index": i})
        try:
            normalized = to_grid_form("".join(answer.split()))
        except (NonAlphabetCharacter, ValueError) as exc:
            raise ValidationFailed(
                f"input {i}: answer is not a valid grid word: {exc}", {"index": i}
            )
        text = item.get("text")
        if text is not None and word_count(text) == 0:
            raise ValidationFailed(
                f"input {i}: text, when given, must contain words", {"index": i}
            )
        n = item.get("n", 3)
        if not isinstance(n, int) or n < 1:
            raise ValidationFailed(f"input {i}: n must be a positive integer",
                                   {"index": i})
        inputs.append(
            {
                "answer": normalized,
                "text": text,
                "category": item.get("category"),
                "n": n,
            }
        )
    answers = [item["answer"] for item in inputs]
    if len(set(answers)) != len(answers):
        raise ValidationFailed("duplicate answers in inputs")
    return inputs


class SessionStore:
    """One JSON file per session under `data_dir`.

    Writes go through a per-session advisory lock (flock on a sidecar .lock
    file) plus an in-process mutex; a concurrent writer raises Conflict.
    Files are written to a temp file and atomically renamed.
    """

    def __init__(self, data_dir: str | Path):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self._process_locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def _path(self, session_id: str) -> Path:
        if not _ID_RE.match(session_id):
            raise SessionNotFound(f"no session {session_id!r}")
        return self.data_dir / f"{session_id}.json"

    def _lock_path(self, session_id: str) -> Path:
        return self.data_dir / f"{session_id}.lock"

    def _process_lock(self, session_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._process_locks.setdefault(session_id, threading.Lock())

    def create(self, inputs: list[dict]) -> Session:
        session = Session(id=uuid.uuid4().hex, created_at=_now(),
                          inputs=validate_inputs(inputs))
        self._write(session)
        return session

    def get(self, session_id: str) -> Session:
        path = self._path(session_id)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise SessionNotFound(f"no session {session_id!r}")
        return Session.from_dict(data)

    def update(
        self,
        session_id: str,
        mutate: Callable[[Session], None],
        expected_version: int | None = None,
    ) -> Session:
        """Load-mutate-persist under the session lock.

        `mutate` may raise to abort; nothing is persisted in that case. The
        optional `expected_version` enables optimistic concurrency for
        clients holding a possibly stale copy.
        """
        process_lock = self._process_lock(session_id)
        if not process_lock.acquire(blocking=False):
            raise Conflict(f"session {session_id} is being modified")
        try:
            lock_file = open(self._lock_path(session_id), "w")
            try:
                try:
                    fcntl.flock(lock_file, fcntl.LOCK_EX | fcntl.LOCK_NB)
                except OSError:
                    raise Conflict(f"session {session_id} is locked by another writer")
                session = self.get(session_id)
                if expected_version is not None and session.version != expected_version:
                    raise Conflict(
                        f"session {session_id} changed (version "
                        f"{session.version}, expected {expected_version})",
                        {"version": session.version},
                    )
                mutate(session)
                session.version += 1
                self._write(session)
                return session
            finally:
                lock_file.close()
        finally:
            process_lock.release()

    def _write(self, session: Session) -> None:
        path = self._path(session.id)
        fd, tmp = tempfile.mkstemp(dir=self.data_dir, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as handle:
                json.dump(session.to_dict(), handle, ensure_ascii=False)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise


# ---------------------------------------------------------------------------
# Workflow operations shared by the CLI and the HTTP service
# ---------------------------------------------------------------------------

def request_clues(store: SessionStore, session_id: str,
                  provider: ClueProvider) -> Session:
    """Populate candidates for every input; partial failure is recorded, a
    total failure raises AllProvidersFailed."""

    def mutate(session: Session) -> None:
        if session.status != STATUS_DRAFT:
            raise Conflict(
                f"clues already requested (status {session.status})",
                {"status": session.status},
            )
        counter = 0
        for item in session.inputs:
            req = ClueRequest(
                answer=item["answer"],
                text=item["text"],
                category=item["category"],
                n=item["n"],
            )
            try:
                if req.text is not None:
                    found = clueforge.generate_from_text(req, provider)
                else:
                    found = clueforge.generate_from_answer(req.answer, req.n, provider)
            except (clueforge.ProviderUnavailable, clueforge.NoCluesFound,
                    clueforge.AnswerNotInText) as exc:
                session.failures.append(
                    {
                        "answer": item["answer"],
                        "code": type(exc).__name__,
                        "message": str(exc),
                    }
                )
                continue
            for cand in found:
                counter += 1
                session.candidates.append(
                    {
                        "id": f"c{counter}",
                        "answer": cand.answer,
                        "clue": cand.clue,
                        "provider_id": cand.provider_id,
                        "created_at": cand.created_at,
                        "rating": cand.rating,
                    }
                )
        if not session.candidates:
            raise AllProvidersFailed(
                "no input produced any clue candidate",
                {"failures": session.failures},
            )
        session.status = STATUS_CLUES_READY

    return store.update(session_id, mutate)


def resolve_selections(session: Session, selections: dict[str, str]) -> dict[str, str]:
    """Map {answer: candidate_id} to {answer: clue}, validating every id."""
    if not selections:
        raise ValidationFailed("at least one selection is required")
    resolved: dict[str, str] = {}
    for answer, candidate_id in selections.items():
        candidate = session.candidate_by_id(candidate_id)
        if candidate is None or candidate["answer"] != answer:
            raise UnknownCandidate(
                f"candidate {candidate_id!r} does not exist for answer {answer!r}",
                {"answer": answer, "candidate_id": candidate_id},
            )
        resolved[answer] = candidate["clue"]
    return resolved


def run_generation(selections: dict[str, str], cfg: GenConfig,
                   workers: int = 1) -> tuple[dict, str]:
    """Generate and number a puzzle for selected answer->clue pairs.

    Returns (puzzle document dict, termination reason)."""
    try:
        result = gridengine.generate(list(selections.keys()), cfg, workers=workers)
    except gridengine.NoWordFits as exc:
        raise NoWordFitsError(str(exc))
    except ValueError as exc:
        raise GenerationFailed(str(exc))
    placed = {p.word for p in result.layout.placements}
    clue_map = {answer: clue for answer, clue in selections.items() if answer in placed}
    document = gridengine.number_and_render(result.layout, clue_map)
    return document.to_dict(), result.reason.value


def begin_generation(
    store: SessionStore,
    session_id: str,
    selections: dict[str, str],
    expected_version: int | None = None,
) -> tuple[Session, dict[str, str]]:
    """Validate selections and mark generation as running (phase one)."""
    resolved: dict[str, str] = {}

    def mutate(session: Session) -> None:
        if session.status != STATUS_CLUES_READY:
            raise Conflict(
                f"cannot generate from status {session.status}",
                {"status": session.status},
            )
        if session.generation["state"] == GEN_RUNNING:
            raise Conflict("generation already running")
        resolved.update(resolve_selections(session, selections))
        session.selections = dict(resolved)
        session.generation = {"state": GEN_RUNNING, "reason": None, "error": None}

    return store.update(session_id, mutate, expected_version=expected_version), resolved


def complete_generation(store: SessionStore, session_id: str,
                        puzzle: dict, reason: str) -> Session:
    def mutate(session: Session) -> None:
        session.puzzle = puzzle
        session.status = STATUS_GENERATED
        session.generation = {"state": GEN_NONE, "reason": reason, "error": None}

    return store.update(session_id, mutate)


def fail_generation(store: SessionStore, session_id: str, error: dict) -> Session:
    def mutate(session: Session) -> None:
        session.status = STATUS_CLUES_READY
        session.generation = {"state": GEN_FAILED, "reason": None, "error": error}

    return store.update(session_id, mutate)


def select_and_generate(
    store: SessionStore,
    session_id: str,
    selections: dict[str, str],
    cfg: GenConfig,
    expected_version: int | None = None,
    workers: int = 1,
) -> Session:
    """Synchronous selection + generation (CLI path)."""
    _, resolved = begin_generation(store, session_id, selections, expected_version)
    try:
        puzzle, reason = run_generation(resolved, cfg, workers=workers)
    except (GenerationFailed, NoWordFitsError) as exc:
        fail_generation(store, session_id, exc.to_dict())
        raise
    return complete_generation(store, session_id, puzzle, reason)
