"""Clue candidate generation: prompt templating and pluggable providers."""
from __future__ import annotations

import json
import os
import re
import threading
import time
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Iterable, Protocol

import httpx

from .corpus import AnswerCluePair
from .textnorm import to_grid_form, turkish_lower, word_count

API_KEY_ENV = "CLUEFORGE_API_KEY"

# Reconstructed Turkish instruction prompts (configurable; replace via file).
DEFAULT_TEXT_TEMPLATE = (
    "Aşağıdaki metne dayanarak '{answer}' cevabı için {n} adet eğitici Türkçe "
    "bulmaca ipucu yaz. Kategori: {category}. İpuçları 5 ile 15 kelime arasında "
    "olmalı, cevabı içermemeli ve her biri ayrı bir satıra numaralanarak "
    "yazılmalı.\n\nMetin: {text}"
)
DEFAULT_ANSWER_TEMPLATE = (
    "'{answer}' cevabı için {n} adet eğitici Türkçe bulmaca ipucu yaz. "
    "İpuçları 5 ile 15 kelime arasında olmalı, cevabı içermemeli ve her biri "
    "ayrı bir satıra numaralanarak yazılmalı."
)
DEFAULT_SYSTEM_MESSAGE = (
    "Türkçe eğitici bulmaca ipuçları üreten bir yardımcısın."
)

FAIL_ANSWER_LEAK = "answer_leak"
FAIL_LENGTH = "length_out_of_range"
CLUE_WORDS_MIN = 5
CLUE_WORDS_MAX = 15

_PLACEHOLDER_RE = re.compile(r"\{(\w+)\}")


class MissingField(KeyError):
    def __init__(self, placeholder: str):
        self.placeholder = placeholder
        super().__init__(f"request has no value for placeholder {{{placeholder}}}")


class ProviderUnavailable(RuntimeError):
    pass


class NoCluesFound(LookupError):
    pass


class AnswerNotInText(ValueError):
    pass


@dataclass(frozen=True)
class PromptTemplate:
    body: str
    id: str = "custom"

    def __post_init__(self):
        names = _PLACEHOLDER_RE.findall(self.body)
        duplicates = {n for n in names if names.count(n) > 1}
        if duplicates:
            raise ValueError(
                f"template {self.id}: placeholders used more than once: "
                f"{', '.join(sorted(duplicates))}"
            )

    @property
    def placeholders(self) -> tuple[str, ...]:
        return tuple(_PLACEHOLDER_RE.findall(self.body))

    @classmethod
    def load(cls, path: str | Path, template_id: str | None = None) -> "PromptTemplate":
        body = Path(path).read_text(encoding="utf-8")
        return cls(body=body, id=template_id or Path(path).stem)


@dataclass(frozen=True)
class ClueRequest:
    answer: str  # grid form
    text: str | None = None
    category: str | None = None
    n: int = 3

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.text is not None and word_count(self.text) == 0:
            raise ValueError("text, when given, must contain at least one word")

    def field_value(self, name: str) -> str | None:
        if name == "answer":
            return self.answer
        if name == "text":
            return self.text
        if name == "category":
            return self.category
        if name == "n":
            return str(self.n)
        return None


@dataclass(frozen=True)
class ClueCandidate:
    clue: str
    answer: str
    provider_id: str
    created_at: str
    rating: dict | None = None


@dataclass(frozen=True)
class ProviderConfig:
    kind: str = "static"  # static | remote
    corpus_path: str | None = None  # static: TSV of answer-clue pairs
    endpoint: str | None = None
    model_name: str = "remote-model"
    timeout: float = 30.0
    max_retries: int = 2
    backoff: float = 0.5  # seconds, doubled per retry
    temperature: float = 0.7
    requests_per_minute: float | None = None
    fixtures_dir: str | None = None  # remote with scripted transport

    def __post_init__(self):
        if self.kind not in ("static", "remote"):
            raise ValueError(f"unknown provider kind {self.kind!r}")
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")


def render_prompt(tpl: PromptTemplate, req: ClueRequest) -> str:
    """Substitute each placeholder exactly once; single pass, so substituted
    values are never re-expanded."""

    def sub(match: re.Match) -> str:
        value = req.field_value(match.group(1))
        if value is None:
            raise MissingField(match.group(1))
        return value

    return _PLACEHOLDER_RE.sub(sub, tpl.body)


def _compact(text: str) -> str:
    """Turkish-lowercased text with everything but letters/digits removed."""
    lowered = turkish_lower(text)
    return "".join(ch for ch in lowered if ch.isalnum())


def validate_clue(
    clue: str, answer: str, strict: bool = False
) -> tuple[bool, str | None]:
    """(True, None) when the clue is usable, else (False, reason).

    The answer-leak check is substring containment on normalized compact
    forms, so inflected leaks ("Ankara'nın") are caught too. The 5..15 word
    bound is enforced only in strict mode.
    """
    if not clue.strip():
        return False, "empty"
    if _compact(answer) and _compact(answer) in _compact(clue):
        return False, FAIL_ANSWER_LEAK
    if strict:
        n = word_count(clue)
        if not CLUE_WORDS_MIN <= n <= CLUE_WORDS_MAX:
            return False, FAIL_LENGTH
    return True, None


def parse_clue_list(content: str) -> list[str]:
    """Tolerant parse of a model reply: numbered, bulleted, or bare lines."""
    clues: list[str] = []
    for line in content.splitlines():
        stripped = line.strip()
        stripped = re.sub(r"^(?:\d+[\.\)\-:]?|[-*•])\s*", "", stripped).strip()
        stripped = stripped.strip('"')
        if stripped:
            clues.append(stripped)
    return clues


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


class ClueProvider(Protocol):
    provider_id: str

    def clues_for(self, req: ClueRequest) -> list[str]: ...


class StaticProvider:
    """Corpus lookup: clues for an answer in corpus order."""

    def __init__(self, pairs: Iterable[AnswerCluePair], provider_id: str = "static"):
        self.provider_id = provider_id
        self._by_answer: dict[str, list[str]] = {}
        for pair in pairs:
            self._by_answer.setdefault(pair.answer, []).append(pair.clue)

    def clues_for(self, req: ClueRequest) -> list[str]:
        clues = self._by_answer.get(req.answer)
        if not clues:
            raise NoCluesFound(f"no corpus clues for answer {req.answer!r}")
        return list(clues)


class TokenBucket:
    """Requests-per-minute limiter; acquire() blocks until a token is free."""

    def __init__(self, per_minute: float, clock: Callable[[], float] = time.monotonic,
                 sleep: Callable[[float], None] = time.sleep):
        self.interval = 60.0 / per_minute
        self._clock = clock
        self._sleep = sleep
        self._lock = threading.Lock()
        self._next_free = clock()

    def acquire(self) -> None:
        with self._lock:
            now = self._clock()
            wait = self._next_free - now
            self._next_free = max(self._next_free, now) + self.interval
        if wait > 0:
            self._sleep(wait)


class TransportError(RuntimeError):
    """A transport attempt failed and may be retried."""


def http_transport(cfg: ProviderConfig) -> Callable[[dict], dict]:
    """POSTs a chat-completion payload to cfg.endpoint with bearer auth."""
    if not cfg.endpoint:
        raise ValueError("remote provider requires an endpoint")
    api_key = os.environ.get(API_KEY_ENV)
    if not api_key:
        raise ValueError(f"remote provider requires the {API_KEY_ENV} env var")

    def send(payload: dict) -> dict:
        wire = {k: v for k, v in payload.items() if not k.startswith("_")}
        try:
            response = httpx.post(
                cfg.endpoint,
                json=wire,
                headers={"Authorization": f"Bearer {api_key}"},
                timeout=cfg.timeout,
            )
        except httpx.HTTPError as exc:
            raise TransportError(str(exc)) from exc
        if response.status_code >= 500 or response.status_code == 429:
            raise TransportError(f"status {response.status_code}")
        if response.status_code >= 400:
            raise ProviderUnavailable(
                f"endpoint rejected request: {response.status_code} {response.text}"
            )
        return response.json()

    return send


def fixture_transport(fixtures_dir: str | Path) -> Callable[[dict], dict]:
    """Scripted transport: answers come from `<ANSWER>.txt` (one clue per
    line) or `<ANSWER>.json` ({"clues": [...]}) in a local directory."""
    root = Path(fixtures_dir)

    def send(payload: dict) -> dict:
        answer = payload.get("_answer", "")
        json_path = root / f"{answer}.json"
        txt_path = root / f"{answer}.txt"
        if json_path.exists():
            clues = json.loads(json_path.read_text(encoding="utf-8"))["clues"]
        elif txt_path.exists():
            clues = [
                line for line in txt_path.read_text(encoding="utf-8").splitlines()
                if line.strip()
            ]
        else:
            raise TransportError(f"no fixture for answer {answer!r}")
        content = "\n".join(f"{i}. {clue}" for i, clue in enumerate(clues, start=1))
        return {"choices": [{"message": {"content": content}}]}

    return send


class RemoteProvider:
    """Generative provider speaking a chat-completion shaped protocol.

    The transport is injectable; production uses HTTP, tests use scripted
    fixtures. Failures retry with doubling backoff, at most max_retries
    times (max_retries + 1 attempts total).
    """

    def __init__(
        self,
        cfg: ProviderConfig,
        transport: Callable[[dict], dict] | None = None,
        answer_template: PromptTemplate | None = None,
        text_template: PromptTemplate | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.cfg = cfg
        self.provider_id = cfg.model_name
        if transport is not None:
            self.transport = transport
        elif cfg.fixtures_dir:
            self.transport = fixture_transport(cfg.fixtures_dir)
        else:
            self.transport = http_transport(cfg)
        self.answer_template = answer_template or PromptTemplate(
            DEFAULT_ANSWER_TEMPLATE, id="answer-default"
        )
        self.text_template = text_template or PromptTemplate(
            DEFAULT_TEXT_TEMPLATE, id="text-default"
        )
        self._sleep = sleep
        self._bucket = (
            TokenBucket(cfg.requests_per_minute)
            if cfg.requests_per_minute
            else None
        )

    def clues_for(self, req: ClueRequest) -> list[str]:
        template = self.text_template if req.text is not None else self.answer_template
        if req.text is not None and req.category is None:
            # default templates mention the category; fall back to a generic one
            req = replace(req, category="Genel")
        prompt = render_prompt(template, req)
        payload = {
            "model": self.cfg.model_name,
            "messages": [
                {"role": "system", "content": DEFAULT_SYSTEM_MESSAGE},
                {"role": "user", "content": prompt},
            ],
            "temperature": self.cfg.temperature,
            "_answer": req.answer,  # routing hint for scripted transports
        }
        attempts = self.cfg.max_retries + 1
        delay = self.cfg.backoff
        last_error: Exception | None = None
        for attempt in range(attempts):
            if self._bucket is not None:
                self._bucket.acquire()
            try:
                response = self.transport(payload)
                break
            except TransportError as exc:
                last_error = exc
                if attempt + 1 < attempts and delay > 0:
                    self._sleep(delay)
                    delay *= 2
        else:
            raise ProviderUnavailable(
                f"transport failed after {attempts} attempts: {last_error}"
            )
        try:
            content = response["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise ProviderUnavailable(f"malformed provider response: {exc}") from exc
        return parse_clue_list(content)


def make_provider(
    cfg: ProviderConfig,
    pairs: Iterable[AnswerCluePair] | None = None,
    transport: Callable[[dict], dict] | None = None,
) -> ClueProvider:
    if cfg.kind == "static":
        if pairs is None:
            from .corpus import ingest_pairs, read_pair_rows

            if not cfg.corpus_path:
                raise ValueError("static provider requires corpus_path or pairs")
            pairs, _ = ingest_pairs(read_pair_rows(cfg.corpus_path))
        return StaticProvider(pairs)
    return RemoteProvider(cfg, transport=transport)


def _candidates(
    raw_clues: Iterable[str], answer: str, provider_id: str, n: int
) -> list[ClueCandidate]:
    out: list[ClueCandidate] = []
    for clue in raw_clues:
        ok, _ = validate_clue(clue, answer)
        if not ok:
            continue
        out.append(
            ClueCandidate(
                clue=clue, answer=answer, provider_id=provider_id, created_at=_now()
            )
        )
        if len(out) == n:
            break
    return out


def generate_from_answer(
    answer: str, n: int, provider: ClueProvider
) -> list[ClueCandidate]:
    """Up to n validated candidates for a bare answer."""
    if n < 1:
        raise ValueError("n must be >= 1")
    word = to_grid_form(answer)
    req = ClueRequest(answer=word, n=n)
    return _candidates(provider.clues_for(req), word, provider.provider_id, n)


def generate_from_text(
    req: ClueRequest, provider: ClueProvider, allow_missing_answer: bool = False
) -> list[ClueCandidate]:
    """Up to req.n validated candidates for a (text, answer, category) input.

    The answer must occur in the text (Turkish case-insensitively, ignoring
    spacing and punctuation) unless allow_missing_answer is set.
    """
    if req.text is None:
        raise ValueError("generate_from_text requires req.text")
    if not allow_missing_answer and _compact(req.answer) not in _compact(req.text):
        raise AnswerNotInText(f"answer {req.answer!r} does not occur in the text")
    return _candidates(
        provider.clues_for(req), req.answer, provider.provider_id, req.n
    )
