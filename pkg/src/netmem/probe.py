"""Single-query co-author elicitation against a text completion endpoint.

One probe sends exactly one zero-shot prompt per (seed, model) and records
the raw response together with its classification: a usable name list, an
explicit disclaimer that the names are invented, or a refusal/no-answer.
Refusal and invention detection is pattern-based and user-extensible; the
client never re-prompts on refusals and retries only on transport errors.
"""

from __future__ import annotations

import json
import logging
import os
import re
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Protocol, Sequence

import requests

from .model import ProbeRecord, ResponseClass, SeedAuthor
from .name_match import normalize_name, EmptyName

logger = logging.getLogger(__name__)

PROMPT_TEMPLATE = (
    "Can you list the top co-authors of {name}, who works in the field of "
    "{field}? Please provide the full names (first and last) of up to {k} "
    "co-authors. Separate each co-author's full name from the next using a "
    "forward slash ('/'), without adding extra whitespace."
)

# Refusal phrasings observed across refusing models; matching is on
# apostrophe-normalized, casefolded text and only applies when the response
# carries no parseable name list.
DEFAULT_NULL_PATTERNS: tuple[str, ...] = (
    "i don't have access",
    "i do not have access",
    "i don't have information",
    "i don't have specific information",
    "i don't have any information",
    "unable to verify",
    "not able to verify",
    "unable to find",
    "unable to provide",
    "unable to access",
    "unable to locate",
    "couldn't find",
    "could not find",
    "couldn't locate",
    "could not locate",
    "cannot find",
    "cannot provide",
    "can't provide",
    "cannot be reliably listed",
    "not widely documented",
    "does not specify co-authors",
    "no information available",
)

DEFAULT_FICTIONAL_PATTERNS: tuple[str, ...] = (
    "fictional",
    "hypothetical",
    "made up",
    "made-up",
    "invented names",
    "imaginary",
)


class InvalidSpec(ValueError):
    """Prompt fields are empty or inconsistent."""


class NoNamesFound(ValueError):
    """A response expected to carry names yielded no nonempty segment."""


class TransportError(RuntimeError):
    """The endpoint stayed unreachable after the configured retries."""


@dataclass(frozen=True)
class PromptSpec:
    author_name: str
    field_label: str
    k: int


@dataclass(frozen=True)
class ModelEndpoint:
    """A completion endpoint reachable over HTTP.

    The request is a bare single-turn completion: no tool or browsing flags,
    no sampling overrides, so the endpoint's defaults apply. The credential,
    if any, is read from the environment variable named in `api_key_env`.
    """

    model_id: str
    base_url: str
    api_key_env: str | None = None
    timeout_s: float = 60.0
    max_retries: int = 3
    rate_limit_per_s: float | None = None
    parallelism: int = 4


def build_prompt(spec: PromptSpec) -> str:
    """Instantiate the probe template byte-for-byte."""
    if not spec.author_name.strip():
        raise InvalidSpec("author name is empty")
    if not spec.field_label.strip():
        raise InvalidSpec("field label is empty")
    if spec.k < 1:
        raise InvalidSpec(f"k must be >= 1, got {spec.k}")
    return PROMPT_TEMPLATE.format(
        name=spec.author_name, field=spec.field_label, k=spec.k
    )


def _normalize_quotes(text: str) -> str:
    return text.replace("’", "'").replace("‘", "'")


_NAME_PUNCT = re.compile(r"[.'’‘-]")


def _looks_like_name(segment: str) -> bool:
    """Heuristic for "this slash-separated segment is a person's name"."""
    seg = segment.strip()
    if not seg or len(seg) > 80 or "\n" in seg:
        return False
    tokens = seg.split()
    if not 1 <= len(tokens) <= 6:
        return False
    for token in tokens:
        bare = _NAME_PUNCT.sub("", token)
        if not bare or len(bare) > 30 or not bare.isalpha():
            return False
    return True


def _list_region(raw: str) -> str:
    """The part of a response holding the name list: everything from the
    first line containing a slash onward, or the whole text otherwise."""
    lines = raw.splitlines()
    if len(lines) > 1:
        for i, line in enumerate(lines):
            if "/" in line:
                return "\n".join(lines[i:])
    return raw


def _split_segments(raw: str) -> list[str]:
    region = _list_region(raw)
    return [seg.strip() for seg in region.split("/") if seg.strip()]


def classify_response(
    raw: str,
    *,
    null_patterns: Sequence[str] | None = None,
    fictional_patterns: Sequence[str] | None = None,
) -> ResponseClass:
    """Assign exactly one class to a response.

    A response with a well-formed slash list of names is valid unless it
    declares the names invented; refusal patterns fire only when no such
    list is present. Empty or contentless responses are null.
    """
    nulls = DEFAULT_NULL_PATTERNS if null_patterns is None else tuple(null_patterns)
    fictionals = (
        DEFAULT_FICTIONAL_PATTERNS if fictional_patterns is None else tuple(fictional_patterns)
    )
    if not raw.strip():
        return ResponseClass.NULL

    haystack = _normalize_quotes(raw).casefold()
    fictional = any(p.casefold() in haystack for p in fictionals)
    segments = _split_segments(raw)
    slash_list = len(segments) >= 2 and all(_looks_like_name(s) for s in segments)

    if slash_list:
        return ResponseClass.FICTIONAL if fictional else ResponseClass.VALID
    if any(p.casefold() in haystack for p in nulls):
        return ResponseClass.NULL
    if fictional:
        return ResponseClass.FICTIONAL
    return ResponseClass.VALID if segments else ResponseClass.NULL


def parse_coauthor_list(raw: str) -> list[str]:
    """Extract the generated names from a valid response.

    Preamble lines before the list are dropped, segments are split on '/',
    trimmed, deduplicated on their normalized form, and never truncated to
    the requested count.
    """
    segments = _split_segments(raw)
    if not segments:
        raise NoNamesFound(f"no name segments in response {raw[:80]!r}")
    seen: set[str] = set()
    names: list[str] = []
    for seg in segments:
        try:
            key = normalize_name(seg).reassembled
        except EmptyName:
            key = seg.casefold()
        if key not in seen:
            seen.add(key)
            names.append(seg)
    return names


class CompletionClient(Protocol):
    """Minimal single-turn completion interface."""

    model_id: str

    def complete(self, prompt: str, seed_id: str) -> str: ...


def extract_completion_text(payload: object) -> str:
    """Pull the completion text out of the common response envelopes."""
    if isinstance(payload, str):
        return payload
    if isinstance(payload, dict):
        for key in ("text", "completion", "output", "response"):
            value = payload.get(key)
            if isinstance(value, str):
                return value
        choices = payload.get("choices")
        if isinstance(choices, list) and choices:
            first = choices[0]
            if isinstance(first, dict):
                if isinstance(first.get("text"), str):
                    return first["text"]
                message = first.get("message")
                if isinstance(message, dict) and isinstance(message.get("content"), str):
                    return message["content"]
    raise TransportError(f"unrecognized completion payload: {str(payload)[:120]}")


class HttpCompletionClient:
    """Talks to any endpoint accepting {"model", "prompt"} and returning text.

    Retries with exponential backoff on connection errors, timeouts and
    5xx/429 statuses only; a refusal is a successful response and is never
    re-asked.
    """

    def __init__(
        self,
        endpoint: ModelEndpoint,
        session: requests.Session | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ) -> None:
        self.endpoint = endpoint
        self.model_id = endpoint.model_id
        self._session = session or requests.Session()
        self._sleep = sleep

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        if self.endpoint.api_key_env:
            key = os.environ.get(self.endpoint.api_key_env, "")
            if key:
                headers["Authorization"] = f"Bearer {key}"
        return headers

    def complete(self, prompt: str, seed_id: str) -> str:
        body = {"model": self.endpoint.model_id, "prompt": prompt}
        last_error: Exception | None = None
        for attempt in range(self.endpoint.max_retries + 1):
            if attempt:
                self._sleep(min(30.0, 0.5 * 2 ** (attempt - 1)))
            try:
                response = self._session.post(
                    self.endpoint.base_url,
                    json=body,
                    headers=self._headers(),
                    timeout=self.endpoint.timeout_s,
                )
            except requests.RequestException as exc:
                last_error = exc
                continue
            if response.status_code == 200:
                return extract_completion_text(response.json())
            if response.status_code in (429, 500, 502, 503, 504):
                last_error = TransportError(f"status {response.status_code}")
                continue
            raise TransportError(
                f"endpoint returned status {response.status_code}: {response.text[:200]}"
            )
        raise TransportError(
            f"{self.endpoint.base_url} unreachable after "
            f"{self.endpoint.max_retries + 1} attempts: {last_error}"
        )


class FixtureClient:
    """Serves canned responses from a fixture file; used by --mock-endpoint.

    Fixture format: {"model_id": str, "responses": {seed_id: text},
    "default": text?}. Unknown seeds get the default or raise.
    """

    def __init__(self, fixture_path: str | Path) -> None:
        doc = json.loads(Path(fixture_path).read_text(encoding="utf-8"))
        self.model_id = str(doc.get("model_id") or "mock")
        self._responses = {str(k): str(v) for k, v in (doc.get("responses") or {}).items()}
        self._default = doc.get("default")
        self.calls = 0
        self._lock = threading.Lock()

    def complete(self, prompt: str, seed_id: str) -> str:
        with self._lock:
            self.calls += 1
        if seed_id in self._responses:
            return self._responses[seed_id]
        if self._default is not None:
            return str(self._default)
        raise TransportError(f"fixture has no response for seed {seed_id}")


def probe(
    seed: SeedAuthor,
    k: int,
    client: CompletionClient,
    *,
    null_patterns: Sequence[str] | None = None,
    fictional_patterns: Sequence[str] | None = None,
    timestamp: str = "",
) -> ProbeRecord:
    """Run one zero-shot extraction query for a seed.

    The prompt names the seed and their profile subfield and asks for up to
    k co-authors. Exactly one request is made; transport failures propagate
    as TransportError after the client's retries.
    """
    prompt = build_prompt(PromptSpec(seed.full_name, seed.subfield, k))
    raw = client.complete(prompt, seed.id)
    classification = classify_response(
        raw, null_patterns=null_patterns, fictional_patterns=fictional_patterns
    )
    names: tuple[str, ...] = ()
    if classification is ResponseClass.VALID:
        try:
            names = tuple(parse_coauthor_list(raw))
        except NoNamesFound:
            classification = ResponseClass.NULL
    return ProbeRecord(
        seed_id=seed.id,
        model_id=client.model_id,
        prompt=prompt,
        raw_response=raw,
        classification=classification,
        generated_names=names,
        timestamp=timestamp,
    )


@dataclass
class ProbeFailure:
    seed_id: str
    model_id: str
    error: str


@dataclass
class ProbeBatch:
    records: list[ProbeRecord] = field(default_factory=list)
    failures: list[ProbeFailure] = field(default_factory=list)


class _RateGate:
    """Token bucket with capacity 1: serializes calls at a fixed rate."""

    def __init__(self, per_second: float | None) -> None:
        self._interval = 1.0 / per_second if per_second else 0.0
        self._lock = threading.Lock()
        self._next_at = 0.0

    def wait(self) -> None:
        if not self._interval:
            return
        with self._lock:
            now = time.monotonic()
            delay = self._next_at - now
            self._next_at = max(now, self._next_at) + self._interval
        if delay > 0:
            time.sleep(delay)


def run_probes(
    seeds_with_k: Iterable[tuple[SeedAuthor, int]],
    client: CompletionClient,
    *,
    parallelism: int = 4,
    rate_limit_per_s: float | None = None,
    cache=None,
    null_patterns: Sequence[str] | None = None,
    fictional_patterns: Sequence[str] | None = None,
    clock: Callable[[], str] | None = None,
) -> ProbeBatch:
    """Probe many seeds with bounded parallelism and per-endpoint pacing.

    Raw responses are cached keyed by (model, seed); a warm cache issues no
    requests and reproduces records byte-for-byte. Failures are collected,
    never silently dropped. Records come back sorted by seed id.
    """
    gate = _RateGate(rate_limit_per_s)
    now = clock or (lambda: time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()))
    batch = ProbeBatch()
    lock = threading.Lock()

    def one(seed: SeedAuthor, k: int) -> None:
        cache_key = f"{client.model_id}:{seed.id}"
        cached = cache.get("probes", cache_key) if cache is not None else None
        try:
            if cached is not None:
                raw, stamp = cached["raw_response"], cached["timestamp"]
                prompt = build_prompt(PromptSpec(seed.full_name, seed.subfield, k))
                classification = classify_response(
                    raw, null_patterns=null_patterns, fictional_patterns=fictional_patterns
                )
                names: tuple[str, ...] = ()
                if classification is ResponseClass.VALID:
                    try:
                        names = tuple(parse_coauthor_list(raw))
                    except NoNamesFound:
                        classification = ResponseClass.NULL
                record = ProbeRecord(seed.id, client.model_id, prompt, raw,
                                     classification, names, stamp)
            else:
                gate.wait()
                record = probe(
                    seed, k, client,
                    null_patterns=null_patterns,
                    fictional_patterns=fictional_patterns,
                    timestamp=now(),
                )
                if cache is not None:
                    cache.put("probes", cache_key, {
                        "raw_response": record.raw_response,
                        "timestamp": record.timestamp,
                    })
            with lock:
                batch.records.append(record)
        except TransportError as exc:
            logger.warning("probe failed for seed=%s model=%s: %s",
                           seed.id, client.model_id, exc)
            with lock:
                batch.failures.append(ProbeFailure(seed.id, client.model_id, str(exc)))

    items = list(seeds_with_k)
    with ThreadPoolExecutor(max_workers=max(1, parallelism)) as pool:
        for _ in pool.map(lambda sk: one(*sk), items):
            pass
    batch.records.sort(key=lambda r: r.seed_id)
    batch.failures.sort(key=lambda f: f.seed_id)
    return batch
