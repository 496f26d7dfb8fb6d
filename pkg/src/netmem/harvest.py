"""Baseline co-authorship collection from bibliographic sources.

Two sources feed the audit: OpenAlex through its public HTTP interface, and
Google Scholar through an operator-supplied export file (Scholar has no
official API; a scraping adapter can be plugged in where that is acceptable).
Every live fetch lands in an on-disk cache before use, so reruns over a warm
cache touch the network zero times and reproduce byte-identical documents.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import re
import tempfile
import threading
import time
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable, Sequence

import requests

from .model import BaselineSource, CoAuthorNetwork, Region, SeedAuthor
from .name_match import dedupe_names, fold, similarity
from .taxonomy import (
    country_for_affiliation,
    country_for_email_domain,
    region_for_country,
)

logger = logging.getLogger(__name__)

PROFILE_NAME_SIMILARITY = 0.9

# Tokens too generic to count as affiliation evidence on their own.
GENERIC_AFFILIATION_TOKENS = frozenset(
    "university institute institution college school department faculty "
    "center centre laboratory lab national state federal royal technical "
    "technology sciences science research academy hospital medical "
    "of the and for de la el at in".split()
)


class NoProfileFound(LookupError):
    """The source returned no acceptable profile for the seed."""


class AmbiguousProfile(LookupError):
    """Two or more candidate profiles passed verification; needs a manual
    override entry pinning the right one."""


class RateLimited(RuntimeError):
    """The source kept throttling after backoff retries."""


class Unresolvable(LookupError):
    """No country could be determined for the seed."""


class TokenBucket:
    """Thread-safe token bucket; `acquire` blocks until a token is free."""

    def __init__(self, per_second: float, capacity: float = 1.0) -> None:
        self.per_second = per_second
        self.capacity = capacity
        self._tokens = capacity
        self._last = time.monotonic()
        self._lock = threading.Lock()

    def acquire(self) -> None:
        while True:
            with self._lock:
                now = time.monotonic()
                self._tokens = min(
                    self.capacity, self._tokens + (now - self._last) * self.per_second
                )
                self._last = now
                if self._tokens >= 1.0:
                    self._tokens -= 1.0
                    return
                wait = (1.0 - self._tokens) / self.per_second
            time.sleep(wait)


class JsonCache:
    """One JSON document per key, written atomically (temp file + rename)."""

    def __init__(self, root: str | Path) -> None:
        self.root = Path(root)

    def _path(self, namespace: str, key: str) -> Path:
        digest = hashlib.sha256(key.encode("utf-8")).hexdigest()[:32]
        return self.root / namespace / f"{digest}.json"

    def get(self, namespace: str, key: str) -> dict | None:
        path = self._path(namespace, key)
        if not path.exists():
            return None
        return json.loads(path.read_text(encoding="utf-8"))

    def put(self, namespace: str, key: str, doc: dict) -> None:
        path = self._path(namespace, key)
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as handle:
                json.dump(doc, handle, sort_keys=True, ensure_ascii=False)
                handle.write("\n")
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise


@dataclass(frozen=True)
class CandidateProfile:
    profile_id: str
    name: str
    affiliation: str
    fields: tuple[str, ...]


class Verdict(Enum):
    ACCEPTED = "accepted"
    REJECTED = "rejected"


@dataclass(frozen=True)
class ProfileMatch:
    candidate: CandidateProfile
    verdict: Verdict
    reasons: tuple[str, ...]


def _evidence_tokens(text: str) -> set[str]:
    return {
        tok
        for tok in fold(text).split()
        if len(tok) > 2 and tok not in GENERIC_AFFILIATION_TOKENS
    }


def verify_profile(seed: SeedAuthor, candidate: CandidateProfile) -> ProfileMatch:
    """Check that a candidate profile is the seed author.

    Accepts when the names are near-identical (similarity >= 0.9 on folded
    full names) and either the affiliations share a non-generic token or the
    fields of interest overlap. Every failed or weak check is listed in
    `reasons`.
    """
    reasons: list[str] = []
    name_sim = similarity(fold(seed.full_name), fold(candidate.name))
    name_ok = name_sim >= PROFILE_NAME_SIMILARITY
    if not name_ok:
        reasons.append(f"name similarity {name_sim:.2f} below {PROFILE_NAME_SIMILARITY}")

    seed_tokens = _evidence_tokens(seed.affiliation)
    cand_tokens = _evidence_tokens(candidate.affiliation)
    shared = seed_tokens & cand_tokens
    affiliation_ok = bool(shared)
    if not affiliation_ok:
        reasons.append("no affiliation token overlap")
    elif len(shared) == 1:
        reasons.append(f"weak affiliation evidence: only {next(iter(shared))!r} shared")

    seed_fields = {fold(seed.subfield), fold(seed.field.value)}
    cand_fields = {fold(f) for f in candidate.fields}
    field_tokens = {t for f in cand_fields for t in f.split()}
    fields_ok = bool(cand_fields & seed_fields) or bool(
        {t for f in seed_fields for t in f.split()}
        & field_tokens
        - GENERIC_AFFILIATION_TOKENS
    )
    if not fields_ok:
        reasons.append("no field-of-interest overlap")

    accepted = name_ok and (affiliation_ok or fields_ok)
    return ProfileMatch(
        candidate=candidate,
        verdict=Verdict.ACCEPTED if accepted else Verdict.REJECTED,
        reasons=tuple(reasons),
    )


def resolve_region(
    affiliation: str,
    email_domain: str,
    country_override: str | None = None,
) -> tuple[str, Region]:
    """Determine (country, region) for a seed.

    Resolution order: explicit override, then the email ccTLD, then known
    location keywords in the affiliation text. Raises Unresolvable when
    nothing matches; such seeds are quarantined for a manual override entry.
    """
    if country_override:
        code = country_override.strip().upper()
        region = region_for_country(code)
        if region is None:
            raise Unresolvable(f"override country {code!r} has no region mapping")
        return code, region
    if email_domain.strip():
        code = country_for_email_domain(email_domain)
        if code is not None:
            region = region_for_country(code)
            if region is not None:
                return code, region
    if affiliation.strip():
        code = country_for_affiliation(affiliation)
        if code is not None:
            region = region_for_country(code)
            if region is not None:
                return code, region
    raise Unresolvable(
        f"cannot determine country from affiliation={affiliation!r} "
        f"email_domain={email_domain!r}"
    )


class OpenAlexClient:
    """Cached, rate-limited client for the public OpenAlex query interface.

    Identification follows the polite-usage convention: the configured
    mailto address is sent in the User-Agent header. 429/5xx responses are
    retried with exponential backoff, then surface as RateLimited.
    """

    def __init__(
        self,
        cache: JsonCache,
        base_url: str = "https://api.openalex.org",
        mailto: str | None = None,
        rate_limit_per_s: float = 5.0,
        max_retries: int = 4,
        session: requests.Session | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ) -> None:
        self.cache = cache
        self.base_url = base_url.rstrip("/")
        self.mailto = mailto
        self.max_retries = max_retries
        self._bucket = TokenBucket(rate_limit_per_s)
        self._session = session or requests.Session()
        self._sleep = sleep

    def _headers(self) -> dict[str, str]:
        agent = "netmem/0.1"
        if self.mailto:
            agent += f" (mailto:{self.mailto})"
        return {"User-Agent": agent}

    def _fetch(self, path: str, params: dict[str, str]) -> dict:
        key = path + "?" + "&".join(f"{k}={v}" for k, v in sorted(params.items()))
        cached = self.cache.get("openalex", key)
        if cached is not None:
            return cached
        last_status = None
        for attempt in range(self.max_retries + 1):
            if attempt:
                self._sleep(min(30.0, 0.5 * 2 ** (attempt - 1)))
            self._bucket.acquire()
            response = self._session.get(
                f"{self.base_url}{path}", params=params,
                headers=self._headers(), timeout=60,
            )
            if response.status_code == 200:
                doc = response.json()
                self.cache.put("openalex", key, doc)
                return doc
            last_status = response.status_code
            if response.status_code not in (429, 500, 502, 503, 504):
                response.raise_for_status()
        raise RateLimited(f"openalex kept failing with status {last_status}")

    def author_candidates(self, name: str) -> list[CandidateProfile]:
        doc = self._fetch("/authors", {"search": name, "per-page": "25"})
        candidates = []
        for item in doc.get("results", []):
            institutions = item.get("last_known_institutions") or []
            affiliation = "; ".join(
                inst.get("display_name", "") for inst in institutions
            )
            topic_names = [
                t.get("display_name", "")
                for t in (item.get("topics") or item.get("x_concepts") or [])
            ]
            candidates.append(
                CandidateProfile(
                    profile_id=str(item.get("id", "")),
                    name=str(item.get("display_name", "")),
                    affiliation=affiliation,
                    fields=tuple(filter(None, topic_names)),
                )
            )
        return candidates

    def coauthor_names(self, profile_id: str) -> list[str]:
        """All co-author display names across the profile's works."""
        names: list[str] = []
        cursor = "*"
        short_id = profile_id.rsplit("/", 1)[-1]
        while cursor:
            doc = self._fetch(
                "/works",
                {
                    "filter": f"author.id:{short_id}",
                    "per-page": "200",
                    "cursor": cursor,
                },
            )
            for work in doc.get("results", []):
                for authorship in work.get("authorships", []):
                    author = authorship.get("author") or {}
                    author_id = str(author.get("id", ""))
                    if author_id.rsplit("/", 1)[-1] == short_id:
                        continue
                    display = author.get("display_name")
                    if display:
                        names.append(str(display))
            cursor = (doc.get("meta") or {}).get("next_cursor")
        return dedupe_names(names)


class ScholarExport:
    """Google Scholar networks from an operator-provided JSONL export.

    Each line: {"seed_id": str, "coauthors": [str, ...],
    "retrieved_at": str?}. This is the lawful-by-default adapter; see
    ScrapingScholarSource for the optional live alternative.
    """

    def __init__(self, path: str | Path) -> None:
        self._networks: dict[str, tuple[list[str], str | None]] = {}
        text = Path(path).read_text(encoding="utf-8")
        for line in text.splitlines():
            if not line.strip():
                continue
            doc = json.loads(line)
            self._networks[str(doc["seed_id"])] = (
                [str(n) for n in doc.get("coauthors", [])],
                doc.get("retrieved_at"),
            )

    def fetch(self, seed: SeedAuthor) -> tuple[list[str], str | None]:
        if seed.id not in self._networks:
            raise NoProfileFound(f"no scholar export entry for seed {seed.id}")
        return self._networks[seed.id]


class ScrapingScholarSource:
    """Optional live Scholar adapter backed by the `scholarly` package.

    Kept out of the default path: scraping is rate-fragile and not
    acceptable in every deployment. Requires `pip install scholarly`.
    """

    def __init__(self, cache: JsonCache) -> None:
        try:
            from scholarly import scholarly  # noqa: F401
        except ImportError as exc:
            raise RuntimeError(
                "the scraping adapter needs the optional 'scholarly' package"
            ) from exc
        self.cache = cache
        self._scholarly = scholarly

    def fetch(self, seed: SeedAuthor) -> tuple[list[str], str | None]:
        cached = self.cache.get("scholar", seed.id)
        if cached is None:
            query = self._scholarly.search_author(seed.full_name)
            try:
                profile = self._scholarly.fill(next(query), sections=["coauthors"])
            except StopIteration:
                raise NoProfileFound(f"no scholar profile for {seed.full_name!r}")
            cached = {
                "coauthors": [c["name"] for c in profile.get("coauthors", [])],
                "retrieved_at": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
            }
            self.cache.put("scholar", seed.id, cached)
        return list(cached["coauthors"]), cached.get("retrieved_at")


@dataclass
class Overrides:
    """Manual resolution entries keyed by seed id."""

    countries: dict[str, str] = field(default_factory=dict)
    openalex_ids: dict[str, str] = field(default_factory=dict)

    @classmethod
    def load(cls, path: str | Path | None) -> "Overrides":
        if path is None or not Path(path).exists():
            return cls()
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        countries = {}
        openalex_ids = {}
        for seed_id, entry in doc.items():
            if "country" in entry:
                countries[str(seed_id)] = str(entry["country"])
            if "openalex_id" in entry:
                openalex_ids[str(seed_id)] = str(entry["openalex_id"])
        return cls(countries=countries, openalex_ids=openalex_ids)


class Harvester:
    """Fetches one seed's co-author network from a baseline source."""

    def __init__(
        self,
        openalex: OpenAlexClient | None = None,
        scholar: ScholarExport | ScrapingScholarSource | None = None,
        overrides: Overrides | None = None,
        clock: Callable[[], str] | None = None,
    ) -> None:
        self.openalex = openalex
        self.scholar = scholar
        self.overrides = overrides or Overrides()
        self._clock = clock or (
            lambda: time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
        )

    def fetch_coauthors(
        self, seed: SeedAuthor, source: BaselineSource
    ) -> CoAuthorNetwork:
        """Deduplicated first-degree co-authors of a verified profile.

        OpenAlex candidates are verified by affiliation and field overlap;
        zero accepted profiles raises NoProfileFound (the seed is excluded
        downstream), two or more raises AmbiguousProfile unless an override
        pins the profile id.
        """
        if source is BaselineSource.GOOGLE_SCHOLAR:
            if self.scholar is None:
                raise NoProfileFound("no google scholar source configured")
            names, retrieved_at = self.scholar.fetch(seed)
            return CoAuthorNetwork(
                seed_id=seed.id,
                source=source,
                coauthors=tuple(dedupe_names(names)),
                retrieved_at=retrieved_at or self._clock(),
            )

        if self.openalex is None:
            raise NoProfileFound("no openalex client configured")
        network_doc = self.openalex.cache.get("openalex_networks", seed.id)
        if network_doc is None:
            profile_id = self._resolve_openalex_profile(seed)
            names = self.openalex.coauthor_names(profile_id)
            network_doc = {
                "profile_id": profile_id,
                "coauthors": names,
                "retrieved_at": self._clock(),
            }
            self.openalex.cache.put("openalex_networks", seed.id, network_doc)
        return CoAuthorNetwork(
            seed_id=seed.id,
            source=source,
            coauthors=tuple(network_doc["coauthors"]),
            retrieved_at=network_doc.get("retrieved_at"),
        )

    def _resolve_openalex_profile(self, seed: SeedAuthor) -> str:
        pinned = self.overrides.openalex_ids.get(seed.id)
        if pinned:
            return pinned
        candidates = self.openalex.author_candidates(seed.full_name)
        if not candidates:
            raise NoProfileFound(f"openalex returned no results for {seed.full_name!r}")
        accepted = [
            m.candidate
            for m in (verify_profile(seed, c) for c in candidates)
            if m.verdict is Verdict.ACCEPTED
        ]
        if not accepted:
            raise NoProfileFound(
                f"no openalex candidate verified for {seed.full_name!r}"
            )
        if len(accepted) > 1:
            ids = ", ".join(c.profile_id for c in accepted)
            raise AmbiguousProfile(
                f"{len(accepted)} verified profiles for {seed.full_name!r}: {ids}; "
                "pin one via the overrides file"
            )
        return accepted[0].profile_id
