"""Surname-level fuzzy matching between baseline and generated author lists.

Names are folded to lowercase ASCII, the surname token is extracted (keeping
common particles such as "van" or "de" attached), and similarity is the
edit distance between surnames normalized by the longer surname's length.
A baseline co-author counts as discovered when any generated name reaches
the configured similarity threshold, so discoveries can only shrink as the
threshold rises.

Known approximation: the last token of a name is taken as the surname, so
mononyms and family-name-first orderings are matched on their final token.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass
from typing import Iterable, Sequence

# Tokens absorbed into the surname when they immediately precede it.
SURNAME_PARTICLES = frozenset({"van", "de", "del", "von", "bin", "al"})

DEFAULT_EPSILON = 0.6


class EmptyName(ValueError):
    """No alphabetic content survived normalization."""


@dataclass(frozen=True)
class NormalizedName:
    original: str
    family: str
    given_tokens: tuple[str, ...]

    @property
    def reassembled(self) -> str:
        return " ".join((*self.given_tokens, self.family))


@dataclass(frozen=True)
class MatchConfig:
    """Similarity threshold for discovery; 0.5 is chance level and rejected."""

    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self) -> None:
        if not 0.5 < self.epsilon <= 1.0:
            raise ValueError(f"epsilon must be in (0.5, 1.0], got {self.epsilon}")


@dataclass(frozen=True)
class MatchPair:
    baseline_index: int
    generated_index: int
    similarity: float


@dataclass(frozen=True)
class MatchResult:
    discovered_flags: tuple[bool, ...]
    discovered_count: int
    pairs: tuple[MatchPair, ...]


# Letters NFKD leaves intact but that have a conventional ASCII form.
_TRANSLIT = str.maketrans(
    {
        "ø": "o", "Ø": "O", "đ": "d", "Đ": "D", "ł": "l", "Ł": "L",
        "ß": "ss", "æ": "ae", "Æ": "Ae", "œ": "oe", "Œ": "Oe",
        "ð": "d", "Ð": "D", "þ": "th", "Þ": "Th", "ı": "i",
    }
)


def fold(text: str) -> str:
    """Lowercase ASCII folding: NFKD-decompose, drop diacritics, turn hyphens
    into spaces, strip all other punctuation and digits, collapse whitespace.
    Scripts without an ASCII form (e.g. CJK) pass through unchanged."""
    decomposed = unicodedata.normalize("NFKD", text.translate(_TRANSLIT))
    stripped = "".join(c for c in decomposed if not unicodedata.combining(c))
    stripped = re.sub(r"[-‐‑‒–—]", " ", stripped)
    kept = []
    for ch in stripped:
        if ch.isalpha() or ch.isspace():
            kept.append(ch)
    return re.sub(r"\s+", " ", "".join(kept)).strip().lower()


def normalize_name(raw: str) -> NormalizedName:
    """Split a folded name into given tokens and a surname.

    The surname is the last token, with any immediately preceding chain of
    particles ("van", "de", ...) absorbed into it. Raises EmptyName when no
    alphabetic token remains.
    """
    tokens = fold(raw).split()
    if not tokens:
        raise EmptyName(f"no alphabetic content in {raw!r}")
    split = len(tokens) - 1
    while split > 0 and tokens[split - 1] in SURNAME_PARTICLES:
        split -= 1
    family = " ".join(tokens[split:])
    return NormalizedName(original=raw, family=family, given_tokens=tuple(tokens[:split]))


def levenshtein(a: str, b: str) -> int:
    """Minimum number of unit-cost insertions, deletions and substitutions."""
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            cost = 0 if ca == cb else 1
            current.append(min(current[j - 1] + 1, previous[j] + 1, previous[j - 1] + cost))
        previous = current
    return previous[-1]


def similarity(a: str, b: str) -> float:
    """Edit similarity in [0, 1]: 1 - distance / max length; 1.0 if both empty."""
    if not a and not b:
        return 1.0
    return 1.0 - levenshtein(a, b) / max(len(a), len(b))


def _family_or_none(raw: str) -> str | None:
    try:
        return normalize_name(raw).family
    except EmptyName:
        return None


def match_coauthors(
    baseline: Sequence[str],
    generated: Sequence[str],
    config: MatchConfig | None = None,
) -> MatchResult:
    """Decide which baseline co-authors appear in a generated name list.

    Matching is existence-based and surname-only: baseline entry i is
    discovered when some generated name's surname reaches the threshold.
    Several baseline entries may match the same generated name. For each
    discovery the highest-similarity generated index is recorded (ties go
    to the lowest index).
    """
    config = config or MatchConfig()
    generated_families = [_family_or_none(name) for name in generated]
    flags: list[bool] = []
    pairs: list[MatchPair] = []
    for i, raw in enumerate(baseline):
        family = _family_or_none(raw)
        if family is None:
            flags.append(False)
            continue
        best_j = -1
        best_sim = -1.0
        for j, other in enumerate(generated_families):
            if other is None:
                continue
            sim = similarity(family, other)
            if sim > best_sim:
                best_j, best_sim = j, sim
        if best_j >= 0 and best_sim >= config.epsilon:
            flags.append(True)
            pairs.append(MatchPair(i, best_j, best_sim))
        else:
            flags.append(False)
    return MatchResult(
        discovered_flags=tuple(flags),
        discovered_count=sum(flags),
        pairs=tuple(pairs),
    )


def dedupe_names(names: Iterable[str]) -> list[str]:
    """Drop later entries whose normalized form repeats an earlier one."""
    seen: set[str] = set()
    result: list[str] = []
    for name in names:
        try:
            key = normalize_name(name).reassembled
        except EmptyName:
            key = name.strip().casefold()
        if key not in seen:
            seen.add(key)
            result.append(name)
    return result
