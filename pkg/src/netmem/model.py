"""Shared domain types for the co-authorship memorization audit.

Everything here is an immutable value record; instances are safe to share
across threads and to serialize/deserialize without surprises.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping


class FieldOfScience(Enum):
    AGRICULTURE_FISHERIES_FORESTRY = "Agriculture, Fisheries & Forestry"
    BUILT_ENVIRONMENT_DESIGN = "Built Environment & Design"
    ENGINEERING = "Engineering"
    INFORMATION_COMMUNICATION_TECHNOLOGIES = "Information & Communication Technologies"
    ECONOMICS_BUSINESS = "Economics & Business"
    CLINICAL_MEDICINE = "Clinical Medicine"
    BIOLOGY = "Biology"
    EARTH_ENVIRONMENTAL_SCIENCES = "Earth & Environmental Sciences"
    MATHEMATICS_STATISTICS = "Mathematics & Statistics"
    PHYSICS_ASTRONOMY = "Physics & Astronomy"


class Region(Enum):
    NORTH_AMERICA = "North America"
    SOUTH_CENTRAL_AMERICA = "South/Central America"
    EUROPE = "Europe"
    NORTH_AFRICA = "North Africa"
    SUB_SAHARAN_AFRICA = "Sub-Saharan Africa"
    MIDDLE_EAST = "Middle East"
    EAST_SOUTHEAST_ASIA = "East/Southeast Asia"
    OCEANIC = "Oceanic"


class CitationGroup(Enum):
    HIGH = "high"
    LOW = "low"


class BaselineSource(Enum):
    OPENALEX = "openalex"
    GOOGLE_SCHOLAR = "google-scholar"


class ResponseClass(Enum):
    VALID = "valid"
    FICTIONAL = "fictional"
    NULL = "null"


class SeedValidationError(ValueError):
    """A candidate record violated an admission rule; `rule` names it."""

    rule = "invalid"


class CitationTooLow(SeedValidationError):
    rule = "citation_too_low"


class UnknownSubfield(SeedValidationError):
    rule = "unknown_subfield"


class UnknownCountry(SeedValidationError):
    rule = "unknown_country"


@dataclass(frozen=True)
class SeedAuthor:
    """A researcher admitted to the audit pool.

    `group` is None until cohort sampling assigns High/Low labels.
    """

    id: str
    full_name: str
    field: FieldOfScience
    subfield: str
    affiliation: str
    country: str
    region: Region
    citation_count: int
    group: CitationGroup | None = None


@dataclass(frozen=True)
class CoAuthorNetwork:
    """First-degree co-author names of one seed from one baseline source."""

    seed_id: str
    source: BaselineSource
    coauthors: tuple[str, ...]
    retrieved_at: str | None = None


@dataclass(frozen=True)
class ProbeRecord:
    """One model query: the prompt sent, what came back, and how it parsed."""

    seed_id: str
    model_id: str
    prompt: str
    raw_response: str
    classification: ResponseClass
    generated_names: tuple[str, ...]
    timestamp: str

    def __post_init__(self) -> None:
        if self.classification is ResponseClass.VALID and not self.generated_names:
            raise ValueError("a valid probe must carry at least one generated name")


@dataclass(frozen=True)
class DNEScore:
    """Discoverable network extraction for one (seed, model, baseline, epsilon)."""

    seed_id: str
    model_id: str
    baseline: BaselineSource
    epsilon: float
    discovered: int
    denominator: int
    value: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.value <= 1.0:
            raise ValueError(f"score value {self.value} outside [0, 1]")
        if self.discovered < 0 or self.denominator < 1:
            raise ValueError("discovered must be >= 0 and denominator >= 1")


@dataclass(frozen=True)
class SampleSummary:
    n: int
    mean: float
    sd: float


_STAR_LEVELS = ("ns", "*", "**", "***")


def stars_for_p(p: float) -> str:
    """Significance coding: *** p<0.001, ** p<0.01, * p<0.05, ns otherwise."""
    if p < 0.001:
        return "***"
    if p < 0.01:
        return "**"
    if p < 0.05:
        return "*"
    return "ns"


@dataclass(frozen=True)
class TestResult:
    """One-sided two-sample comparison of High vs Low score samples."""

    __test__ = False  # not a pytest class

    group_high: SampleSummary
    group_low: SampleSummary
    t_stat: float
    p_value: float
    stars: str = field(default="")

    def __post_init__(self) -> None:
        if self.stars == "":
            object.__setattr__(self, "stars", stars_for_p(self.p_value))
        elif self.stars not in _STAR_LEVELS:
            raise ValueError(f"unknown star level {self.stars!r}")


def seed_id_for(full_name: str, affiliation: str) -> str:
    """Stable opaque identifier derived from name and affiliation."""
    from .name_match import fold

    key = f"{fold(full_name)}|{affiliation.strip().casefold()}"
    return hashlib.sha256(key.encode("utf-8")).hexdigest()[:16]


def validate_seed(
    record: Mapping[str, object], *, citation_floor: int = 100
) -> SeedAuthor:
    """Admit a raw candidate record into the pool, or reject it.

    Rules are checked in a fixed order (citations, then subfield, then
    country) and the first violation is raised. Citation admission is a
    strict inequality: exactly `citation_floor` citations is rejected.
    """
    from . import taxonomy

    def text(key: str, *aliases: str) -> str:
        for k in (key, *aliases):
            value = record.get(k)
            if value is not None and str(value).strip():
                return str(value).strip()
        raise SeedValidationError(f"missing field {key!r}")

    full_name = text("full_name", "name")
    subfield = text("subfield")
    affiliation = str(record.get("affiliation", "") or "").strip()

    raw_citations = record.get("citation_count", record.get("citations"))
    if raw_citations is None:
        raise SeedValidationError("missing field 'citation_count'")
    try:
        citations = int(raw_citations)
    except (TypeError, ValueError):
        raise SeedValidationError(f"citation_count {raw_citations!r} is not an integer")
    if citations <= citation_floor:
        raise CitationTooLow(
            f"citation count {citations} not above the {citation_floor} floor"
        )

    field_of_science = taxonomy.field_for_subfield(subfield)
    if field_of_science is None:
        raise UnknownSubfield(f"subfield {subfield!r} is not in the taxonomy")

    country = text("country").upper()
    region = taxonomy.region_for_country(country)
    if region is None:
        raise UnknownCountry(f"no region mapping for country {country!r}")

    raw_group = record.get("group")
    group = CitationGroup(str(raw_group)) if raw_group else None

    seed_id = str(record.get("id") or "").strip() or seed_id_for(full_name, affiliation)
    return SeedAuthor(
        id=seed_id,
        full_name=full_name,
        field=field_of_science,
        subfield=subfield,
        affiliation=affiliation,
        country=country,
        region=region,
        citation_count=citations,
        group=group,
    )
