"""Stratified cohort sampling: High and Low citation groups per field x region.

Within every (field, region) cell the citation quartile boundaries are
computed by linear interpolation between order statistics; the Low group is
drawn uniformly from authors at or below the first-quartile boundary and the
High group from authors at or above the third-quartile boundary (boundary
ties are eligible). Sampling is seeded and independent of input order, and
short cells are reported rather than padded.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

from .model import CitationGroup, FieldOfScience, Region, SeedAuthor


@dataclass(frozen=True)
class CohortConfig:
    per_cell_per_group: int = 10
    citation_floor: int = 100
    rng_seed: int = 0
    # Quartile boundaries are always computed within each field x region
    # cell, the unit the groups are compared in.
    quartile_scope: str = "per-cell"

    def __post_init__(self) -> None:
        if self.per_cell_per_group < 1:
            raise ValueError("per_cell_per_group must be >= 1")
        if self.citation_floor < 0:
            raise ValueError("citation_floor must be >= 0")


@dataclass(frozen=True)
class CellReport:
    field: FieldOfScience
    region: Region
    population: int
    high_sampled: int
    low_sampled: int
    # Shortfall of the cell population against the 2 * per-group target.
    deficit: int


@dataclass
class CohortAudit:
    cells: list[CellReport] = field(default_factory=list)
    empty_cells: list[tuple[FieldOfScience, Region]] = field(default_factory=list)

    def render(self) -> str:
        lines = ["cohort audit", "============"]
        sampled = sum(c.high_sampled + c.low_sampled for c in self.cells)
        lines.append(f"cells populated: {len(self.cells)}")
        lines.append(f"cells empty:     {len(self.empty_cells)}")
        lines.append(f"seeds sampled:   {sampled}")
        short = [c for c in self.cells if c.deficit > 0]
        if short:
            lines.append("")
            lines.append("short cells (population below 2 x per-group target):")
            for c in short:
                lines.append(
                    f"  {c.field.value} / {c.region.value}: population "
                    f"{c.population}, sampled {c.high_sampled}+{c.low_sampled}, "
                    f"deficit {c.deficit}"
                )
        if self.empty_cells:
            lines.append("")
            lines.append("empty cells:")
            for fld, region in self.empty_cells:
                lines.append(f"  {fld.value} / {region.value}")
        return "\n".join(lines) + "\n"


def quantile(sorted_values: Sequence[float], q: float) -> float:
    """Linear interpolation between order statistics at rank (n - 1) * q."""
    if not sorted_values:
        raise ValueError("quantile of empty sequence")
    if len(sorted_values) == 1:
        return float(sorted_values[0])
    pos = (len(sorted_values) - 1) * q
    lo = math.floor(pos)
    frac = pos - lo
    if frac == 0:
        return float(sorted_values[lo])
    return sorted_values[lo] + frac * (sorted_values[lo + 1] - sorted_values[lo])


def build_cohort(
    pool: Iterable[SeedAuthor], config: CohortConfig
) -> tuple[list[SeedAuthor], CohortAudit]:
    """Sample the High/Low citation groups for every field x region cell.

    Deterministic for a given pool and seed: each cell draws from its own
    RNG keyed by (rng_seed, field, region), and eligible authors are sorted
    by id before sampling, so neither pool order nor cell iteration order
    changes the result. The High group is drawn first; an author never
    appears in both groups.
    """
    cells: dict[tuple[FieldOfScience, Region], list[SeedAuthor]] = {}
    for author in pool:
        cells.setdefault((author.field, author.region), []).append(author)

    cohort: list[SeedAuthor] = []
    audit = CohortAudit()
    for fld in FieldOfScience:
        for region in Region:
            members = cells.get((fld, region))
            if not members:
                audit.empty_cells.append((fld, region))
                continue
            counts = sorted(a.citation_count for a in members)
            q1 = quantile(counts, 0.25)
            q3 = quantile(counts, 0.75)
            ordered = sorted(members, key=lambda a: a.id)
            high_pool = [a for a in ordered if a.citation_count >= q3]
            low_pool = [a for a in ordered if a.citation_count <= q1]

            rng = random.Random(f"{config.rng_seed}:{fld.value}:{region.value}")
            n = config.per_cell_per_group
            high = rng.sample(high_pool, min(n, len(high_pool)))
            taken = {a.id for a in high}
            low_pool = [a for a in low_pool if a.id not in taken]
            low = rng.sample(low_pool, min(n, len(low_pool)))

            cohort.extend(replace(a, group=CitationGroup.HIGH) for a in high)
            cohort.extend(replace(a, group=CitationGroup.LOW) for a in low)
            audit.cells.append(
                CellReport(
                    field=fld,
                    region=region,
                    population=len(members),
                    high_sampled=len(high),
                    low_sampled=len(low),
                    deficit=max(0, 2 * n - len(members)),
                )
            )
    cohort.sort(key=lambda a: a.id)
    return cohort, audit


@dataclass(frozen=True)
class DistributionSummary:
    """Five-number summary of natural-log citation counts for one facet."""

    facet: str
    facet_value: str
    n: int
    log_min: float
    log_q1: float
    log_median: float
    log_q3: float
    log_max: float


def log_citation_distribution(cohort: Sequence[SeedAuthor]) -> list[DistributionSummary]:
    """Log-transformed citation summaries per field and per region.

    Citation counts are strictly positive by the admission floor, so the
    natural log is always defined.
    """
    summaries: list[DistributionSummary] = []
    facets: list[tuple[str, dict[str, list[float]]]] = [("field", {}), ("region", {})]
    for author in cohort:
        value = math.log(author.citation_count)
        facets[0][1].setdefault(author.field.value, []).append(value)
        facets[1][1].setdefault(author.region.value, []).append(value)
    for facet_name, buckets in facets:
        for facet_value in sorted(buckets):
            logs = sorted(buckets[facet_value])
            summaries.append(
                DistributionSummary(
                    facet=facet_name,
                    facet_value=facet_value,
                    n=len(logs),
                    log_min=logs[0],
                    log_q1=quantile(logs, 0.25),
                    log_median=quantile(logs, 0.5),
                    log_q3=quantile(logs, 0.75),
                    log_max=logs[-1],
                )
            )
    return summaries
