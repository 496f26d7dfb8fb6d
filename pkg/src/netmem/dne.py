"""Discoverable network extraction scores and their aggregation.

A score is the number of baseline co-authors recovered from one model
response divided by a baseline-dependent denominator: the Google Scholar
co-author count for the Google Scholar baseline, and the smaller of the
Google Scholar and OpenAlex counts for the OpenAlex baseline. Values are
clamped to 1.0 (the raw ratio is logged when clamping fires).
"""

from __future__ import annotations

import logging
import statistics
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Sequence

from .model import BaselineSource, CitationGroup, DNEScore, SeedAuthor
from .name_match import MatchConfig, MatchResult, match_coauthors

logger = logging.getLogger(__name__)


class MissingCount(ValueError):
    """The OpenAlex baseline needs both co-author counts."""


class ZeroDenominator(ValueError):
    """A baseline co-author count of zero cannot form a ratio."""


class UnknownSeed(KeyError):
    """A score references a seed absent from the cohort lookup."""


@dataclass(frozen=True)
class BaselineCounts:
    """Co-author counts per source; `oa_count` may be absent when only the
    Google Scholar baseline is scored."""

    gs_count: int
    oa_count: int | None = None


def _denominator(baseline: BaselineSource, counts: BaselineCounts) -> int:
    if counts.gs_count == 0:
        raise ZeroDenominator("google scholar co-author count is 0")
    if baseline is BaselineSource.GOOGLE_SCHOLAR:
        return counts.gs_count
    if counts.oa_count is None:
        raise MissingCount("openalex baseline requires oa_count")
    if counts.oa_count == 0:
        raise ZeroDenominator("openalex co-author count is 0")
    return min(counts.gs_count, counts.oa_count)


def compute_dne(
    match: MatchResult,
    baseline: BaselineSource,
    counts: BaselineCounts,
    epsilon: float,
    *,
    seed_id: str = "",
    model_id: str = "",
) -> DNEScore:
    """Score one match result against one baseline."""
    denominator = _denominator(baseline, counts)
    raw = match.discovered_count / denominator
    if raw > 1.0:
        logger.debug(
            "clamping score for seed=%s model=%s baseline=%s: raw ratio %.4f",
            seed_id, model_id, baseline.value, raw,
        )
    return DNEScore(
        seed_id=seed_id,
        model_id=model_id,
        baseline=baseline,
        epsilon=epsilon,
        discovered=match.discovered_count,
        denominator=denominator,
        value=min(1.0, raw),
    )


def threshold_sweep(
    baseline_names: Sequence[str],
    generated_names: Sequence[str],
    counts: BaselineCounts,
    baseline: BaselineSource,
    epsilons: Sequence[float],
    *,
    seed_id: str = "",
    model_id: str = "",
) -> list[DNEScore]:
    """Score the same name lists at several thresholds.

    Thresholds must be ascending and above 0.5; because matching is
    existence-based the resulting values are non-increasing.
    """
    if list(epsilons) != sorted(epsilons):
        raise ValueError("epsilons must be sorted ascending")
    scores = []
    for eps in epsilons:
        match = match_coauthors(baseline_names, generated_names, MatchConfig(eps))
        scores.append(
            compute_dne(match, baseline, counts, eps, seed_id=seed_id, model_id=model_id)
        )
    return scores


class Facet(Enum):
    OVERALL = "overall"
    BY_FIELD = "field"
    BY_REGION = "region"


@dataclass(frozen=True)
class AggregateCell:
    """Mean and sample SD of the scores falling into one reporting cell."""

    model_id: str
    baseline: BaselineSource
    epsilon: float
    facet: Facet
    facet_value: str
    group: CitationGroup | None
    n: int
    mean: float
    sd: float


def _facet_value(facet: Facet, seed: SeedAuthor) -> str:
    if facet is Facet.OVERALL:
        return "overall"
    if facet is Facet.BY_FIELD:
        return seed.field.value
    return seed.region.value


def mean_sd(values: Sequence[float]) -> tuple[float, float]:
    """Arithmetic mean and sample standard deviation (0.0 when n < 2)."""
    mean = statistics.fmean(values)
    sd = statistics.stdev(values) if len(values) > 1 else 0.0
    return mean, sd


def aggregate(
    scores: Iterable[DNEScore],
    seeds: Mapping[str, SeedAuthor],
    facet: Facet,
    split_by_group: bool = False,
) -> list[AggregateCell]:
    """Group scores into reporting cells and summarize each.

    Cells are keyed by (model, baseline, epsilon, facet value) and, when
    `split_by_group` is set, additionally by the seed's citation group.
    Empty cells are omitted. Raises UnknownSeed when a score's seed is not
    in the lookup.
    """
    buckets: dict[tuple, list[float]] = {}
    for score in scores:
        seed = seeds.get(score.seed_id)
        if seed is None:
            raise UnknownSeed(score.seed_id)
        group = seed.group if split_by_group else None
        key = (score.model_id, score.baseline, score.epsilon,
               _facet_value(facet, seed), group)
        buckets.setdefault(key, []).append(score.value)

    cells = []
    for key in sorted(buckets, key=lambda k: (k[0], k[1].value, k[2], k[3],
                                              k[4].value if k[4] else "")):
        model_id, baseline, epsilon, facet_value, group = key
        values = buckets[key]
        mean, sd = mean_sd(values)
        cells.append(
            AggregateCell(
                model_id=model_id,
                baseline=baseline,
                epsilon=epsilon,
                facet=facet,
                facet_value=facet_value,
                group=group,
                n=len(values),
                mean=mean,
                sd=sd,
            )
        )
    return cells
