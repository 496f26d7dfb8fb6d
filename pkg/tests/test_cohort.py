import math
import random

import numpy as np
import pytest

from netmem.cohort import (
    CohortConfig,
    build_cohort,
    log_citation_distribution,
    quantile,
)
from netmem.model import CitationGroup, FieldOfScience, Region, SeedAuthor


def _author(i, field, region, citations):
    return SeedAuthor(
        id=f"a{i:05d}", full_name=f"Author {i}", field=field, subfield="x",
        affiliation="aff", country="US", region=region, citation_count=citations,
    )


def _saturated_pool(per_cell=60, seed=11):
    rng = random.Random(seed)
    pool = []
    i = 0
    for field in FieldOfScience:
        for region in Region:
            for _ in range(per_cell):
                pool.append(_author(i, field, region, rng.randint(101, 100_000)))
                i += 1
    return pool


def test_quantile_matches_numpy_linear():
    rng = random.Random(3)
    for _ in range(200):
        values = sorted(rng.randint(0, 1000) for _ in range(rng.randint(1, 40)))
        for q in (0.0, 0.25, 0.5, 0.75, 1.0, rng.random()):
            assert quantile(values, q) == pytest.approx(
                float(np.percentile(values, q * 100, method="linear"))
            )


def test_full_grid_yields_1600_seeds():
    cohort, audit = build_cohort(_saturated_pool(), CohortConfig(rng_seed=7))
    assert len(cohort) == 1600
    assert not audit.empty_cells
    assert all(c.deficit == 0 for c in audit.cells)
    highs = sum(1 for a in cohort if a.group is CitationGroup.HIGH)
    assert highs == 800


def test_cohort_deterministic_across_runs():
    pool = _saturated_pool()
    reference = build_cohort(pool, CohortConfig(rng_seed=42))[0]
    for _ in range(4):
        assert build_cohort(pool, CohortConfig(rng_seed=42))[0] == reference


def test_cohort_independent_of_pool_order():
    pool = _saturated_pool()
    shuffled = list(pool)
    random.Random(1).shuffle(shuffled)
    a = build_cohort(pool, CohortConfig(rng_seed=42))[0]
    b = build_cohort(shuffled, CohortConfig(rng_seed=42))[0]
    assert a == b


def test_cohort_changes_with_seed():
    pool = _saturated_pool()
    a = build_cohort(pool, CohortConfig(rng_seed=1))[0]
    b = build_cohort(pool, CohortConfig(rng_seed=2))[0]
    assert a != b


def test_group_separation_within_every_cell():
    cohort, _ = build_cohort(_saturated_pool(seed=5), CohortConfig(rng_seed=9))
    by_cell = {}
    for author in cohort:
        by_cell.setdefault((author.field, author.region), []).append(author)
    for members in by_cell.values():
        high = [a.citation_count for a in members if a.group is CitationGroup.HIGH]
        low = [a.citation_count for a in members if a.group is CitationGroup.LOW]
        assert min(high) >= max(low)


def test_no_author_sampled_twice():
    cohort, _ = build_cohort(_saturated_pool(), CohortConfig(rng_seed=3))
    ids = [a.id for a in cohort]
    assert len(ids) == len(set(ids))


def test_quartile_eligibility_against_sort_oracle():
    # 100 authors with citations 101..200: Low drawn from the 25 lowest,
    # High from the 25 highest (quartile boundaries at 125.75 / 175.25)
    pool = [
        _author(i, FieldOfScience.BIOLOGY, Region.EUROPE, 101 + i)
        for i in range(100)
    ]
    cohort, _ = build_cohort(pool, CohortConfig(per_cell_per_group=10, rng_seed=0))
    counts = sorted(a.citation_count for a in pool)
    q1 = float(np.percentile(counts, 25))
    q3 = float(np.percentile(counts, 75))
    eligible_low = {a.id for a in pool if a.citation_count <= q1}
    eligible_high = {a.id for a in pool if a.citation_count >= q3}
    assert len(eligible_low) == len(eligible_high) == 25
    for author in cohort:
        if author.group is CitationGroup.LOW:
            assert author.id in eligible_low
        else:
            assert author.id in eligible_high


def test_short_cell_reported_with_deficit():
    pool = [
        _author(i, FieldOfScience.BIOLOGY, Region.EUROPE, 500) for i in range(3)
    ]
    cohort, audit = build_cohort(pool, CohortConfig(per_cell_per_group=10, rng_seed=0))
    cell = next(c for c in audit.cells
                if c.field is FieldOfScience.BIOLOGY and c.region is Region.EUROPE)
    assert cell.population == 3
    assert cell.deficit == 17
    assert cell.high_sampled + cell.low_sampled == len(cohort) == 3
    assert len(audit.empty_cells) == 79
    assert "deficit 17" in audit.render()


def test_empty_cells_reported_not_fatal():
    pool = [_author(0, FieldOfScience.BIOLOGY, Region.EUROPE, 500)]
    _, audit = build_cohort(pool, CohortConfig(rng_seed=0))
    assert len(audit.empty_cells) == 79


# -- log distribution ---------------------------------------------------------


def test_log_distribution_exact_logs():
    e2, e4 = round(math.e**2), round(math.e**4)
    pool = [
        _author(0, FieldOfScience.BIOLOGY, Region.EUROPE, e2),
        _author(1, FieldOfScience.BIOLOGY, Region.EUROPE, e4),
    ]
    summaries = log_citation_distribution(pool)
    by_facet = {(s.facet, s.facet_value): s for s in summaries}
    biology = by_facet[("field", "Biology")]
    assert biology.log_min == pytest.approx(math.log(e2))
    assert biology.log_max == pytest.approx(math.log(e4))
    assert biology.log_median == pytest.approx((math.log(e2) + math.log(e4)) / 2)


def test_log_distribution_degenerate_single_author():
    pool = [_author(0, FieldOfScience.BIOLOGY, Region.EUROPE, 150)]
    summary = log_citation_distribution(pool)[0]
    value = math.log(150)
    assert (
        summary.log_min == summary.log_q1 == summary.log_median
        == summary.log_q3 == summary.log_max == pytest.approx(value)
    )


def test_log_distribution_matches_independent_recomputation():
    pool = _saturated_pool(per_cell=7, seed=13)
    summaries = {
        (s.facet, s.facet_value): s for s in log_citation_distribution(pool)
    }
    # independent recomputation with numpy over the raw pool
    for field in FieldOfScience:
        logs = [math.log(a.citation_count) for a in pool if a.field is field]
        s = summaries[("field", field.value)]
        assert s.n == len(logs)
        assert s.log_q1 == pytest.approx(float(np.percentile(logs, 25)))
        assert s.log_median == pytest.approx(float(np.percentile(logs, 50)))
        assert s.log_q3 == pytest.approx(float(np.percentile(logs, 75)))
    for region in Region:
        logs = [math.log(a.citation_count) for a in pool if a.region is region]
        s = summaries[("region", region.value)]
        assert s.log_min == pytest.approx(min(logs))
        assert s.log_max == pytest.approx(max(logs))
