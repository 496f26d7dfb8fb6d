"""Hypothesis tests over score samples and the report-facing emitters.

The comparison is a one-sided two-sample t-test with unequal variances
(Welch), alternative: mean(High) > mean(Low). Tables mirror the grouped-by-
baseline presentation with two-decimal cells and star-coded p-values; plot
emitters produce delimiter-separated series, never rendered charts.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from scipy.stats import t as t_dist

from .cohort import DistributionSummary, log_citation_distribution
from .dne import Facet, mean_sd
from .model import (
    BaselineSource,
    CitationGroup,
    DNEScore,
    SampleSummary,
    SeedAuthor,
    TestResult,
    stars_for_p,
)

ALTERNATIVE = "mean(high) > mean(low)"

_BASELINE_LABELS = {
    BaselineSource.OPENALEX: "OpenAlex",
    BaselineSource.GOOGLE_SCHOLAR: "Google Scholar",
}


class InsufficientSample(ValueError):
    """Fewer than two observations on a side of the comparison."""


def welch_t_test(high: Sequence[float], low: Sequence[float]) -> TestResult:
    """Unequal-variance two-sample t-test, one-sided for mean(high) > mean(low).

    Degrees of freedom follow the Welch-Satterthwaite approximation. When
    both samples have zero variance the statistic is 0 for equal means
    (p = 0.5) and signed infinity otherwise.
    """
    if len(high) < 2 or len(low) < 2:
        raise InsufficientSample(
            f"need n >= 2 per group, got high={len(high)} low={len(low)}"
        )
    mean_h, sd_h = mean_sd(high)
    mean_l, sd_l = mean_sd(low)
    var_h = sd_h**2
    var_l = sd_l**2
    n_h, n_l = len(high), len(low)
    se2 = var_h / n_h + var_l / n_l
    diff = mean_h - mean_l
    if se2 == 0.0:
        t_stat = 0.0 if diff == 0.0 else math.copysign(math.inf, diff)
        df = float(n_h + n_l - 2)
    else:
        t_stat = diff / math.sqrt(se2)
        df = se2**2 / (
            (var_h / n_h) ** 2 / (n_h - 1) + (var_l / n_l) ** 2 / (n_l - 1)
        )
    if math.isinf(t_stat):
        p = 0.0 if t_stat > 0 else 1.0
    else:
        p = float(t_dist.sf(t_stat, df))
    return TestResult(
        group_high=SampleSummary(n=n_h, mean=mean_h, sd=sd_h),
        group_low=SampleSummary(n=n_l, mean=mean_l, sd=sd_l),
        t_stat=t_stat,
        p_value=p,
        stars=stars_for_p(p),
    )


@dataclass(frozen=True)
class TestSpec:
    __test__ = False  # not a pytest class

    model_id: str
    baseline: BaselineSource
    epsilon: float
    facet: Facet
    facet_value: str | None = None

    def key(self) -> tuple:
        return (
            self.epsilon,
            self.model_id,
            self.baseline.value,
            self.facet.value,
            self.facet_value or "",
        )


@dataclass(frozen=True)
class AnalysisRow:
    spec: TestSpec
    result: TestResult | None
    overall: SampleSummary | None
    error: str | None = None


@dataclass
class AnalysisBundle:
    rows: list[AnalysisRow]

    def models(self) -> list[str]:
        return sorted({r.spec.model_id for r in self.rows})

    def baselines(self) -> list[BaselineSource]:
        present = {r.spec.baseline for r in self.rows}
        return [b for b in (BaselineSource.OPENALEX, BaselineSource.GOOGLE_SCHOLAR)
                if b in present]

    def epsilons(self) -> list[float]:
        return sorted({r.spec.epsilon for r in self.rows})

    def to_json(self) -> str:
        payload = []
        for row in self.rows:
            entry: dict = {
                "model_id": row.spec.model_id,
                "baseline": row.spec.baseline.value,
                "epsilon": row.spec.epsilon,
                "facet": row.spec.facet.value,
                "facet_value": row.spec.facet_value,
                "error": row.error,
            }
            if row.result is not None:
                entry["result"] = {
                    "n_high": row.result.group_high.n,
                    "mean_high": row.result.group_high.mean,
                    "sd_high": row.result.group_high.sd,
                    "n_low": row.result.group_low.n,
                    "mean_low": row.result.group_low.mean,
                    "sd_low": row.result.group_low.sd,
                    "t_stat": row.result.t_stat,
                    "p_value": row.result.p_value,
                    "stars": row.result.stars,
                }
            if row.overall is not None:
                entry["overall"] = {
                    "n": row.overall.n,
                    "mean": row.overall.mean,
                    "sd": row.overall.sd,
                }
            payload.append(entry)
        return json.dumps(payload, sort_keys=True, indent=1) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "AnalysisBundle":
        rows = []
        for entry in json.loads(text):
            spec = TestSpec(
                model_id=entry["model_id"],
                baseline=BaselineSource(entry["baseline"]),
                epsilon=entry["epsilon"],
                facet=Facet(entry["facet"]),
                facet_value=entry["facet_value"],
            )
            result = None
            if "result" in entry:
                r = entry["result"]
                result = TestResult(
                    group_high=SampleSummary(r["n_high"], r["mean_high"], r["sd_high"]),
                    group_low=SampleSummary(r["n_low"], r["mean_low"], r["sd_low"]),
                    t_stat=r["t_stat"],
                    p_value=r["p_value"],
                    stars=r["stars"],
                )
            overall = None
            if "overall" in entry:
                o = entry["overall"]
                overall = SampleSummary(o["n"], o["mean"], o["sd"])
            rows.append(AnalysisRow(spec=spec, result=result,
                                    overall=overall, error=entry.get("error")))
        return cls(rows=rows)


def default_specs(
    models: Sequence[str],
    baselines: Sequence[BaselineSource],
    epsilons: Sequence[float],
) -> list[TestSpec]:
    """Overall plus one per-field and one per-region spec per combination."""
    from .model import FieldOfScience, Region

    specs = []
    for model in models:
        for baseline in baselines:
            for eps in epsilons:
                specs.append(TestSpec(model, baseline, eps, Facet.OVERALL))
                for fld in FieldOfScience:
                    specs.append(
                        TestSpec(model, baseline, eps, Facet.BY_FIELD, fld.value)
                    )
                for region in Region:
                    specs.append(
                        TestSpec(model, baseline, eps, Facet.BY_REGION, region.value)
                    )
    return specs


def _spec_selects(spec: TestSpec, seed: SeedAuthor) -> bool:
    if spec.facet is Facet.OVERALL:
        return True
    if spec.facet is Facet.BY_FIELD:
        return seed.field.value == spec.facet_value
    return seed.region.value == spec.facet_value


def run_analysis(
    scores: Sequence[DNEScore],
    cohort: Mapping[str, SeedAuthor],
    specs: Sequence[TestSpec],
) -> AnalysisBundle:
    """Evaluate every spec; a spec that cannot run is reported, not fatal."""
    rows = []
    for spec in sorted(specs, key=TestSpec.key):
        high: list[float] = []
        low: list[float] = []
        combined: list[float] = []
        for score in scores:
            if (
                score.model_id != spec.model_id
                or score.baseline is not spec.baseline
                or score.epsilon != spec.epsilon
            ):
                continue
            seed = cohort.get(score.seed_id)
            if seed is None or not _spec_selects(spec, seed):
                continue
            combined.append(score.value)
            if seed.group is CitationGroup.HIGH:
                high.append(score.value)
            elif seed.group is CitationGroup.LOW:
                low.append(score.value)
        overall = None
        if combined:
            mean, sd = mean_sd(combined)
            overall = SampleSummary(n=len(combined), mean=mean, sd=sd)
        try:
            result = welch_t_test(high, low)
            rows.append(AnalysisRow(spec=spec, result=result, overall=overall))
        except InsufficientSample as exc:
            rows.append(
                AnalysisRow(spec=spec, result=None, overall=overall, error=str(exc))
            )
    return AnalysisBundle(rows=rows)


@dataclass(frozen=True)
class TableDocument:
    epsilon: float
    csv_text: str
    text: str


def _fmt(value: float) -> str:
    return f"{value:.2f}"


def _table_cells(row: AnalysisRow) -> tuple[str, str, str, str, str]:
    if row.result is None:
        high = low = t_stat = p_val = "-"
    else:
        high = _fmt(row.result.group_high.mean)
        low = _fmt(row.result.group_low.mean)
        t_stat = _fmt(row.result.t_stat)
        p_val = row.result.stars
    overall = (
        f"{_fmt(row.overall.mean)} ({_fmt(row.overall.sd)})"
        if row.overall is not None
        else "-"
    )
    return high, low, t_stat, p_val, overall


def _render_block(title: str, header: list[str], rows: list[list[str]]) -> list[str]:
    widths = [
        max(len(header[i]), *(len(r[i]) for r in rows)) if rows else len(header[i])
        for i in range(len(header))
    ]
    lines = [title]
    lines.append("  ".join(h.ljust(widths[i]) for i, h in enumerate(header)).rstrip())
    for row in rows:
        lines.append("  ".join(c.ljust(widths[i]) for i, c in enumerate(row)).rstrip())
    return lines


def emit_tables(bundle: AnalysisBundle) -> list[TableDocument]:
    """One table per threshold, ascending, mirroring the per-baseline layout:
    DNE_High, DNE_Low, T-Stat, star-coded P-Val, and Overall mean (±SD)."""
    documents = []
    overall_rows = [r for r in bundle.rows if r.spec.facet is Facet.OVERALL]
    for eps in bundle.epsilons():
        eps_rows = [r for r in overall_rows if r.spec.epsilon == eps]
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(
            ["model", "baseline", "epsilon", "dne_high", "dne_low",
             "t_stat", "p_val", "overall"]
        )
        text_sections: list[str] = [f"DNE results at epsilon = {eps:g}"]
        for baseline in bundle.baselines():
            header = ["Model", "DNE_High", "DNE_Low", "T-Stat", "P-Val", "Overall (±SD)"]
            table_rows = []
            for model in bundle.models():
                row = next(
                    (r for r in eps_rows
                     if r.spec.model_id == model and r.spec.baseline is baseline),
                    None,
                )
                if row is None:
                    continue
                cells = _table_cells(row)
                writer.writerow([model, baseline.value, f"{eps:g}", *cells])
                table_rows.append([model, *cells])
            if table_rows:
                text_sections.append("")
                text_sections.extend(
                    _render_block(
                        f"Baseline: {_BASELINE_LABELS[baseline]}", header, table_rows
                    )
                )
        documents.append(
            TableDocument(
                epsilon=eps,
                csv_text=buffer.getvalue(),
                text="\n".join(text_sections) + "\n",
            )
        )
    return documents


class PlotKind:
    RADAR = "radar"
    GROUPED_BAR = "grouped-bar"
    VIOLIN = "violin"


@dataclass(frozen=True)
class PlotData:
    kind: str
    header: tuple[str, ...]
    rows: list[tuple]

    @property
    def csv_text(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(self.header)
        for row in self.rows:
            writer.writerow(row)
        return buffer.getvalue()


def emit_plot_data(
    bundle: AnalysisBundle,
    kind: str,
    cohort: Sequence[SeedAuthor] | None = None,
) -> PlotData:
    """Tabular series backing the figures.

    radar: per-facet High/Low means with star annotations; grouped-bar:
    per-facet overall means per model and baseline; violin: log-citation
    five-number summaries straight from the cohort distribution.
    """
    if kind == PlotKind.RADAR:
        rows = []
        for row in bundle.rows:
            if row.spec.facet is Facet.OVERALL:
                continue
            mean_high = repr(row.result.group_high.mean) if row.result else ""
            mean_low = repr(row.result.group_low.mean) if row.result else ""
            stars = row.result.stars if row.result else ""
            rows.append(
                (row.spec.model_id, row.spec.baseline.value, f"{row.spec.epsilon:g}",
                 row.spec.facet.value, row.spec.facet_value,
                 mean_high, mean_low, stars)
            )
        return PlotData(
            kind=kind,
            header=("model", "baseline", "epsilon", "facet", "facet_value",
                    "mean_high", "mean_low", "stars"),
            rows=rows,
        )
    if kind == PlotKind.GROUPED_BAR:
        rows = []
        for row in bundle.rows:
            if row.spec.facet is Facet.OVERALL or row.overall is None:
                continue
            rows.append(
                (row.spec.model_id, row.spec.baseline.value, f"{row.spec.epsilon:g}",
                 row.spec.facet.value, row.spec.facet_value, repr(row.overall.mean))
            )
        return PlotData(
            kind=kind,
            header=("model", "baseline", "epsilon", "facet", "facet_value", "mean"),
            rows=rows,
        )
    if kind == PlotKind.VIOLIN:
        if cohort is None:
            raise ValueError("violin plot data needs the cohort's citation counts")
        rows = [
            (s.facet, s.facet_value, s.n, repr(s.log_min), repr(s.log_q1),
             repr(s.log_median), repr(s.log_q3), repr(s.log_max))
            for s in log_citation_distribution(cohort)
        ]
        return PlotData(
            kind=kind,
            header=("facet", "facet_value", "n", "log_min", "log_q1",
                    "log_median", "log_q3", "log_max"),
            rows=rows,
        )
    raise ValueError(f"unknown plot kind {kind!r}")


__all__ = [
    "ALTERNATIVE",
    "AnalysisBundle",
    "AnalysisRow",
    "DistributionSummary",
    "InsufficientSample",
    "PlotData",
    "PlotKind",
    "TableDocument",
    "TestSpec",
    "default_specs",
    "emit_plot_data",
    "emit_tables",
    "run_analysis",
    "welch_t_test",
]
