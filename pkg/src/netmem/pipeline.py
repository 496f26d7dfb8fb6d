"""Resumable staged pipeline: cohort -> harvest -> probe -> score -> analyze
-> report.

Every stage writes schema-stable files into the output directory and records
an input signature in the run manifest. Rerunning a stage whose signature is
unchanged is a no-op; running a stage whose upstream was produced under a
different configuration fails with StaleInput instead of silently mixing
runs. All intermediate files are deterministic byte-for-byte given the same
inputs, cache and seed.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import os
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

from . import analysis as analysis_mod
from .cohort import CohortConfig, build_cohort
from .config import EndpointConfig, RunConfig, load_patterns
from .dne import BaselineCounts, compute_dne
from .harvest import (
    AmbiguousProfile,
    Harvester,
    JsonCache,
    NoProfileFound,
    OpenAlexClient,
    Overrides,
    RateLimited,
    ScholarExport,
    Unresolvable,
    resolve_region,
)
from .model import (
    BaselineSource,
    CitationGroup,
    CoAuthorNetwork,
    DNEScore,
    FieldOfScience,
    ProbeRecord,
    Region,
    ResponseClass,
    SeedAuthor,
    SeedValidationError,
    validate_seed,
)
from .name_match import MatchConfig, match_coauthors
from .probe import FixtureClient, HttpCompletionClient, ModelEndpoint, run_probes

logger = logging.getLogger(__name__)

STAGE_ORDER = ("cohort", "harvest", "probe", "score", "analyze", "report")

_UPSTREAM = {
    "cohort": (),
    "harvest": ("cohort",),
    "probe": ("cohort", "harvest"),
    "score": ("cohort", "harvest", "probe"),
    "analyze": ("cohort", "score"),
    "report": ("cohort", "analyze"),
}

COHORT_HEADER = (
    "seed_id,full_name,field,subfield,affiliation,country,region,"
    "citation_count,group"
)
SCORES_HEADER = "seed_id,model,baseline,epsilon,discovered,denominator,dne"


class PipelineError(RuntimeError):
    stage: str = ""

    def __init__(self, message: str, stage: str = "") -> None:
        super().__init__(message)
        self.stage = stage


class MissingUpstream(PipelineError):
    pass


class StaleInput(PipelineError):
    pass


def _hash_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _hash_file(path: Path) -> str:
    if not path.exists():
        return "absent"
    return _hash_bytes(path.read_bytes())


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class Manifest:
    """Stage completion markers and counts, persisted atomically as JSON."""

    def __init__(self, path: Path, run_id: str, config_hash: str) -> None:
        self.path = path
        self.run_id = run_id
        self.config_hash = config_hash
        self.stages: dict[str, dict] = {}

    @classmethod
    def load_or_create(cls, out_dir: Path, config: RunConfig) -> "Manifest":
        path = out_dir / "manifest.json"
        manifest = cls(path, config.run_id, config.config_hash)
        if path.exists():
            doc = json.loads(path.read_text(encoding="utf-8"))
            # Stage records persist across config edits; per-stage signatures
            # decide what is stale, skippable, or needs a rerun.
            manifest.stages = doc.get("stages", {})
        return manifest

    def save(self) -> None:
        doc = {
            "run_id": self.run_id,
            "config_hash": self.config_hash,
            "stages": self.stages,
        }
        _atomic_write(self.path, json.dumps(doc, sort_keys=True, indent=1) + "\n")

    def mark(self, stage: str, signature: str, counts: dict[str, int],
             outputs: list[str]) -> None:
        self.stages[stage] = {
            "signature": signature,
            "counts": counts,
            "outputs": sorted(outputs),
        }
        self.save()


@dataclass
class StageResult:
    name: str
    skipped: bool
    counts: dict[str, int]


# ---------------------------------------------------------------------------
# serialization helpers


def _seed_to_row(seed: SeedAuthor) -> list[str]:
    return [
        seed.id, seed.full_name, seed.field.value, seed.subfield,
        seed.affiliation, seed.country, seed.region.value,
        str(seed.citation_count), seed.group.value if seed.group else "",
    ]


def _seed_from_row(row: dict[str, str]) -> SeedAuthor:
    return SeedAuthor(
        id=row["seed_id"],
        full_name=row["full_name"],
        field=FieldOfScience(row["field"]),
        subfield=row["subfield"],
        affiliation=row["affiliation"],
        country=row["country"],
        region=Region(row["region"]),
        citation_count=int(row["citation_count"]),
        group=CitationGroup(row["group"]) if row.get("group") else None,
    )


def read_cohort(path: Path) -> list[SeedAuthor]:
    with path.open(encoding="utf-8", newline="") as handle:
        return [_seed_from_row(row) for row in csv.DictReader(handle)]


def write_cohort(path: Path, seeds: Sequence[SeedAuthor]) -> None:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(COHORT_HEADER.split(","))
    for seed in seeds:
        writer.writerow(_seed_to_row(seed))
    _atomic_write(path, buffer.getvalue())


def read_networks(path: Path) -> dict[tuple[str, BaselineSource], CoAuthorNetwork]:
    networks = {}
    for line in path.read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        doc = json.loads(line)
        network = CoAuthorNetwork(
            seed_id=doc["seed_id"],
            source=BaselineSource(doc["source"]),
            coauthors=tuple(doc["coauthors"]),
            retrieved_at=doc.get("retrieved_at"),
        )
        networks[(network.seed_id, network.source)] = network
    return networks


def write_networks(path: Path, networks: Sequence[CoAuthorNetwork]) -> None:
    lines = []
    for network in sorted(networks, key=lambda n: (n.seed_id, n.source.value)):
        lines.append(json.dumps({
            "seed_id": network.seed_id,
            "source": network.source.value,
            "coauthors": list(network.coauthors),
            "retrieved_at": network.retrieved_at,
        }, sort_keys=True, ensure_ascii=False))
    _atomic_write(path, "\n".join(lines) + ("\n" if lines else ""))


def read_probes(path: Path) -> list[ProbeRecord]:
    records = []
    for line in path.read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        doc = json.loads(line)
        records.append(ProbeRecord(
            seed_id=doc["seed_id"],
            model_id=doc["model_id"],
            prompt=doc["prompt"],
            raw_response=doc["raw_response"],
            classification=ResponseClass(doc["classification"]),
            generated_names=tuple(doc["generated_names"]),
            timestamp=doc["timestamp"],
        ))
    return records


def write_probes(path: Path, records: Sequence[ProbeRecord]) -> None:
    lines = []
    for record in sorted(records, key=lambda r: (r.model_id, r.seed_id)):
        lines.append(json.dumps({
            "seed_id": record.seed_id,
            "model_id": record.model_id,
            "prompt": record.prompt,
            "raw_response": record.raw_response,
            "classification": record.classification.value,
            "generated_names": list(record.generated_names),
            "timestamp": record.timestamp,
        }, sort_keys=True, ensure_ascii=False))
    _atomic_write(path, "\n".join(lines) + ("\n" if lines else ""))


def read_scores(path: Path) -> list[DNEScore]:
    with path.open(encoding="utf-8", newline="") as handle:
        return [
            DNEScore(
                seed_id=row["seed_id"],
                model_id=row["model"],
                baseline=BaselineSource(row["baseline"]),
                epsilon=float(row["epsilon"]),
                discovered=int(row["discovered"]),
                denominator=int(row["denominator"]),
                value=float(row["dne"]),
            )
            for row in csv.DictReader(handle)
        ]


def write_scores(path: Path, scores: Sequence[DNEScore]) -> None:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(SCORES_HEADER.split(","))
    ordered = sorted(
        scores, key=lambda s: (s.model_id, s.seed_id, s.baseline.value, s.epsilon)
    )
    for s in ordered:
        writer.writerow([
            s.seed_id, s.model_id, s.baseline.value, f"{s.epsilon:g}",
            str(s.discovered), str(s.denominator), repr(s.value),
        ])
    _atomic_write(path, buffer.getvalue())


def _write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence[str]]) -> None:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(row)
    _atomic_write(path, buffer.getvalue())


# ---------------------------------------------------------------------------
# the pipeline


class Pipeline:
    def __init__(self, config: RunConfig) -> None:
        self.config = config
        self.out = Path(config.out_dir)
        self.out.mkdir(parents=True, exist_ok=True)
        self.cache = JsonCache(config.cache_dir)
        self.manifest = Manifest.load_or_create(self.out, config)
        self._clock: Callable[[], str]
        if config.fixed_timestamp:
            stamp = config.fixed_timestamp
            self._clock = lambda: stamp
        else:
            self._clock = lambda: time.strftime(
                "%Y-%m-%dT%H:%M:%SZ", time.gmtime()
            )

    # -- signatures ---------------------------------------------------------

    def _config_slice(self, stage: str) -> dict:
        cfg = self.config
        if stage == "cohort":
            return {
                "rng_seed": cfg.rng_seed,
                "citation_floor": cfg.citation_floor,
                "per_cell_per_group": cfg.per_cell_per_group,
                "pool": _hash_file(Path(cfg.pool)),
                "overrides": _hash_file(Path(cfg.overrides)) if cfg.overrides else "",
            }
        if stage == "harvest":
            return {
                "baselines": [b.value for b in cfg.baselines],
                "scholar_export": (
                    _hash_file(Path(cfg.scholar_export)) if cfg.scholar_export else ""
                ),
                "openalex_base": cfg.openalex.base_url,
                "overrides": _hash_file(Path(cfg.overrides)) if cfg.overrides else "",
            }
        if stage == "probe":
            return {
                "endpoints": [self._endpoint_identity(e) for e in cfg.endpoints],
                "null_patterns": (
                    _hash_file(Path(cfg.null_patterns_file))
                    if cfg.null_patterns_file else ""
                ),
                "fictional_patterns": (
                    _hash_file(Path(cfg.fictional_patterns_file))
                    if cfg.fictional_patterns_file else ""
                ),
            }
        if stage == "score":
            return {
                "epsilons": list(cfg.epsilons),
                "baselines": [b.value for b in cfg.baselines],
                "score_filtered_as_zero": cfg.score_filtered_as_zero,
            }
        if stage == "analyze":
            return {"epsilons": list(cfg.epsilons)}
        if stage == "report":
            return {}
        raise ValueError(f"unknown stage {stage!r}")

    def _endpoint_identity(self, endpoint: EndpointConfig) -> dict:
        identity = {"model_id": endpoint.model_id, "base_url": endpoint.base_url or ""}
        if endpoint.fixture:
            identity["fixture"] = _hash_file(Path(endpoint.fixture))
        return identity

    _STAGE_OUTPUTS = {
        "cohort": ("cohort.csv", "cohort_rejections.csv", "cohort_audit.txt"),
        "harvest": ("networks.jsonl", "harvest_exclusions.csv"),
        "probe": ("probes.jsonl", "probe_errors.csv"),
        "score": ("scores.csv",),
        "analyze": ("analysis.json", "analysis.csv"),
        "report": (),  # dynamic; recorded at mark time
    }

    _STAGE_INPUT_FILES = {
        "cohort": (),
        "harvest": ("cohort.csv",),
        "probe": ("cohort.csv", "networks.jsonl"),
        "score": ("networks.jsonl", "probes.jsonl"),
        "analyze": ("cohort.csv", "scores.csv"),
        "report": ("cohort.csv", "analysis.json"),
    }

    def _signature(self, stage: str) -> str:
        payload = {
            "config": self._config_slice(stage),
            "inputs": {
                name: _hash_file(self.out / name)
                for name in self._STAGE_INPUT_FILES[stage]
            },
        }
        return _hash_bytes(json.dumps(payload, sort_keys=True).encode("utf-8"))

    def _check_upstream(self, stage: str) -> None:
        for upstream in _UPSTREAM[stage]:
            entry = self.manifest.stages.get(upstream)
            if entry is None:
                raise MissingUpstream(
                    f"stage {stage!r} needs {upstream!r} to run first", stage
                )
            current = self._signature(upstream)
            if entry["signature"] != current:
                raise StaleInput(
                    f"stage {upstream!r} outputs are stale under the current "
                    f"configuration (recorded signature {entry['signature'][:12]}, "
                    f"now {current[:12]}); recorded counts: "
                    f"{json.dumps(entry['counts'], sort_keys=True)}. "
                    f"Re-run {upstream!r} first.",
                    stage,
                )

    def _maybe_skip(self, stage: str) -> StageResult | None:
        entry = self.manifest.stages.get(stage)
        if entry is None:
            return None
        if entry["signature"] != self._signature(stage):
            return None
        for name in entry.get("outputs", []):
            if not (self.out / name).exists():
                return None
        logger.info("stage %s unchanged; skipping", stage)
        return StageResult(name=stage, skipped=True, counts=dict(entry["counts"]))

    def _finish(self, stage: str, counts: dict[str, int],
                outputs: list[str]) -> StageResult:
        self.manifest.mark(stage, self._signature(stage), counts, outputs)
        logger.info("stage %s done: %s", stage, json.dumps(counts, sort_keys=True))
        return StageResult(name=stage, skipped=False, counts=counts)

    # -- stages -------------------------------------------------------------

    def stage_cohort(self) -> StageResult:
        self._check_upstream("cohort")
        skipped = self._maybe_skip("cohort")
        if skipped:
            return skipped
        cfg = self.config
        overrides = Overrides.load(cfg.overrides)

        pool: list[SeedAuthor] = []
        rejections: list[list[str]] = []
        with open(cfg.pool, encoding="utf-8", newline="") as handle:
            rows = list(csv.DictReader(handle))
        for row in rows:
            record = dict(row)
            name = record.get("full_name", "")
            try:
                if not record.get("country"):
                    seed_key = record.get("id") or ""
                    country, _region = resolve_region(
                        record.get("affiliation", "") or "",
                        record.get("email_domain", "") or "",
                        overrides.countries.get(seed_key),
                    )
                    record["country"] = country
                pool.append(
                    validate_seed(record, citation_floor=cfg.citation_floor)
                )
            except (SeedValidationError, Unresolvable) as exc:
                rule = getattr(exc, "rule", "unresolvable")
                rejections.append([name, record.get("subfield", ""), rule, str(exc)])

        cohort, audit = build_cohort(
            pool,
            CohortConfig(
                per_cell_per_group=cfg.per_cell_per_group,
                citation_floor=cfg.citation_floor,
                rng_seed=cfg.rng_seed,
            ),
        )
        write_cohort(self.out / "cohort.csv", cohort)
        _write_csv(
            self.out / "cohort_rejections.csv",
            ["full_name", "subfield", "rule", "detail"],
            rejections,
        )
        _atomic_write(self.out / "cohort_audit.txt", audit.render())
        counts = {
            "pool_rows": len(rows),
            "validated": len(pool),
            "rejected": len(rejections),
            "cohort": len(cohort),
            "short_cells": sum(1 for c in audit.cells if c.deficit > 0),
            "empty_cells": len(audit.empty_cells),
        }
        return self._finish("cohort", counts, list(self._STAGE_OUTPUTS["cohort"]))

    def _build_harvester(self) -> Harvester:
        cfg = self.config
        scholar = ScholarExport(cfg.scholar_export) if cfg.scholar_export else None
        openalex = None
        if BaselineSource.OPENALEX in cfg.baselines:
            openalex = OpenAlexClient(
                cache=self.cache,
                base_url=cfg.openalex.base_url,
                mailto=cfg.openalex.mailto,
                rate_limit_per_s=cfg.openalex.rate_limit_per_s,
                max_retries=cfg.openalex.max_retries,
            )
        return Harvester(
            openalex=openalex,
            scholar=scholar,
            overrides=Overrides.load(cfg.overrides),
            clock=self._clock,
        )

    def stage_harvest(self) -> StageResult:
        self._check_upstream("harvest")
        skipped = self._maybe_skip("harvest")
        if skipped:
            return skipped
        cfg = self.config
        seeds = read_cohort(self.out / "cohort.csv")
        harvester = self._build_harvester()

        # Google Scholar is always needed: it supplies k and the denominator.
        sources = [BaselineSource.GOOGLE_SCHOLAR]
        if BaselineSource.OPENALEX in cfg.baselines:
            sources.append(BaselineSource.OPENALEX)

        networks: list[CoAuthorNetwork] = []
        exclusions: list[list[str]] = []

        def harvest_source(source: BaselineSource) -> tuple[list, list]:
            fetched, excluded = [], []
            for seed in seeds:
                try:
                    network = harvester.fetch_coauthors(seed, source)
                    if source is BaselineSource.GOOGLE_SCHOLAR and not network.coauthors:
                        excluded.append(
                            [seed.id, source.value, "empty_network",
                             "google scholar lists no co-authors"]
                        )
                        continue
                    fetched.append(network)
                except (NoProfileFound, AmbiguousProfile, RateLimited) as exc:
                    excluded.append(
                        [seed.id, source.value, type(exc).__name__, str(exc)]
                    )
            return fetched, excluded

        # Independent sources run concurrently; each is serialized internally.
        with ThreadPoolExecutor(max_workers=len(sources)) as pool:
            for fetched, excluded in pool.map(harvest_source, sources):
                networks.extend(fetched)
                exclusions.extend(excluded)

        exclusions.sort(key=lambda row: (row[0], row[1]))
        write_networks(self.out / "networks.jsonl", networks)
        _write_csv(
            self.out / "harvest_exclusions.csv",
            ["seed_id", "source", "error", "detail"],
            exclusions,
        )
        have = {(n.seed_id, n.source) for n in networks}
        eligible = sum(
            1 for seed in seeds
            if all((seed.id, source) in have for source in sources)
        )
        excluded_seeds = len({row[0] for row in exclusions})
        counts = {
            "seeds_in": len(seeds),
            "networks": len(networks),
            "excluded_seeds": excluded_seeds,
            "eligible": eligible,
        }
        if eligible != len(seeds) - excluded_seeds:
            raise PipelineError(
                f"exclusion accounting mismatch: {len(seeds)} - {excluded_seeds} "
                f"!= {eligible}", "harvest",
            )
        return self._finish("harvest", counts, list(self._STAGE_OUTPUTS["harvest"]))

    def _clients(self) -> list:
        clients = []
        for entry in self.config.endpoints:
            if entry.fixture:
                client = FixtureClient(entry.fixture)
                client.model_id = entry.model_id
                clients.append((client, entry))
            else:
                endpoint = ModelEndpoint(
                    model_id=entry.model_id,
                    base_url=entry.base_url,
                    api_key_env=entry.api_key_env,
                    timeout_s=entry.timeout_s,
                    max_retries=entry.max_retries,
                    rate_limit_per_s=entry.rate_limit_per_s,
                    parallelism=entry.parallelism,
                )
                clients.append((HttpCompletionClient(endpoint), entry))
        return clients

    def stage_probe(self) -> StageResult:
        self._check_upstream("probe")
        skipped = self._maybe_skip("probe")
        if skipped:
            return skipped
        cfg = self.config
        if not cfg.endpoints:
            raise PipelineError("no endpoints configured", "probe")
        seeds = read_cohort(self.out / "cohort.csv")
        networks = read_networks(self.out / "networks.jsonl")

        eligible: list[tuple[SeedAuthor, int]] = []
        for seed in seeds:
            gs = networks.get((seed.id, BaselineSource.GOOGLE_SCHOLAR))
            if gs is None or not gs.coauthors:
                continue
            if (
                BaselineSource.OPENALEX in cfg.baselines
                and (seed.id, BaselineSource.OPENALEX) not in networks
            ):
                continue
            eligible.append((seed, len(gs.coauthors)))

        null_patterns = load_patterns(cfg.null_patterns_file)
        fictional_patterns = load_patterns(cfg.fictional_patterns_file)

        records: list[ProbeRecord] = []
        failures: list[list[str]] = []
        counts: dict[str, int] = {"eligible": len(eligible)}
        for client, entry in self._clients():
            fingerprint = ""
            if entry.fixture:
                fingerprint = _hash_file(Path(entry.fixture))[:12] + ":"
            batch = run_probes(
                eligible,
                client,
                parallelism=entry.parallelism,
                rate_limit_per_s=entry.rate_limit_per_s,
                cache=_PrefixedCache(self.cache, fingerprint),
                null_patterns=null_patterns,
                fictional_patterns=fictional_patterns,
                clock=self._clock,
            )
            records.extend(batch.records)
            failures.extend(
                [f.seed_id, f.model_id, f.error] for f in batch.failures
            )
            per_class = {c: 0 for c in ResponseClass}
            for record in batch.records:
                per_class[record.classification] += 1
            for cls, n in per_class.items():
                counts[f"{entry.model_id}:{cls.value}"] = n
            counts[f"{entry.model_id}:failed"] = len(batch.failures)

        write_probes(self.out / "probes.jsonl", records)
        failures.sort(key=lambda row: (row[1], row[0]))
        _write_csv(
            self.out / "probe_errors.csv",
            ["seed_id", "model_id", "error"],
            failures,
        )
        counts["probes"] = len(records)
        return self._finish("probe", counts, list(self._STAGE_OUTPUTS["probe"]))

    def stage_score(self) -> StageResult:
        self._check_upstream("score")
        skipped = self._maybe_skip("score")
        if skipped:
            return skipped
        cfg = self.config
        networks = read_networks(self.out / "networks.jsonl")
        probes = read_probes(self.out / "probes.jsonl")

        scores: list[DNEScore] = []
        counts = {
            "probes_in": len(probes),
            "scored_probes": 0,
            "skipped_null": 0,
            "skipped_fictional": 0,
            "clamped": 0,
        }
        for record in probes:
            gs = networks.get((record.seed_id, BaselineSource.GOOGLE_SCHOLAR))
            if gs is None or not gs.coauthors:
                continue
            oa = networks.get((record.seed_id, BaselineSource.OPENALEX))
            base_counts = BaselineCounts(
                gs_count=len(gs.coauthors),
                oa_count=len(oa.coauthors) if oa is not None else None,
            )
            if record.classification is not ResponseClass.VALID:
                key = (
                    "skipped_null"
                    if record.classification is ResponseClass.NULL
                    else "skipped_fictional"
                )
                counts[key] += 1
                if not cfg.score_filtered_as_zero:
                    continue
            else:
                counts["scored_probes"] += 1
            generated = (
                list(record.generated_names)
                if record.classification is ResponseClass.VALID
                else []
            )
            for baseline in cfg.baselines:
                if baseline is BaselineSource.OPENALEX and oa is None:
                    continue
                reference = (
                    oa.coauthors if baseline is BaselineSource.OPENALEX
                    else gs.coauthors
                )
                for eps in cfg.epsilons:
                    match = match_coauthors(reference, generated, MatchConfig(eps))
                    score = compute_dne(
                        match, baseline, base_counts, eps,
                        seed_id=record.seed_id, model_id=record.model_id,
                    )
                    if match.discovered_count > score.denominator:
                        counts["clamped"] += 1
                    scores.append(score)

        write_scores(self.out / "scores.csv", scores)
        counts["scores"] = len(scores)
        return self._finish("score", counts, list(self._STAGE_OUTPUTS["score"]))

    def stage_analyze(self) -> StageResult:
        self._check_upstream("analyze")
        skipped = self._maybe_skip("analyze")
        if skipped:
            return skipped
        scores = read_scores(self.out / "scores.csv")
        cohort = {s.id: s for s in read_cohort(self.out / "cohort.csv")}
        models = sorted({s.model_id for s in scores})
        baselines = [
            b for b in (BaselineSource.OPENALEX, BaselineSource.GOOGLE_SCHOLAR)
            if b in {s.baseline for s in scores}
        ]
        specs = analysis_mod.default_specs(models, baselines, self.config.epsilons)
        bundle = analysis_mod.run_analysis(scores, cohort, specs)

        _atomic_write(self.out / "analysis.json", bundle.to_json())
        rows = []
        for row in bundle.rows:
            r, o = row.result, row.overall
            rows.append([
                row.spec.model_id, row.spec.baseline.value,
                f"{row.spec.epsilon:g}", row.spec.facet.value,
                row.spec.facet_value or "",
                str(r.group_high.n) if r else "",
                repr(r.group_high.mean) if r else "",
                repr(r.group_high.sd) if r else "",
                str(r.group_low.n) if r else "",
                repr(r.group_low.mean) if r else "",
                repr(r.group_low.sd) if r else "",
                repr(r.t_stat) if r else "",
                repr(r.p_value) if r else "",
                r.stars if r else "",
                str(o.n) if o else "",
                repr(o.mean) if o else "",
                repr(o.sd) if o else "",
                row.error or "",
            ])
        _write_csv(
            self.out / "analysis.csv",
            ["model", "baseline", "epsilon", "facet", "facet_value",
             "n_high", "mean_high", "sd_high", "n_low", "mean_low", "sd_low",
             "t_stat", "p_value", "stars", "overall_n", "overall_mean",
             "overall_sd", "error"],
            rows,
        )
        counts = {
            "tests_run": sum(1 for r in bundle.rows if r.result is not None),
            "tests_insufficient": sum(1 for r in bundle.rows if r.error),
        }
        return self._finish("analyze", counts, list(self._STAGE_OUTPUTS["analyze"]))

    def stage_report(self) -> StageResult:
        self._check_upstream("report")
        skipped = self._maybe_skip("report")
        if skipped:
            return skipped
        bundle = analysis_mod.AnalysisBundle.from_json(
            (self.out / "analysis.json").read_text(encoding="utf-8")
        )
        cohort = read_cohort(self.out / "cohort.csv")

        outputs: list[str] = []
        for document in analysis_mod.emit_tables(bundle):
            stem = f"tables/table_eps_{document.epsilon:g}"
            _atomic_write(self.out / f"{stem}.csv", document.csv_text)
            _atomic_write(self.out / f"{stem}.txt", document.text)
            outputs.extend([f"{stem}.csv", f"{stem}.txt"])
        for kind, filename in (
            (analysis_mod.PlotKind.RADAR, "plots/radar.csv"),
            (analysis_mod.PlotKind.GROUPED_BAR, "plots/grouped_bar.csv"),
            (analysis_mod.PlotKind.VIOLIN, "plots/violin.csv"),
        ):
            data = analysis_mod.emit_plot_data(bundle, kind, cohort=cohort)
            _atomic_write(self.out / filename, data.csv_text)
            outputs.append(filename)

        counts = {"tables": len(bundle.epsilons()), "plot_files": 3}
        return self._finish("report", counts, outputs)

    def run_stage(self, name: str) -> StageResult:
        runner = {
            "cohort": self.stage_cohort,
            "harvest": self.stage_harvest,
            "probe": self.stage_probe,
            "score": self.stage_score,
            "analyze": self.stage_analyze,
            "report": self.stage_report,
        }[name]
        return runner()

    def run_all(self) -> list[StageResult]:
        return [self.run_stage(name) for name in STAGE_ORDER]


class _PrefixedCache:
    """Namespaces probe cache keys by a client fingerprint so that swapping
    the fixture behind a mock endpoint does not serve stale responses."""

    def __init__(self, cache: JsonCache, prefix: str) -> None:
        self._cache = cache
        self._prefix = prefix

    def get(self, namespace: str, key: str):
        return self._cache.get(namespace, self._prefix + key)

    def put(self, namespace: str, key: str, doc: dict) -> None:
        self._cache.put(namespace, self._prefix + key, doc)
