"""Run configuration: a single JSON file plus CLI overrides.

Credentials never live in the config; endpoint entries name an environment
variable instead. All randomness in a run flows from the one rng_seed here.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

from .model import BaselineSource

DEFAULT_EPSILONS = (0.6, 0.7, 0.8, 0.9)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class EndpointConfig:
    """One completion endpoint; either live HTTP or a response fixture."""

    model_id: str
    base_url: str | None = None
    fixture: str | None = None
    api_key_env: str | None = None
    timeout_s: float = 60.0
    max_retries: int = 3
    rate_limit_per_s: float | None = None
    parallelism: int = 4

    def __post_init__(self) -> None:
        if bool(self.base_url) == bool(self.fixture):
            raise ConfigError(
                f"endpoint {self.model_id!r} needs exactly one of base_url/fixture"
            )


@dataclass(frozen=True)
class OpenAlexConfig:
    base_url: str = "https://api.openalex.org"
    mailto: str | None = None
    rate_limit_per_s: float = 5.0
    max_retries: int = 4


@dataclass(frozen=True)
class RunConfig:
    rng_seed: int = 0
    citation_floor: int = 100
    per_cell_per_group: int = 10
    epsilons: tuple[float, ...] = DEFAULT_EPSILONS
    baselines: tuple[BaselineSource, ...] = (
        BaselineSource.OPENALEX,
        BaselineSource.GOOGLE_SCHOLAR,
    )
    pool: str = "pool.csv"
    scholar_export: str | None = None
    openalex: OpenAlexConfig = field(default_factory=OpenAlexConfig)
    endpoints: tuple[EndpointConfig, ...] = ()
    overrides: str | None = None
    cache_dir: str = ".netmem-cache"
    out_dir: str = "out"
    score_filtered_as_zero: bool = False
    fixed_timestamp: str | None = None
    null_patterns_file: str | None = None
    fictional_patterns_file: str | None = None

    def __post_init__(self) -> None:
        if list(self.epsilons) != sorted(self.epsilons):
            raise ConfigError("epsilons must be ascending")
        for eps in self.epsilons:
            if not 0.5 < eps <= 1.0:
                raise ConfigError(f"epsilon {eps} outside (0.5, 1.0]")
        if not self.baselines:
            raise ConfigError("at least one baseline is required")

    def as_dict(self) -> dict:
        return {
            "rng_seed": self.rng_seed,
            "citation_floor": self.citation_floor,
            "per_cell_per_group": self.per_cell_per_group,
            "epsilons": list(self.epsilons),
            "baselines": [b.value for b in self.baselines],
            "pool": self.pool,
            "scholar_export": self.scholar_export,
            "openalex": {
                "base_url": self.openalex.base_url,
                "mailto": self.openalex.mailto,
                "rate_limit_per_s": self.openalex.rate_limit_per_s,
                "max_retries": self.openalex.max_retries,
            },
            "endpoints": [
                {
                    "model_id": e.model_id,
                    "base_url": e.base_url,
                    "fixture": e.fixture,
                    "api_key_env": e.api_key_env,
                    "timeout_s": e.timeout_s,
                    "max_retries": e.max_retries,
                    "rate_limit_per_s": e.rate_limit_per_s,
                    "parallelism": e.parallelism,
                }
                for e in self.endpoints
            ],
            "overrides": self.overrides,
            "cache_dir": self.cache_dir,
            "out_dir": self.out_dir,
            "score_filtered_as_zero": self.score_filtered_as_zero,
            "fixed_timestamp": self.fixed_timestamp,
            "null_patterns_file": self.null_patterns_file,
            "fictional_patterns_file": self.fictional_patterns_file,
        }

    @property
    def config_hash(self) -> str:
        canonical = json.dumps(self.as_dict(), sort_keys=True)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    @property
    def run_id(self) -> str:
        return self.config_hash[:12]


def _parse_baselines(value) -> tuple[BaselineSource, ...]:
    if isinstance(value, str):
        if value == "both":
            return (BaselineSource.OPENALEX, BaselineSource.GOOGLE_SCHOLAR)
        value = [value]
    return tuple(BaselineSource(v) for v in value)


def load_config(path: str | Path) -> RunConfig:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}")

    base_dir = Path(path).resolve().parent

    def resolved(key: str, default=None):
        value = doc.get(key, default)
        if value is None:
            return None
        return str((base_dir / str(value)).resolve())

    openalex_doc = doc.get("openalex") or {}
    endpoints = []
    for entry in doc.get("endpoints", []):
        fixture = entry.get("fixture")
        endpoints.append(
            EndpointConfig(
                model_id=str(entry["model_id"]),
                base_url=entry.get("base_url"),
                fixture=str((base_dir / fixture).resolve()) if fixture else None,
                api_key_env=entry.get("api_key_env"),
                timeout_s=float(entry.get("timeout_s", 60.0)),
                max_retries=int(entry.get("max_retries", 3)),
                rate_limit_per_s=entry.get("rate_limit_per_s"),
                parallelism=int(entry.get("parallelism", 4)),
            )
        )

    return RunConfig(
        rng_seed=int(doc.get("rng_seed", 0)),
        citation_floor=int(doc.get("citation_floor", 100)),
        per_cell_per_group=int(doc.get("per_cell_per_group", 10)),
        epsilons=tuple(float(e) for e in doc.get("epsilons", DEFAULT_EPSILONS)),
        baselines=_parse_baselines(doc.get("baselines", "both")),
        pool=resolved("pool", "pool.csv"),
        scholar_export=resolved("scholar_export"),
        openalex=OpenAlexConfig(
            base_url=str(openalex_doc.get("base_url", "https://api.openalex.org")),
            mailto=openalex_doc.get("mailto"),
            rate_limit_per_s=float(openalex_doc.get("rate_limit_per_s", 5.0)),
            max_retries=int(openalex_doc.get("max_retries", 4)),
        ),
        endpoints=tuple(endpoints),
        overrides=resolved("overrides"),
        cache_dir=resolved("cache_dir", ".netmem-cache"),
        out_dir=resolved("out_dir", "out"),
        score_filtered_as_zero=bool(doc.get("score_filtered_as_zero", False)),
        fixed_timestamp=doc.get("fixed_timestamp"),
        null_patterns_file=resolved("null_patterns_file"),
        fictional_patterns_file=resolved("fictional_patterns_file"),
    )


def apply_cli_overrides(
    config: RunConfig,
    *,
    epsilons: str | None = None,
    baseline: str | None = None,
    mock_endpoint: str | None = None,
    cache_dir: str | None = None,
    out_dir: str | None = None,
) -> RunConfig:
    """Fold command-line flags into the effective configuration."""
    updates: dict = {}
    if epsilons:
        updates["epsilons"] = tuple(
            sorted(float(e) for e in epsilons.split(",") if e.strip())
        )
    if baseline:
        updates["baselines"] = _parse_baselines(baseline)
    if mock_endpoint:
        updates["endpoints"] = (
            EndpointConfig(model_id=_fixture_model_id(mock_endpoint),
                           fixture=str(Path(mock_endpoint).resolve())),
        )
    if cache_dir:
        updates["cache_dir"] = str(Path(cache_dir).resolve())
    if out_dir:
        updates["out_dir"] = str(Path(out_dir).resolve())
    return replace(config, **updates) if updates else config


def _fixture_model_id(path: str) -> str:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        return str(doc.get("model_id") or "mock")
    except (OSError, json.JSONDecodeError):
        return "mock"


def load_patterns(path: str | None) -> tuple[str, ...] | None:
    """One pattern per line; blank lines and #-comments ignored."""
    if path is None:
        return None
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    patterns = tuple(
        line.strip() for line in lines if line.strip() and not line.startswith("#")
    )
    return patterns or None
