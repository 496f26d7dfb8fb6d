"""netmem: quantify how much of a real co-authorship network a completion
model reproduces from a single zero-shot query, and test whether recall
differs between highly cited and low-cited authors."""

from .model import (
    BaselineSource,
    CitationGroup,
    CoAuthorNetwork,
    DNEScore,
    FieldOfScience,
    ProbeRecord,
    Region,
    ResponseClass,
    SampleSummary,
    SeedAuthor,
    TestResult,
    validate_seed,
)
from .name_match import (
    MatchConfig,
    MatchResult,
    NormalizedName,
    levenshtein,
    match_coauthors,
    normalize_name,
    similarity,
)
from .dne import BaselineCounts, Facet, aggregate, compute_dne, threshold_sweep
from .probe import (
    ModelEndpoint,
    PromptSpec,
    build_prompt,
    classify_response,
    parse_coauthor_list,
    probe,
)
from .cohort import CohortConfig, build_cohort, log_citation_distribution
from .analysis import (
    TestSpec,
    default_specs,
    emit_plot_data,
    emit_tables,
    run_analysis,
    welch_t_test,
)
from .harvest import Harvester, resolve_region, verify_profile

__version__ = "0.1.0"

__all__ = [
    "BaselineCounts",
    "BaselineSource",
    "CitationGroup",
    "CoAuthorNetwork",
    "CohortConfig",
    "DNEScore",
    "Facet",
    "FieldOfScience",
    "Harvester",
    "MatchConfig",
    "MatchResult",
    "ModelEndpoint",
    "NormalizedName",
    "ProbeRecord",
    "PromptSpec",
    "Region",
    "ResponseClass",
    "SampleSummary",
    "SeedAuthor",
    "TestResult",
    "TestSpec",
    "aggregate",
    "build_cohort",
    "build_prompt",
    "classify_response",
    "compute_dne",
    "default_specs",
    "emit_plot_data",
    "emit_tables",
    "levenshtein",
    "log_citation_distribution",
    "match_coauthors",
    "normalize_name",
    "parse_coauthor_list",
    "probe",
    "resolve_region",
    "run_analysis",
    "similarity",
    "threshold_sweep",
    "validate_seed",
    "verify_profile",
    "welch_t_test",
]
