"""Clone detection and variability analysis for IEC 61131-3 projects."""

from ._core import (
    Error,
    FamilyModelError,
    MetricError,
    MutationError,
    ParseError,
    Project,
    attribute_catalog,
    campaign,
    clone_candidates,
    evaluate,
    family_model,
    greedy_match,
    load_project,
    mutate,
    parse_project,
    similarity,
)

__all__ = [
    "Error",
    "FamilyModelError",
    "MetricError",
    "MutationError",
    "ParseError",
    "Project",
    "attribute_catalog",
    "campaign",
    "clone_candidates",
    "evaluate",
    "family_model",
    "greedy_match",
    "load_project",
    "mutate",
    "parse_project",
    "similarity",
]
