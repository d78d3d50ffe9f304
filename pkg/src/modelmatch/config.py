"""Engine configuration: defaults, JSON config file, environment fallback."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping

from .errors import ConfigError
from .matching import GAConfig
from .metadata import PrefilterConfig
from .scoring import DEFAULT_VIEW_WEIGHTS, KIND_ORDER, ScoringConfig, ViewWeights

ENV_CONFIG = "MODELMATCH_CONFIG"


@dataclass(frozen=True)
class EngineConfig:
    """Everything the retrieval pipeline needs besides the models themselves."""

    weights: ViewWeights = field(default_factory=lambda: DEFAULT_VIEW_WEIGHTS)
    scoring: ScoringConfig = field(default_factory=ScoringConfig)
    ga: GAConfig = field(default_factory=GAConfig)
    prefilter: PrefilterConfig = field(default_factory=PrefilterConfig)


def default_engine_config() -> EngineConfig:
    return EngineConfig()


_SCORING_KEYS = {
    "classNameWeight": "class_name_weight",
    "attributeWeight": "attribute_weight",
    "operationWeight": "operation_weight",
    "classSimWeight": "class_sim_weight",
    "relationshipWeight": "relationship_weight",
    "stateWeight": "state_weight",
    "transitionWeight": "transition_weight",
}

_GA_KEYS = {
    "populationSize": "population_size",
    "maxGenerations": "max_generations",
    "tournamentSize": "tournament_size",
    "crossoverRate": "crossover_rate",
    "mutationRate": "mutation_rate",
    "elitism": "elitism",
    "stagnationLimit": "stagnation_limit",
    "seed": "seed",
}

_PREFILTER_KEYS = {
    "sizeTolerance": "size_tolerance",
    "domainFilterEnabled": "domain_filter_enabled",
    "minTokenJaccard": "min_token_jaccard",
}


def _mapped_kwargs(doc: Mapping[str, Any], mapping: Mapping[str, str], where: str) -> dict:
    unknown = set(doc) - set(mapping)
    if unknown:
        raise ConfigError(f"{where}: unknown field(s) {sorted(unknown)!r}")
    return {mapping[k]: v for k, v in doc.items()}


def parse_config(doc: Mapping[str, Any]) -> EngineConfig:
    """Build an EngineConfig from a parsed config document; partial docs overlay defaults."""
    allowed = {"weights", "thetaMsg", "differenceTable", "scoring", "ga", "prefilter"}
    unknown = set(doc) - allowed
    if unknown:
        raise ConfigError(f"unknown top-level config field(s) {sorted(unknown)!r}")

    cfg = default_engine_config()
    try:
        if "weights" in doc:
            w = doc["weights"]
            if isinstance(w, str):
                weights = ViewWeights.parse(w)
            elif isinstance(w, (list, tuple)) and len(w) == 3:
                weights = ViewWeights.normalized(*(float(v) for v in w))
            elif isinstance(w, dict):
                weights = ViewWeights.normalized(
                    float(w["structural"]), float(w["functional"]), float(w["behavioral"])
                )
            else:
                raise ConfigError(f"weights: unsupported value {w!r}")
            cfg = replace(cfg, weights=weights)

        scoring_kwargs: dict[str, Any] = {}
        if "thetaMsg" in doc:
            scoring_kwargs["theta_msg"] = float(doc["thetaMsg"])
        if "scoring" in doc:
            scoring_kwargs.update(_mapped_kwargs(doc["scoring"], _SCORING_KEYS, "scoring"))
        if "differenceTable" in doc:
            table = dict(cfg.scoring.difference_table)
            for key, value in doc["differenceTable"].items():
                parts = key.split(":")
                if len(parts) != 2 or not all(p in KIND_ORDER for p in parts):
                    raise ConfigError(
                        f"differenceTable: key {key!r} is not '<kind>:<kind>' over {KIND_ORDER}"
                    )
                a, b = parts
                table[(a, b)] = float(value)
                table[(b, a)] = float(value)
            scoring_kwargs["difference_table"] = table
        if scoring_kwargs:
            cfg = replace(cfg, scoring=replace(cfg.scoring, **scoring_kwargs))

        if "ga" in doc:
            cfg = replace(cfg, ga=replace(cfg.ga, **_mapped_kwargs(doc["ga"], _GA_KEYS, "ga")))
        if "prefilter" in doc:
            cfg = replace(
                cfg,
                prefilter=replace(
                    cfg.prefilter, **_mapped_kwargs(doc["prefilter"], _PREFILTER_KEYS, "prefilter")
                ),
            )
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid configuration value: {exc}") from None
    return cfg


def load_config(path: str | Path) -> EngineConfig:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"config file {path} must contain an object")
    return parse_config(doc)


def resolve_config(explicit_path: str | None = None) -> EngineConfig:
    """Explicit --config path, else $MODELMATCH_CONFIG, else built-in defaults."""
    path = explicit_path or os.environ.get(ENV_CONFIG)
    if path:
        return load_config(path)
    return default_engine_config()
