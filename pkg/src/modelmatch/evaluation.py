"""Ranked-retrieval quality metrics and the judgments file format."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Collection, Mapping, Sequence

from .errors import ConfigError


def average_precision(ranked: Sequence[str], relevant: Collection[str]) -> float:
    """Mean of precision@k over the ranks holding relevant items.

    Divides by the total number of relevant items, so anything never
    retrieved still counts against the score (TREC convention).
    """
    relevant_set = set(relevant)
    if not relevant_set:
        raise ValueError("relevant set must be non-empty")
    hits = 0
    total = 0.0
    for k, model_id in enumerate(ranked, start=1):
        if model_id in relevant_set:
            hits += 1
            total += hits / k
    return total / len(relevant_set)


def r_precision(ranked: Sequence[str], relevant: Collection[str]) -> float:
    """Precision at rank R = |relevant|; short rankings count missing ranks as misses."""
    relevant_set = set(relevant)
    if not relevant_set:
        raise ValueError("relevant set must be non-empty")
    r = len(relevant_set)
    return sum(1 for model_id in ranked[:r] if model_id in relevant_set) / r


def mean_average_precision(
    runs: Sequence[tuple[Sequence[str], Collection[str]]]
) -> float:
    """Arithmetic mean of average precision over (ranking, relevant) runs."""
    if not runs:
        raise ValueError("at least one run is required")
    return sum(average_precision(ranked, relevant) for ranked, relevant in runs) / len(runs)


def parse_judgments(text: str) -> dict[str, frozenset[str]]:
    """One record per line: queryId then relevant modelIds; `#` starts a comment."""
    out: dict[str, frozenset[str]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) < 2:
            raise ConfigError(
                f"judgments line {lineno}: expected 'queryId relevantId...', got {raw!r}"
            )
        query_id, relevant = fields[0], frozenset(fields[1:])
        if query_id in out:
            raise ConfigError(f"judgments line {lineno}: duplicate query {query_id!r}")
        out[query_id] = relevant
    return out


def load_judgments(path: str | Path) -> dict[str, frozenset[str]]:
    return parse_judgments(Path(path).read_text(encoding="utf-8"))


def format_judgments(judgments: Mapping[str, Collection[str]]) -> str:
    lines = [f"{query} {' '.join(sorted(relevant))}" for query, relevant in sorted(judgments.items())]
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class QueryEvaluation:
    query_id: str
    average_precision: float
    r_precision: float
    retrieved: int


def evaluate_rankings(
    rankings: Mapping[str, Sequence[str]],
    judgments: Mapping[str, Collection[str]],
    drop_query_id: bool = True,
) -> tuple[list[QueryEvaluation], float]:
    """Per-query AP and R-precision plus the MAP over all judged queries.

    With `drop_query_id`, a stored copy of the query itself is removed from
    its own ranking before scoring (the synthetic protocol keeps queries in
    the repository).
    """
    rows: list[QueryEvaluation] = []
    for query_id in sorted(judgments):
        relevant = judgments[query_id]
        ranked = list(rankings.get(query_id, ()))
        if drop_query_id:
            ranked = [m for m in ranked if m != query_id]
        rows.append(
            QueryEvaluation(
                query_id=query_id,
                average_precision=average_precision(ranked, relevant),
                r_precision=r_precision(ranked, relevant),
                retrieved=len(ranked),
            )
        )
    map_value = sum(r.average_precision for r in rows) / len(rows) if rows else 0.0
    return rows, map_value


def format_report(
    rows: Sequence[QueryEvaluation], map_value: float, fmt: str = "table"
) -> str:
    """Render the evaluation as an aligned table or machine-readable records."""
    if fmt == "records":
        lines = [
            f"query={r.query_id} ap={r.average_precision:.6f} "
            f"rprec={r.r_precision:.6f} retrieved={r.retrieved}"
            for r in rows
        ]
        lines.append(f"map={map_value:.6f}")
        return "\n".join(lines) + "\n"
    if fmt != "table":
        raise ValueError(f"unknown report format {fmt!r}")
    width = max([len("query")] + [len(r.query_id) for r in rows])
    lines = [f"{'query'.ljust(width)}  {'AP':>8}  {'R-prec':>8}  {'retrieved':>9}"]
    for r in rows:
        lines.append(
            f"{r.query_id.ljust(width)}  {r.average_precision:8.4f}  "
            f"{r.r_precision:8.4f}  {r.retrieved:9d}"
        )
    lines.append(f"{'MAP'.ljust(width)}  {map_value:8.4f}")
    return "\n".join(lines) + "\n"
