"""File-backed model store with a metadata index and the retrieval pipeline.

Layout: `<repo>/index.rsx` (JSON index of RepoIndexEntry records) plus one
canonical `.rsq` file per model under `<repo>/models/`. Retrieval never
writes; adding takes an advisory lock and replaces the index atomically.
"""

from __future__ import annotations

import fcntl
import hashlib
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable

from .canonical import load_spec, parse_canonical, serialize_canonical
from .errors import (
    DuplicateContentError,
    DuplicateModelError,
    RepositoryError,
)
from .matching import GAConfig, MappingPair, Matcher, MatchResult
from .metadata import Metadata, PrefilterConfig, compute_metadata, prefilter_pass
from .model import RequirementSpec, require_valid
from .scoring import ScoreBreakdown, ScoringConfig, ViewWeights

logger = logging.getLogger(__name__)

INDEX_NAME = "index.rsx"
MODELS_DIR = "models"
_INDEX_VERSION = 1


@dataclass(frozen=True)
class RepoIndexEntry:
    model_id: str
    relative_path: str
    content_hash: str
    metadata: Metadata

    def to_dict(self) -> dict[str, Any]:
        return {
            "modelId": self.model_id,
            "relativePath": self.relative_path,
            "contentHash": self.content_hash,
            "metadata": self.metadata.to_dict(),
        }

    @classmethod
    def from_dict(cls, doc: dict[str, Any]) -> "RepoIndexEntry":
        return cls(
            model_id=doc["modelId"],
            relative_path=doc["relativePath"],
            content_hash=doc["contentHash"],
            metadata=Metadata.from_dict(doc["metadata"]),
        )


@dataclass(frozen=True)
class RankedResult:
    """One retrieval row; unscored rows (filtered out) carry the reason instead."""

    model_id: str
    scores: ScoreBreakdown | None
    mapping: MappingPair | None
    prefiltered: bool
    reason: str = ""


def _index_path(repo_dir: Path) -> Path:
    return repo_dir / INDEX_NAME


def init_repo(repo_dir: str | Path) -> Path:
    repo_dir = Path(repo_dir)
    if _index_path(repo_dir).exists():
        raise RepositoryError(f"repository already initialized at {repo_dir}")
    (repo_dir / MODELS_DIR).mkdir(parents=True, exist_ok=True)
    _write_index(repo_dir, [])
    return repo_dir


def _require_repo(repo_dir: str | Path) -> Path:
    repo_dir = Path(repo_dir)
    if not _index_path(repo_dir).exists():
        raise RepositoryError(f"no repository at {repo_dir} (missing {INDEX_NAME})")
    return repo_dir


def _read_index(repo_dir: Path) -> list[RepoIndexEntry]:
    path = _index_path(repo_dir)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
        entries = [RepoIndexEntry.from_dict(e) for e in doc["models"]]
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        raise RepositoryError(f"corrupt repository index {path}: {exc}") from None
    return sorted(entries, key=lambda e: e.model_id)


def _write_index(repo_dir: Path, entries: Iterable[RepoIndexEntry]) -> None:
    doc = {
        "version": _INDEX_VERSION,
        "models": [e.to_dict() for e in sorted(entries, key=lambda e: e.model_id)],
    }
    path = _index_path(repo_dir)
    tmp = path.with_suffix(".rsx.tmp")
    tmp.write_text(json.dumps(doc, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    os.replace(tmp, path)


@contextmanager
def _repo_lock(repo_dir: Path):
    lock_path = repo_dir / ".lock"
    with open(lock_path, "a+") as handle:
        fcntl.flock(handle, fcntl.LOCK_EX)
        try:
            yield
        finally:
            fcntl.flock(handle, fcntl.LOCK_UN)


def _slug(name: str) -> str:
    cleaned = "".join(ch if ch.isalnum() else "-" for ch in name.lower()).strip("-")
    while "--" in cleaned:
        cleaned = cleaned.replace("--", "-")
    return cleaned or "model"


def list_models(repo_dir: str | Path) -> list[RepoIndexEntry]:
    return _read_index(_require_repo(repo_dir))


def load_model(repo_dir: str | Path, model_id: str) -> RequirementSpec:
    repo_dir = _require_repo(repo_dir)
    for entry in _read_index(repo_dir):
        if entry.model_id == model_id:
            return load_spec(repo_dir / entry.relative_path)
    raise RepositoryError(f"model {model_id!r} not found in repository {repo_dir}")


def add_model(
    repo_dir: str | Path,
    spec: RequirementSpec,
    *,
    model_id: str | None = None,
    check_duplicate: bool = False,
    dup_threshold: float = 0.98,
    force: bool = False,
    weights: ViewWeights | None = None,
    ga_config: GAConfig | None = None,
    scoring: ScoringConfig | None = None,
) -> str:
    """Store a model and index its metadata; returns the assigned model id.

    Byte-identical duplicates are always rejected. With `check_duplicate`,
    any existing model whose matched aggregate reaches `dup_threshold` also
    rejects the addition unless `force` is set.
    """
    repo_dir = _require_repo(repo_dir)
    require_valid(spec)
    payload = serialize_canonical(spec)
    digest = hashlib.sha256(payload).hexdigest()

    with _repo_lock(repo_dir):
        entries = _read_index(repo_dir)
        for entry in entries:
            if entry.content_hash == digest:
                raise DuplicateContentError(entry.model_id)
        if check_duplicate and not force and entries:
            found = check_duplicate_of(
                repo_dir, spec, dup_threshold,
                weights=weights, ga_config=ga_config, scoring=scoring,
            )
            if found is not None:
                raise DuplicateModelError(found[0], found[1], dup_threshold)

        taken = {entry.model_id for entry in entries}
        if model_id is not None:
            if model_id in taken:
                raise RepositoryError(f"model id {model_id!r} already used in this repository")
        else:
            base = f"{_slug(spec.name)}-{digest[:8]}"
            model_id = base
            width = 8
            while model_id in taken:
                width += 4
                model_id = f"{_slug(spec.name)}-{digest[:width]}"
        relative = f"{MODELS_DIR}/{model_id}.rsq"
        target = repo_dir / relative
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_bytes(payload)
        entries.append(
            RepoIndexEntry(
                model_id=model_id,
                relative_path=relative,
                content_hash=digest,
                metadata=compute_metadata(spec),
            )
        )
        _write_index(repo_dir, entries)
    return model_id


def _match_candidate(
    query: RequirementSpec,
    candidate: RequirementSpec,
    method: str,
    weights: ViewWeights | None,
    ga_config: GAConfig | None,
    scoring: ScoringConfig | None,
) -> MatchResult:
    matcher = Matcher(query, candidate, weights, scoring)
    if method == "exhaustive":
        return matcher.exhaustive()
    if method == "hungarian-functional":
        return matcher.ga_hungarian_functional(ga_config)
    if method == "ga":
        return matcher.ga(ga_config)
    raise ValueError(f"unknown match method {method!r}")


_worker_state: dict[str, Any] = {}


def _pool_init(query_bytes: bytes, method: str, weights, ga_config, scoring) -> None:
    _worker_state["query"] = parse_canonical(query_bytes)
    _worker_state["method"] = method
    _worker_state["weights"] = weights
    _worker_state["ga"] = ga_config
    _worker_state["scoring"] = scoring


def _pool_score(task: tuple[str, str, str]):
    model_id, path, expected_hash = task
    payload = Path(path).read_bytes()
    if hashlib.sha256(payload).hexdigest() != expected_hash:
        return model_id, None
    result = _match_candidate(
        _worker_state["query"],
        parse_canonical(payload),
        _worker_state["method"],
        _worker_state["weights"],
        _worker_state["ga"],
        _worker_state["scoring"],
    )
    return model_id, result


def retrieve(
    repo_dir: str | Path,
    query: RequirementSpec,
    *,
    weights: ViewWeights | None = None,
    ga_config: GAConfig | None = None,
    scoring: ScoringConfig | None = None,
    prefilter: PrefilterConfig | None = None,
    use_prefilter: bool = True,
    top_n: int | None = 10,
    method: str = "ga",
    include_excluded: bool = False,
    jobs: int = 1,
) -> list[RankedResult]:
    """Rank repository models against a query: pre-filter, match, sort.

    Results come back sorted by aggregate descending (ties by model id); with
    `include_excluded`, pre-filtered entries follow with `prefiltered=False`.
    Entries whose stored bytes no longer match their indexed hash are skipped
    with a logged warning.
    """
    repo_dir = _require_repo(repo_dir)
    require_valid(query)
    entries = _read_index(repo_dir)
    query_meta = compute_metadata(query)

    survivors: list[RepoIndexEntry] = []
    excluded: list[RankedResult] = []
    for entry in entries:
        if use_prefilter:
            decision = prefilter_pass(query_meta, entry.metadata, prefilter)
            if not decision.passed:
                excluded.append(
                    RankedResult(
                        model_id=entry.model_id,
                        scores=None,
                        mapping=None,
                        prefiltered=False,
                        reason=decision.reason,
                    )
                )
                continue
        survivors.append(entry)

    scored: list[tuple[str, MatchResult]] = []
    if jobs > 1 and len(survivors) > 1:
        tasks = [
            (e.model_id, str(repo_dir / e.relative_path), e.content_hash) for e in survivors
        ]
        with ProcessPoolExecutor(
            max_workers=jobs,
            initializer=_pool_init,
            initargs=(serialize_canonical(query), method, weights, ga_config, scoring),
        ) as pool:
            for model_id, result in pool.map(_pool_score, tasks, chunksize=8):
                if result is None:
                    logger.warning("skipping %s: content hash mismatch", model_id)
                    continue
                scored.append((model_id, result))
    else:
        for entry in survivors:
            path = repo_dir / entry.relative_path
            try:
                payload = path.read_bytes()
            except OSError as exc:
                logger.warning("skipping %s: cannot read %s (%s)", entry.model_id, path, exc)
                continue
            if hashlib.sha256(payload).hexdigest() != entry.content_hash:
                logger.warning("skipping %s: content hash mismatch", entry.model_id)
                continue
            candidate = parse_canonical(payload)
            scored.append(
                (
                    entry.model_id,
                    _match_candidate(query, candidate, method, weights, ga_config, scoring),
                )
            )

    scored.sort(key=lambda item: (-item[1].scores.aggregate, item[0]))
    if top_n is not None:
        scored = scored[:top_n]
    results = [
        RankedResult(
            model_id=model_id,
            scores=result.scores,
            mapping=result.mapping,
            prefiltered=True,
        )
        for model_id, result in scored
    ]
    if include_excluded:
        results.extend(sorted(excluded, key=lambda r: r.model_id))
    return results


def check_duplicate_of(
    repo_dir: str | Path,
    spec: RequirementSpec,
    threshold: float = 0.98,
    *,
    weights: ViewWeights | None = None,
    ga_config: GAConfig | None = None,
    scoring: ScoringConfig | None = None,
) -> tuple[str, float] | None:
    """Most similar stored model if it reaches the threshold, else None.

    Scans every entry (no pre-filter: correctness over speed for the
    integration guard); byte-identical content short-circuits to 1.0.
    """
    repo_dir = _require_repo(repo_dir)
    require_valid(spec)
    digest = hashlib.sha256(serialize_canonical(spec)).hexdigest()
    best: tuple[float, str] | None = None
    for entry in _read_index(repo_dir):
        if entry.content_hash == digest:
            return entry.model_id, 1.0
        path = repo_dir / entry.relative_path
        try:
            candidate = load_spec(path)
        except OSError as exc:
            logger.warning("skipping %s: cannot read %s (%s)", entry.model_id, path, exc)
            continue
        result = _match_candidate(spec, candidate, "ga", weights, ga_config, scoring)
        score = result.scores.aggregate
        if best is None or score > best[0] or (score == best[0] and entry.model_id < best[1]):
            best = (score, entry.model_id)
    if best is not None and best[0] >= threshold:
        return best[1], best[0]
    return None
