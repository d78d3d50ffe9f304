"""Per-model size/domain metadata and the cheap retrieval pre-filter."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from .model import RequirementSpec, StateMachine
from .text import jaccard, tokenize


@dataclass(frozen=True)
class Metadata:
    """Computed size metrics plus extracted domain tokens for one model."""

    class_count: int
    total_attribute_count: int
    total_operation_count: int
    sequence_diagram_count: int
    total_message_count: int
    state_machine_complexities: tuple[int, ...]
    domain_tokens: frozenset[str]

    def to_dict(self) -> dict[str, Any]:
        return {
            "classCount": self.class_count,
            "totalAttributeCount": self.total_attribute_count,
            "totalOperationCount": self.total_operation_count,
            "sequenceDiagramCount": self.sequence_diagram_count,
            "totalMessageCount": self.total_message_count,
            "stateMachineCyclomaticComplexities": list(self.state_machine_complexities),
            "domainTokens": sorted(self.domain_tokens),
        }

    @classmethod
    def from_dict(cls, doc: dict[str, Any]) -> "Metadata":
        return cls(
            class_count=int(doc["classCount"]),
            total_attribute_count=int(doc["totalAttributeCount"]),
            total_operation_count=int(doc["totalOperationCount"]),
            sequence_diagram_count=int(doc["sequenceDiagramCount"]),
            total_message_count=int(doc["totalMessageCount"]),
            state_machine_complexities=tuple(
                int(v) for v in doc["stateMachineCyclomaticComplexities"]
            ),
            domain_tokens=frozenset(doc["domainTokens"]),
        )


@dataclass(frozen=True)
class PrefilterConfig:
    """Thresholds for the metadata screen applied before any matching."""

    size_tolerance: float = 0.5
    domain_filter_enabled: bool = False
    min_token_jaccard: float = 0.1

    def __post_init__(self):
        if not 0.0 <= self.size_tolerance <= 1.0:
            raise ValueError(f"size_tolerance must be in [0,1], got {self.size_tolerance}")
        if not 0.0 <= self.min_token_jaccard <= 1.0:
            raise ValueError(f"min_token_jaccard must be in [0,1], got {self.min_token_jaccard}")


@dataclass(frozen=True)
class PrefilterDecision:
    passed: bool
    reason: str


def cyclomatic_complexity(machine: StateMachine) -> int:
    """E - N + 2P over the machine's undirected state graph."""
    states = [s.id for s in machine.states]
    if not states:
        return 0
    index = {sid: i for i, sid in enumerate(states)}
    parent = list(range(len(states)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for t in machine.transitions:
        a, b = find(index[t.source]), find(index[t.target])
        if a != b:
            parent[a] = b
    components = sum(1 for i, p in enumerate(parent) if find(i) == i)
    return len(machine.transitions) - len(states) + 2 * components


def domain_tokens(spec: RequirementSpec) -> frozenset[str]:
    """Tokens of class names and package-like dotted prefixes, lower-cased."""
    tokens: set[str] = set()
    for c in spec.class_diagram.classes:
        for part in c.name.replace("::", ".").split("."):
            tokens.update(tokenize(part))
    return frozenset(t for t in tokens if t)


def compute_metadata(spec: RequirementSpec) -> Metadata:
    classes = spec.class_diagram.classes
    return Metadata(
        class_count=len(classes),
        total_attribute_count=sum(len(c.attributes) for c in classes),
        total_operation_count=sum(len(c.operations) for c in classes),
        sequence_diagram_count=len(spec.sequence_diagrams),
        total_message_count=sum(len(d.messages) for d in spec.sequence_diagrams),
        state_machine_complexities=tuple(
            cyclomatic_complexity(m) for m in spec.state_machines
        ),
        domain_tokens=domain_tokens(spec),
    )


def relative_difference(x: int, y: int) -> float:
    """|x - y| / max(x, y, 1); symmetric and safe for empty models."""
    return abs(x - y) / max(x, y, 1)


def prefilter_pass(
    query: Metadata, candidate: Metadata, cfg: PrefilterConfig | None = None
) -> PrefilterDecision:
    """Reject a candidate whose size differs too much or whose domain is disjoint.

    Identical metadata always passes, so a stored duplicate of the query can
    never be filtered away.
    """
    cfg = cfg or PrefilterConfig()
    checks = (
        ("classCount", query.class_count, candidate.class_count),
        ("totalMessageCount", query.total_message_count, candidate.total_message_count),
    )
    for label, a, b in checks:
        diff = relative_difference(a, b)
        if diff > cfg.size_tolerance:
            return PrefilterDecision(
                False, f"size({label}): {diff:.3f} > {cfg.size_tolerance:g}"
            )
    if cfg.domain_filter_enabled:
        overlap = jaccard(query.domain_tokens, candidate.domain_tokens)
        if overlap < cfg.min_token_jaccard:
            return PrefilterDecision(
                False, f"domain: jaccard {overlap:.3f} < {cfg.min_token_jaccard:g}"
            )
    return PrefilterDecision(True, "pass")
