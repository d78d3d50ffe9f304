"""Similarity scoring for a fixed entity mapping.

Each view gets its own measure (structural over class diagrams, functional
over mapped sequence diagrams, behavioral over the state machines that the
class mapping implies), plus a weighted aggregate. All scores live in [0,1]
and are exactly symmetric: pair-level helpers canonicalize argument order so
tie-breaking can never depend on which model came first.
"""

from __future__ import annotations

import functools
from dataclasses import astuple, dataclass, field
from itertools import combinations
from typing import Callable, Mapping, Sequence

from .assignment import hungarian
from .errors import MappingError
from .model import (
    ClassDef,
    ClassDiagram,
    RelationshipKind,
    RequirementSpec,
    SequenceDiagram,
    StateMachine,
)
from .text import jaccard, levenshtein, normalize, token_set

KIND_NONE = "none"

# Index order shared with the matcher's precomputed tables; "none" is 0.
KIND_ORDER: tuple[str, ...] = (KIND_NONE,) + tuple(k.value for k in RelationshipKind)

# When several relationships connect one class pair, the effective kind is the
# first of these present (a fixed rule keeps the comparison deterministic).
_KIND_PRIORITY = (
    RelationshipKind.GENERALIZATION,
    RelationshipKind.REALIZATION,
    RelationshipKind.COMPOSITION,
    RelationshipKind.AGGREGATION,
    RelationshipKind.ASSOCIATION,
    RelationshipKind.DEPENDENCY,
)


def _default_difference_table() -> dict[tuple[str, str], float]:
    kinds = [k.value for k in RelationshipKind]
    table: dict[tuple[str, str], float] = {}
    for k in kinds + [KIND_NONE]:
        table[(k, k)] = 0.0
        table[(k, KIND_NONE)] = 1.0
        table[(KIND_NONE, k)] = 1.0
    table[(KIND_NONE, KIND_NONE)] = 0.0
    pairs = [
        ("association", "aggregation", 0.25),
        ("aggregation", "composition", 0.2),
        ("association", "composition", 0.4),
        ("association", "dependency", 0.35),
        ("dependency", "aggregation", 0.5),
        ("dependency", "composition", 0.6),
        ("generalization", "realization", 0.3),
        ("generalization", "dependency", 0.7),
        ("realization", "dependency", 0.7),
    ]
    for hier in ("generalization", "realization"):
        for plain in ("association", "aggregation", "composition"):
            pairs.append((hier, plain, 0.8))
    for a, b, v in pairs:
        table[(a, b)] = v
        table[(b, a)] = v
    return table


DEFAULT_DIFFERENCE_TABLE = _default_difference_table()


@dataclass(frozen=True)
class ViewWeights:
    """Non-negative weights for the three views, summing to 1."""

    structural: float
    functional: float
    behavioral: float

    def __post_init__(self):
        total = self.structural + self.functional + self.behavioral
        if min(self.structural, self.functional, self.behavioral) < 0:
            raise ValueError("view weights must be non-negative")
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"view weights must sum to 1, got {total!r}")

    @classmethod
    def equal(cls) -> "ViewWeights":
        return cls.normalized(1.0, 1.0, 1.0)

    @classmethod
    def normalized(cls, structural: float, functional: float, behavioral: float) -> "ViewWeights":
        total = structural + functional + behavioral
        if total <= 0:
            raise ValueError("at least one view weight must be positive")
        return cls(structural / total, functional / total, behavioral / total)

    @classmethod
    def parse(cls, text: str) -> "ViewWeights":
        parts = text.split(",")
        if len(parts) != 3:
            raise ValueError(f"expected 'wS,wF,wB', got {text!r}")
        return cls.normalized(*(float(p) for p in parts))

    @property
    def as_tuple(self) -> tuple[float, float, float]:
        return (self.structural, self.functional, self.behavioral)


# Default view weighting used whenever none is supplied (CLI default included).
DEFAULT_VIEW_WEIGHTS = ViewWeights.normalized(0.333, 0.333, 0.334)


@dataclass(frozen=True)
class ScoreBreakdown:
    """Per-view scores plus their weighted aggregate, all in [0,1]."""

    structural: float
    functional: float
    behavioral: float
    aggregate: float

    @classmethod
    def compute(
        cls, structural: float, functional: float, behavioral: float, weights: ViewWeights
    ) -> "ScoreBreakdown":
        return cls(
            structural,
            functional,
            behavioral,
            aggregate(structural, functional, behavioral, weights),
        )


@dataclass(frozen=True)
class ScoringConfig:
    """Formula knobs: message-name threshold, component weights, kind table."""

    theta_msg: float = 0.8
    class_name_weight: float = 0.5
    attribute_weight: float = 0.25
    operation_weight: float = 0.25
    class_sim_weight: float = 0.6
    relationship_weight: float = 0.4
    state_weight: float = 0.5
    transition_weight: float = 0.5
    difference_table: Mapping[tuple[str, str], float] = field(
        default_factory=lambda: dict(DEFAULT_DIFFERENCE_TABLE)
    )

    def __post_init__(self):
        if not 0.0 <= self.theta_msg <= 1.0:
            raise ValueError("theta_msg must be in [0,1]")
        for v in self.difference_table.values():
            if not 0.0 <= v <= 1.0:
                raise ValueError("difference table values must be in [0,1]")

    def kind_difference(self, kind1: str, kind2: str) -> float:
        return self.difference_table[(kind1, kind2)]


DEFAULT_SCORING = ScoringConfig()


@functools.lru_cache(maxsize=1 << 16)
def _name_similarity_ordered(a: str, b: str) -> float:
    tokens_part = jaccard(token_set(a), token_set(b))
    na, nb = normalize(a), normalize(b)
    if not na and not nb:
        edit_part = 1.0
    else:
        edit_part = 1.0 - levenshtein(na, nb) / max(len(na), len(nb))
    return 0.5 * tokens_part + 0.5 * edit_part


def name_similarity(a: str, b: str) -> float:
    """Half token-set Jaccard, half normalized edit similarity; symmetric."""
    if a > b:
        a, b = b, a
    return _name_similarity_ordered(a, b)


def member_set_similarity(names1: Sequence[str], names2: Sequence[str]) -> float:
    """Greedy best-pair name similarity, normalized by the larger set size.

    Both sets empty counts as a perfect match; exactly one empty as zero.
    """
    names1, names2 = tuple(names1), tuple(names2)
    n1, n2 = len(names1), len(names2)
    if n1 == 0 and n2 == 0:
        return 1.0
    if n1 == 0 or n2 == 0:
        return 0.0
    if (n2, names2) < (n1, names1):
        names1, names2, n1, n2 = names2, names1, n2, n1
    candidates = sorted(
        ((-name_similarity(a, b), i, j) for i, a in enumerate(names1) for j, b in enumerate(names2)),
    )
    used1 = [False] * n1
    used2 = [False] * n2
    total = 0.0
    picked = 0
    for neg_sim, i, j in candidates:
        if used1[i] or used2[j]:
            continue
        used1[i] = used2[j] = True
        total += -neg_sim
        picked += 1
        if picked == min(n1, n2):
            break
    return total / max(n1, n2)


def class_similarity(c1: ClassDef, c2: ClassDef, cfg: ScoringConfig | None = None) -> float:
    """Name similarity plus member-set similarity of attributes and operations."""
    cfg = cfg or DEFAULT_SCORING
    if astuple(c2) < astuple(c1):
        c1, c2 = c2, c1
    return (
        cfg.class_name_weight * name_similarity(c1.name, c2.name)
        + cfg.attribute_weight
        * member_set_similarity([a.name for a in c1.attributes], [a.name for a in c2.attributes])
        + cfg.operation_weight
        * member_set_similarity([o.name for o in c1.operations], [o.name for o in c2.operations])
    )


def kind_lookup(cd: ClassDiagram) -> dict[tuple[str, str], str]:
    """Effective relationship kind between each unordered class pair."""
    grouped: dict[tuple[str, str], set[RelationshipKind]] = {}
    for r in cd.relationships:
        key = (r.source, r.target) if r.source <= r.target else (r.target, r.source)
        grouped.setdefault(key, set()).add(r.kind)
    out: dict[tuple[str, str], str] = {}
    for key, kinds in grouped.items():
        for kind in _KIND_PRIORITY:
            if kind in kinds:
                out[key] = kind.value
                break
    return out


def _pair_key(a: str, b: str) -> tuple[str, str]:
    return (a, b) if a <= b else (b, a)


def _check_class_map(
    cd1: ClassDiagram, cd2: ClassDiagram, class_map: Mapping[str, str]
) -> list[tuple[str, str]]:
    ids1, ids2 = cd1.class_ids(), cd2.class_ids()
    values = list(class_map.values())
    if len(set(values)) != len(values):
        raise MappingError("class mapping is not injective")
    for k, v in class_map.items():
        if k not in ids1:
            raise MappingError(f"mapped class {k!r} does not exist in the first diagram")
        if v not in ids2:
            raise MappingError(f"mapped class {v!r} does not exist in the second diagram")
    expected = min(len(ids1), len(ids2))
    if len(class_map) != expected:
        raise MappingError(
            f"class mapping must cover the smaller diagram: expected {expected} pairs, "
            f"got {len(class_map)}"
        )
    return sorted(class_map.items())


def structural_similarity(
    cd1: ClassDiagram,
    cd2: ClassDiagram,
    class_map: Mapping[str, str],
    cfg: ScoringConfig | None = None,
) -> float:
    """Coverage-scaled blend of mapped class similarity and relationship agreement.

    `class_map` maps first-diagram class ids to second-diagram class ids and
    must cover the smaller diagram injectively.
    """
    cfg = cfg or DEFAULT_SCORING
    pairs = _check_class_map(cd1, cd2, class_map)
    c1, c2 = len(cd1.classes), len(cd2.classes)
    if c1 == 0 and c2 == 0:
        return 1.0
    if not pairs:
        return 0.0
    if astuple(cd2) < astuple(cd1):
        return structural_similarity(cd2, cd1, {v: k for k, v in class_map.items()}, cfg)

    by_id1 = {c.id: c for c in cd1.classes}
    by_id2 = {c.id: c for c in cd2.classes}
    coverage = 2 * len(pairs) / (c1 + c2)
    avg_class = sum(class_similarity(by_id1[a], by_id2[b], cfg) for a, b in pairs) / len(pairs)

    kinds1 = kind_lookup(cd1)
    kinds2 = kind_lookup(cd2)
    acc = 0.0
    counted = 0
    for (a1, a2), (b1, b2) in combinations(pairs, 2):
        k1 = kinds1.get(_pair_key(a1, b1), KIND_NONE)
        k2 = kinds2.get(_pair_key(a2, b2), KIND_NONE)
        if k1 == KIND_NONE and k2 == KIND_NONE:
            continue
        acc += 1.0 - cfg.kind_difference(k1, k2)
        counted += 1
    rel_sim = acc / counted if counted else 1.0
    return coverage * (cfg.class_sim_weight * avg_class + cfg.relationship_weight * rel_sim)


def lcs_length(n1: int, n2: int, match: Callable[[int, int], bool]) -> int:
    """Longest common subsequence length under an arbitrary match predicate."""
    prev = [0] * (n2 + 1)
    for i in range(1, n1 + 1):
        cur = [0] * (n2 + 1)
        for j in range(1, n2 + 1):
            if match(i - 1, j - 1):
                cur[j] = prev[j - 1] + 1
            else:
                cur[j] = prev[j] if prev[j] >= cur[j - 1] else cur[j - 1]
        prev = cur
    return prev[n2]


def _resolved_messages(sd: SequenceDiagram) -> list[tuple[str, str, str]]:
    lifelines = {l.id: l.class_id for l in sd.lifelines}
    try:
        return [(lifelines[m.from_lifeline], lifelines[m.to_lifeline], m.operation) for m in sd.messages]
    except KeyError as exc:
        raise MappingError(f"lifeline {exc.args[0]!r} has no class in diagram {sd.id!r}") from None


def sequence_diagram_similarity(
    sd1: SequenceDiagram,
    sd2: SequenceDiagram,
    class_map: Mapping[str, str],
    cfg: ScoringConfig | None = None,
) -> float:
    """Order-aware message agreement: 2*LCS/(m1+m2) over mapped sender/receiver pairs."""
    cfg = cfg or DEFAULT_SCORING
    msgs1 = _resolved_messages(sd1)
    msgs2 = _resolved_messages(sd2)
    if not msgs1 and not msgs2:
        return 1.0
    if not msgs1 or not msgs2:
        return 0.0
    theta = cfg.theta_msg

    def match(i: int, j: int) -> bool:
        s1, r1, op1 = msgs1[i]
        s2, r2, op2 = msgs2[j]
        return (
            class_map.get(s1) == s2
            and class_map.get(r1) == r2
            and name_similarity(op1, op2) >= theta
        )

    lcs = lcs_length(len(msgs1), len(msgs2), match)
    return 2 * lcs / (len(msgs1) + len(msgs2))


def _check_sd_map(
    m1: RequirementSpec, m2: RequirementSpec, sd_map: Mapping[str, str]
) -> list[tuple[str, str]]:
    ids1 = {d.id for d in m1.sequence_diagrams}
    ids2 = {d.id for d in m2.sequence_diagrams}
    values = list(sd_map.values())
    if len(set(values)) != len(values):
        raise MappingError("sequence-diagram mapping is not injective")
    for k, v in sd_map.items():
        if k not in ids1 or v not in ids2:
            raise MappingError(f"sequence-diagram pair ({k!r}, {v!r}) does not resolve")
    if len(sd_map) != min(len(ids1), len(ids2)):
        raise MappingError("sequence-diagram mapping must cover the smaller model")
    return sorted(sd_map.items())


def functional_similarity(
    m1: RequirementSpec,
    m2: RequirementSpec,
    class_map: Mapping[str, str],
    sd_map: Mapping[str, str],
    cfg: ScoringConfig | None = None,
) -> float:
    """Mean mapped-diagram similarity, normalized by the larger diagram count."""
    cfg = cfg or DEFAULT_SCORING
    _check_class_map(m1.class_diagram, m2.class_diagram, class_map)
    pairs = _check_sd_map(m1, m2, sd_map)
    s1, s2 = len(m1.sequence_diagrams), len(m2.sequence_diagrams)
    if s1 == 0 and s2 == 0:
        return 1.0
    by_id1 = {d.id: d for d in m1.sequence_diagrams}
    by_id2 = {d.id: d for d in m2.sequence_diagrams}
    total = sum(
        sequence_diagram_similarity(by_id1[a], by_id2[b], class_map, cfg) for a, b in pairs
    )
    return total / max(s1, s2)


def state_machine_similarity(
    sm1: StateMachine, sm2: StateMachine, cfg: ScoringConfig | None = None
) -> float:
    """State-name assignment quality plus matched-transition share."""
    cfg = cfg or DEFAULT_SCORING
    if astuple(sm2) < astuple(sm1):
        sm1, sm2 = sm2, sm1
    n1, n2 = len(sm1.states), len(sm2.states)
    t1, t2 = len(sm1.transitions), len(sm2.transitions)
    if n1 + n2 == 0:
        return 1.0

    if n1 == 0 or n2 == 0:
        state_score = 0.0
        assigned: dict[int, int] = {}
    else:
        sims = [
            [name_similarity(a.name, b.name) for b in sm2.states] for a in sm1.states
        ]
        assigned, _ = hungarian([[1.0 - v for v in row] for row in sims])
        state_score = sum(sims[i][j] for i, j in assigned.items()) / max(n1, n2)

    if t1 + t2 == 0:
        trans_score = 1.0
    else:
        id_map = {
            sm1.states[i].id: sm2.states[j].id for i, j in assigned.items()
        }
        used = [False] * t2
        matched = 0
        for t in sm1.transitions:
            for idx, u in enumerate(sm2.transitions):
                if used[idx]:
                    continue
                if (
                    id_map.get(t.source) == u.source
                    and id_map.get(t.target) == u.target
                    and name_similarity(t.trigger, u.trigger) >= cfg.theta_msg
                ):
                    used[idx] = True
                    matched += 1
                    break
        trans_score = 2 * matched / (t1 + t2)
    return cfg.state_weight * state_score + cfg.transition_weight * trans_score


def behavioral_similarity(
    m1: RequirementSpec,
    m2: RequirementSpec,
    class_map: Mapping[str, str],
    cfg: ScoringConfig | None = None,
) -> float:
    """Average machine similarity over class pairs where either side has one.

    Machines of unmapped classes count as zero-scoring entries; no machines
    anywhere is vacuously perfect.
    """
    cfg = cfg or DEFAULT_SCORING
    pairs = _check_class_map(m1.class_diagram, m2.class_diagram, class_map)
    machines1 = m1.machines_by_owner()
    machines2 = m2.machines_by_owner()
    total = 0.0
    counted = 0
    for a, b in pairs:
        sm1, sm2 = machines1.get(a), machines2.get(b)
        if sm1 is None and sm2 is None:
            continue
        counted += 1
        if sm1 is not None and sm2 is not None:
            total += state_machine_similarity(sm1, sm2, cfg)
    mapped1 = set(class_map.keys())
    mapped2 = set(class_map.values())
    counted += sum(1 for owner in machines1 if owner not in mapped1)
    counted += sum(1 for owner in machines2 if owner not in mapped2)
    if counted == 0:
        return 1.0
    return total / counted


def aggregate(
    structural: float, functional: float, behavioral: float, weights: ViewWeights
) -> float:
    """Weighted scalarization of the three view scores."""
    return (
        weights.structural * structural
        + weights.functional * functional
        + weights.behavioral * behavioral
    )
