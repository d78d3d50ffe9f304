"""Domain types for multi-view requirement models, plus invariant validation.

A requirement model bundles one class diagram, a set of sequence diagrams and
per-class state machines. Instances are immutable; constructors normalize all
collections into a canonical order (classes by id, messages by order index,
and so on) so that structurally equal models compare and serialize equal.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence


class RelationshipKind(str, Enum):
    ASSOCIATION = "association"
    AGGREGATION = "aggregation"
    COMPOSITION = "composition"
    GENERALIZATION = "generalization"
    REALIZATION = "realization"
    DEPENDENCY = "dependency"


class StateKind(str, Enum):
    INITIAL = "initial"
    NORMAL = "normal"
    FINAL = "final"


def _coerce(enum_cls, value):
    if isinstance(value, enum_cls):
        return value
    try:
        return enum_cls(value)
    except ValueError:
        allowed = "|".join(m.value for m in enum_cls)
        raise ValueError(f"{value!r} is not one of {allowed}") from None


@dataclass(frozen=True)
class Attribute:
    name: str
    type_name: str = ""


@dataclass(frozen=True)
class Operation:
    name: str
    param_types: tuple[str, ...] = ()
    return_type: str = ""

    def __post_init__(self):
        object.__setattr__(self, "param_types", tuple(self.param_types))


@dataclass(frozen=True)
class ClassDef:
    id: str
    name: str
    attributes: tuple[Attribute, ...] = ()
    operations: tuple[Operation, ...] = ()

    def __post_init__(self):
        object.__setattr__(
            self,
            "attributes",
            tuple(sorted(self.attributes, key=lambda a: (a.name, a.type_name))),
        )
        object.__setattr__(
            self,
            "operations",
            tuple(
                sorted(
                    self.operations,
                    key=lambda o: (o.name, o.param_types, o.return_type),
                )
            ),
        )


@dataclass(frozen=True)
class Relationship:
    source: str
    target: str
    kind: RelationshipKind

    def __post_init__(self):
        object.__setattr__(self, "kind", _coerce(RelationshipKind, self.kind))


@dataclass(frozen=True)
class ClassDiagram:
    classes: tuple[ClassDef, ...] = ()
    relationships: tuple[Relationship, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "classes", tuple(sorted(self.classes, key=lambda c: c.id)))
        object.__setattr__(
            self,
            "relationships",
            tuple(sorted(self.relationships, key=lambda r: (r.source, r.target, r.kind.value))),
        )

    def class_ids(self) -> frozenset[str]:
        return frozenset(c.id for c in self.classes)

    def class_by_id(self, class_id: str) -> ClassDef:
        for c in self.classes:
            if c.id == class_id:
                return c
        raise KeyError(class_id)


@dataclass(frozen=True)
class Lifeline:
    id: str
    class_id: str


@dataclass(frozen=True)
class Message:
    from_lifeline: str
    to_lifeline: str
    operation: str
    order: int


@dataclass(frozen=True)
class SequenceDiagram:
    id: str
    name: str
    lifelines: tuple[Lifeline, ...] = ()
    messages: tuple[Message, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "lifelines", tuple(sorted(self.lifelines, key=lambda l: l.id)))
        object.__setattr__(self, "messages", tuple(sorted(self.messages, key=lambda m: m.order)))

    def lifeline_class(self, lifeline_id: str) -> str:
        for l in self.lifelines:
            if l.id == lifeline_id:
                return l.class_id
        raise KeyError(lifeline_id)


@dataclass(frozen=True)
class State:
    id: str
    name: str
    kind: StateKind = StateKind.NORMAL

    def __post_init__(self):
        object.__setattr__(self, "kind", _coerce(StateKind, self.kind))


@dataclass(frozen=True)
class Transition:
    source: str
    target: str
    trigger: str = ""


@dataclass(frozen=True)
class StateMachine:
    owner_class_id: str
    states: tuple[State, ...] = ()
    transitions: tuple[Transition, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(sorted(self.states, key=lambda s: s.id)))
        object.__setattr__(
            self,
            "transitions",
            tuple(sorted(self.transitions, key=lambda t: (t.source, t.target, t.trigger))),
        )


@dataclass(frozen=True)
class RequirementSpec:
    name: str
    class_diagram: ClassDiagram = field(default_factory=ClassDiagram)
    sequence_diagrams: tuple[SequenceDiagram, ...] = ()
    state_machines: tuple[StateMachine, ...] = ()

    def __post_init__(self):
        object.__setattr__(
            self, "sequence_diagrams", tuple(sorted(self.sequence_diagrams, key=lambda d: d.id))
        )
        object.__setattr__(
            self,
            "state_machines",
            tuple(sorted(self.state_machines, key=lambda m: m.owner_class_id)),
        )

    @property
    def class_count(self) -> int:
        return len(self.class_diagram.classes)

    @property
    def sequence_diagram_count(self) -> int:
        return len(self.sequence_diagrams)

    def machines_by_owner(self) -> dict[str, StateMachine]:
        return {m.owner_class_id: m for m in self.state_machines}


@dataclass(frozen=True)
class Violation:
    """One broken invariant: which element, which rule, human detail."""

    element: str
    rule: str
    detail: str

    def __str__(self) -> str:
        return f"{self.element}: {self.rule} ({self.detail})"


def validate(spec: RequirementSpec) -> list[Violation]:
    """Check every type invariant; violations come back as values, never raised."""
    out: list[Violation] = []
    cd = spec.class_diagram
    class_ids = set()

    for c in cd.classes:
        if not c.id:
            out.append(Violation("class", "empty-class-id", f"class named {c.name!r} has no id"))
            continue
        if c.id in class_ids:
            out.append(Violation(f"class {c.id}", "duplicate-class-id", "id used more than once"))
        class_ids.add(c.id)
        for a in c.attributes:
            if not a.name:
                out.append(
                    Violation(f"class {c.id}", "empty-attribute-name", "attribute with no name")
                )
        for o in c.operations:
            if not o.name:
                out.append(
                    Violation(f"class {c.id}", "empty-operation-name", "operation with no name")
                )

    seen_rel = set()
    for r in cd.relationships:
        where = f"relationship {r.source}->{r.target}"
        for end in (r.source, r.target):
            if end not in class_ids:
                out.append(
                    Violation(where, "dangling-relationship", f"endpoint {end!r} is not a class")
                )
        if r.kind is RelationshipKind.GENERALIZATION and r.source == r.target:
            out.append(Violation(where, "self-generalization", "class generalizes itself"))
        key = (r.source, r.target, r.kind)
        if key in seen_rel:
            out.append(Violation(where, "duplicate-relationship", f"kind {r.kind.value} repeated"))
        seen_rel.add(key)

    sd_ids = set()
    for sd in spec.sequence_diagrams:
        where = f"sequence diagram {sd.id}"
        if sd.id in sd_ids:
            out.append(Violation(where, "duplicate-sequence-diagram-id", "id used more than once"))
        sd_ids.add(sd.id)
        lifeline_ids = set()
        for l in sd.lifelines:
            if l.id in lifeline_ids:
                out.append(
                    Violation(where, "duplicate-lifeline-id", f"lifeline {l.id!r} repeated")
                )
            lifeline_ids.add(l.id)
            if l.class_id not in class_ids:
                out.append(
                    Violation(
                        where,
                        "dangling-lifeline-class",
                        f"lifeline {l.id!r} references missing class {l.class_id!r}",
                    )
                )
        prev_order = None
        for m in sd.messages:
            if not m.operation:
                out.append(Violation(where, "empty-message-operation", "message with no operation"))
            if m.order < 1:
                out.append(
                    Violation(where, "message-order-not-positive", f"order {m.order} < 1")
                )
            for end in (m.from_lifeline, m.to_lifeline):
                if end not in lifeline_ids:
                    out.append(
                        Violation(
                            where,
                            "dangling-message-lifeline",
                            f"message references missing lifeline {end!r}",
                        )
                    )
            if prev_order is not None and m.order <= prev_order:
                out.append(
                    Violation(
                        where,
                        "message-order-not-increasing",
                        f"order {m.order} follows {prev_order}",
                    )
                )
            prev_order = m.order

    owners = set()
    for sm in spec.state_machines:
        where = f"state machine of {sm.owner_class_id}"
        if sm.owner_class_id not in class_ids:
            out.append(
                Violation(where, "dangling-state-machine-owner", "owner class does not exist")
            )
        if sm.owner_class_id in owners:
            out.append(
                Violation(where, "duplicate-state-machine-owner", "class owns more than one machine")
            )
        owners.add(sm.owner_class_id)
        state_ids = set()
        initial = 0
        for s in sm.states:
            if s.id in state_ids:
                out.append(Violation(where, "duplicate-state-id", f"state {s.id!r} repeated"))
            state_ids.add(s.id)
            if s.kind is StateKind.INITIAL:
                initial += 1
        if sm.states and initial != 1:
            out.append(
                Violation(where, "initial-state-count", f"expected exactly 1 initial, found {initial}")
            )
        for t in sm.transitions:
            for end in (t.source, t.target):
                if end not in state_ids:
                    out.append(
                        Violation(
                            where,
                            "dangling-transition-endpoint",
                            f"transition references missing state {end!r}",
                        )
                    )
    return out


def require_valid(spec: RequirementSpec) -> RequirementSpec:
    """Raise if the model breaks any invariant; convenience for pipeline entry points."""
    from .errors import SpecValidationError

    violations = validate(spec)
    if violations:
        raise SpecValidationError(violations)
    return spec


def make_class(
    id: str,
    name: str | None = None,
    attributes: Iterable[tuple[str, str] | Attribute] = (),
    operations: Iterable[tuple | Operation] = (),
) -> ClassDef:
    """Compact constructor used by tests, fixtures and the corpus generator."""
    attrs = tuple(a if isinstance(a, Attribute) else Attribute(*a) for a in attributes)
    ops = tuple(o if isinstance(o, Operation) else Operation(*o) for o in operations)
    return ClassDef(id=id, name=name if name is not None else id, attributes=attrs, operations=ops)


def make_sequence_diagram(
    id: str,
    lifelines: Sequence[tuple[str, str]],
    messages: Sequence[tuple[str, str, str]],
    name: str | None = None,
) -> SequenceDiagram:
    """Build a diagram from (lifelineId, classId) pairs and ordered message triples."""
    return SequenceDiagram(
        id=id,
        name=name if name is not None else id,
        lifelines=tuple(Lifeline(lid, cid) for lid, cid in lifelines),
        messages=tuple(
            Message(src, dst, op, order)
            for order, (src, dst, op) in enumerate(messages, start=1)
        ),
    )
