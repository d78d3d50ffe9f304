"""Canonical `.rsq` interchange format: a UTF-8 JSON document.

Top-level fields are `name`, `classDiagram{classes[],relationships[]}`,
`sequenceDiagrams[]` and `stateMachines[]`; enumerations are lower-case.
Serialization is deterministic: equal models produce identical bytes
(collections are kept in canonical order by the domain types themselves).
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Any

from .errors import CanonicalSyntaxError, SchemaError, SpecValidationError
from .model import (
    Attribute,
    ClassDef,
    ClassDiagram,
    Lifeline,
    Message,
    Operation,
    RelationshipKind,
    Relationship,
    RequirementSpec,
    SequenceDiagram,
    State,
    StateKind,
    StateMachine,
    Transition,
    validate,
)

FILE_EXTENSION = ".rsq"


def to_document(spec: RequirementSpec) -> dict[str, Any]:
    """Plain-dict form of a model with the canonical field names."""
    return {
        "name": spec.name,
        "classDiagram": {
            "classes": [
                {
                    "id": c.id,
                    "name": c.name,
                    "attributes": [
                        {"name": a.name, "typeName": a.type_name} for a in c.attributes
                    ],
                    "operations": [
                        {
                            "name": o.name,
                            "paramTypeNames": list(o.param_types),
                            "returnTypeName": o.return_type,
                        }
                        for o in c.operations
                    ],
                }
                for c in spec.class_diagram.classes
            ],
            "relationships": [
                {"from": r.source, "to": r.target, "kind": r.kind.value}
                for r in spec.class_diagram.relationships
            ],
        },
        "sequenceDiagrams": [
            {
                "id": d.id,
                "name": d.name,
                "lifelines": [
                    {"lifelineId": l.id, "classId": l.class_id} for l in d.lifelines
                ],
                "messages": [
                    {
                        "fromLifeline": m.from_lifeline,
                        "toLifeline": m.to_lifeline,
                        "operation": m.operation,
                        "order": m.order,
                    }
                    for m in d.messages
                ],
            }
            for d in spec.sequence_diagrams
        ],
        "stateMachines": [
            {
                "ownerClassId": m.owner_class_id,
                "states": [
                    {"stateId": s.id, "name": s.name, "kind": s.kind.value} for s in m.states
                ],
                "transitions": [
                    {"fromState": t.source, "toState": t.target, "trigger": t.trigger}
                    for t in m.transitions
                ],
            }
            for m in spec.state_machines
        ],
    }


def serialize_canonical(spec: RequirementSpec) -> bytes:
    """Deterministic UTF-8 bytes; equal models serialize byte-identically."""
    text = json.dumps(to_document(spec), indent=2, ensure_ascii=False)
    return (text + "\n").encode("utf-8")


def content_hash(spec: RequirementSpec) -> str:
    """SHA-256 hex digest of the canonical serialization."""
    return hashlib.sha256(serialize_canonical(spec)).hexdigest()


class _Reader:
    """Strict schema walker producing field-precise errors."""

    def __init__(self, doc: Any):
        self.doc = doc

    def obj(self, value: Any, where: str, allowed: set[str]) -> dict:
        if not isinstance(value, dict):
            raise SchemaError(where, f"expected object, got {type(value).__name__}")
        unknown = set(value) - allowed
        if unknown:
            raise SchemaError(where, f"unknown field(s) {sorted(unknown)!r}")
        return value

    def field(self, obj: dict, where: str, name: str) -> Any:
        if name not in obj:
            raise SchemaError(f"{where}.{name}" if where else name, "required field missing")
        return obj[name]

    def str_field(self, obj: dict, where: str, name: str) -> str:
        v = self.field(obj, where, name)
        if not isinstance(v, str):
            raise SchemaError(_join(where, name), f"expected string, got {type(v).__name__}")
        return v

    def int_field(self, obj: dict, where: str, name: str) -> int:
        v = self.field(obj, where, name)
        if isinstance(v, bool) or not isinstance(v, int):
            raise SchemaError(_join(where, name), f"expected integer, got {type(v).__name__}")
        return v

    def list_field(self, obj: dict, where: str, name: str) -> list:
        v = self.field(obj, where, name)
        if not isinstance(v, list):
            raise SchemaError(_join(where, name), f"expected array, got {type(v).__name__}")
        return v

    def enum_field(self, obj: dict, where: str, name: str, enum_cls) -> Any:
        v = self.str_field(obj, where, name)
        try:
            return enum_cls(v)
        except ValueError:
            allowed = "|".join(m.value for m in enum_cls)
            raise SchemaError(_join(where, name), f"{v!r} is not one of {allowed}") from None


def _join(where: str, name: str) -> str:
    return f"{where}.{name}" if where else name


def parse_canonical(data: bytes | str) -> RequirementSpec:
    """Parse canonical bytes/text; the result is guaranteed to validate cleanly.

    Raises CanonicalSyntaxError (with line/column) on malformed JSON,
    SchemaError naming the offending field, or SpecValidationError bundling
    the violated invariants.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise CanonicalSyntaxError(exc.msg, exc.lineno, exc.colno) from None

    r = _Reader(doc)
    top = r.obj(doc, "", {"name", "classDiagram", "sequenceDiagrams", "stateMachines"})
    name = r.str_field(top, "", "name")

    cd_obj = r.obj(r.field(top, "", "classDiagram"), "classDiagram", {"classes", "relationships"})
    classes = []
    for i, c in enumerate(r.list_field(cd_obj, "classDiagram", "classes")):
        where = f"classDiagram.classes[{i}]"
        c = r.obj(c, where, {"id", "name", "attributes", "operations"})
        for optional in ("attributes", "operations"):
            if optional in c and not isinstance(c[optional], list):
                raise SchemaError(f"{where}.{optional}", "expected array")
        attrs = []
        for j, a in enumerate(c.get("attributes", [])):
            a = r.obj(a, f"{where}.attributes[{j}]", {"name", "typeName"})
            attrs.append(
                Attribute(
                    r.str_field(a, f"{where}.attributes[{j}]", "name"),
                    a.get("typeName", "") or "",
                )
            )
        ops = []
        for j, o in enumerate(c.get("operations", [])):
            owhere = f"{where}.operations[{j}]"
            o = r.obj(o, owhere, {"name", "paramTypeNames", "returnTypeName"})
            params = o.get("paramTypeNames", [])
            if not isinstance(params, list) or not all(isinstance(p, str) for p in params):
                raise SchemaError(f"{owhere}.paramTypeNames", "expected array of strings")
            ops.append(
                Operation(
                    r.str_field(o, owhere, "name"),
                    tuple(params),
                    o.get("returnTypeName", "") or "",
                )
            )
        classes.append(
            ClassDef(
                id=r.str_field(c, where, "id"),
                name=r.str_field(c, where, "name"),
                attributes=tuple(attrs),
                operations=tuple(ops),
            )
        )
    rels = []
    for i, rel in enumerate(r.list_field(cd_obj, "classDiagram", "relationships")):
        where = f"classDiagram.relationships[{i}]"
        rel = r.obj(rel, where, {"from", "to", "kind"})
        rels.append(
            Relationship(
                source=r.str_field(rel, where, "from"),
                target=r.str_field(rel, where, "to"),
                kind=r.enum_field(rel, where, "kind", RelationshipKind),
            )
        )

    diagrams = []
    for i, d in enumerate(r.list_field(top, "", "sequenceDiagrams")):
        where = f"sequenceDiagrams[{i}]"
        d = r.obj(d, where, {"id", "name", "lifelines", "messages"})
        lifelines = []
        for j, l in enumerate(r.list_field(d, where, "lifelines")):
            lwhere = f"{where}.lifelines[{j}]"
            l = r.obj(l, lwhere, {"lifelineId", "classId"})
            lifelines.append(
                Lifeline(r.str_field(l, lwhere, "lifelineId"), r.str_field(l, lwhere, "classId"))
            )
        messages = []
        for j, m in enumerate(r.list_field(d, where, "messages")):
            mwhere = f"{where}.messages[{j}]"
            m = r.obj(m, mwhere, {"fromLifeline", "toLifeline", "operation", "order"})
            messages.append(
                Message(
                    from_lifeline=r.str_field(m, mwhere, "fromLifeline"),
                    to_lifeline=r.str_field(m, mwhere, "toLifeline"),
                    operation=r.str_field(m, mwhere, "operation"),
                    order=r.int_field(m, mwhere, "order"),
                )
            )
        diagrams.append(
            SequenceDiagram(
                id=r.str_field(d, where, "id"),
                name=r.str_field(d, where, "name"),
                lifelines=tuple(lifelines),
                messages=tuple(messages),
            )
        )

    machines = []
    for i, m in enumerate(r.list_field(top, "", "stateMachines")):
        where = f"stateMachines[{i}]"
        m = r.obj(m, where, {"ownerClassId", "states", "transitions"})
        states = []
        for j, s in enumerate(r.list_field(m, where, "states")):
            swhere = f"{where}.states[{j}]"
            s = r.obj(s, swhere, {"stateId", "name", "kind"})
            states.append(
                State(
                    id=r.str_field(s, swhere, "stateId"),
                    name=r.str_field(s, swhere, "name"),
                    kind=r.enum_field(s, swhere, "kind", StateKind),
                )
            )
        transitions = []
        for j, t in enumerate(r.list_field(m, where, "transitions")):
            twhere = f"{where}.transitions[{j}]"
            t = r.obj(t, twhere, {"fromState", "toState", "trigger"})
            transitions.append(
                Transition(
                    source=r.str_field(t, twhere, "fromState"),
                    target=r.str_field(t, twhere, "toState"),
                    trigger=t.get("trigger", "") or "",
                )
            )
        machines.append(
            StateMachine(
                owner_class_id=r.str_field(m, where, "ownerClassId"),
                states=tuple(states),
                transitions=tuple(transitions),
            )
        )

    spec = RequirementSpec(
        name=name,
        class_diagram=ClassDiagram(classes=tuple(classes), relationships=tuple(rels)),
        sequence_diagrams=tuple(diagrams),
        state_machines=tuple(machines),
    )
    violations = validate(spec)
    if violations:
        raise SpecValidationError(violations)
    return spec


def load_spec(path: str | Path) -> RequirementSpec:
    return parse_canonical(Path(path).read_bytes())


def save_spec(spec: RequirementSpec, path: str | Path) -> None:
    Path(path).write_bytes(serialize_canonical(spec))
