"""Import of a documented XMI subset (UML 2.x-style `xmi:type` dialect).

Recognized element kinds: Class (with Property attributes and Operations),
Association, Generalization, Dependency, Interaction (Lifeline, Message via
occurrence fragments), and StateMachine owned by a class (State, initial
Pseudostate, FinalState, Transition). Anything else is skipped with a
warning; real-world XMI varies too much by tool to chase full fidelity.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET

from .errors import SpecValidationError, XmiImportError
from .model import (
    Attribute,
    ClassDef,
    ClassDiagram,
    Lifeline,
    Message,
    Operation,
    Relationship,
    RelationshipKind,
    RequirementSpec,
    SequenceDiagram,
    State,
    StateKind,
    StateMachine,
    Transition,
    validate,
)

_SUPPORTED_PACKAGED = {
    "Class",
    "Association",
    "Dependency",
    "Interaction",
    "Model",
    "Package",
}


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _xmi_type(elem: ET.Element) -> str | None:
    """Kind discriminator: the local part of any namespaced `type` attribute."""
    for key, value in elem.attrib.items():
        if key.endswith("}type"):
            return value.split(":")[-1]
    return None


def _xmi_id(elem: ET.Element) -> str | None:
    for key, value in elem.attrib.items():
        if key.endswith("}id"):
            return value
    return elem.get("id")


def _kind_of(elem: ET.Element) -> str:
    """Element kind from xmi:type, falling back to the tag name."""
    return _xmi_type(elem) or _local(elem.tag)


def _type_name(elem: ET.Element, ids: dict[str, ET.Element]) -> str:
    """Resolve a typed element's type to a readable name (idref or href)."""
    ref = elem.get("type")
    if ref:
        target = ids.get(ref)
        if target is not None:
            return target.get("name", ref)
        return ref
    for child in elem:
        if _local(child.tag) == "type":
            href = child.get("href", "")
            if "#" in href:
                return href.rsplit("#", 1)[-1]
            return href.rsplit("/", 1)[-1]
    return ""


class _Importer:
    def __init__(self, root: ET.Element):
        self.root = root
        self.warnings: list[str] = []
        self.ids: dict[str, ET.Element] = {}
        for elem in root.iter():
            eid = _xmi_id(elem)
            if eid:
                self.ids[eid] = elem
        self.classes: list[ClassDef] = []
        self.relationships: list[Relationship] = []
        self.diagrams: list[SequenceDiagram] = []
        self.machines: list[StateMachine] = []

    def warn(self, message: str) -> None:
        self.warnings.append(message)

    def run(self) -> RequirementSpec:
        model_name = "imported"
        for elem in self.root.iter():
            if _kind_of(elem) == "Model" and elem.get("name"):
                model_name = elem.get("name", model_name)
                break
        self._walk(self.root)
        if not self.classes:
            raise XmiImportError("document contains no recognizable classes")
        spec = RequirementSpec(
            name=model_name,
            class_diagram=ClassDiagram(
                classes=tuple(self.classes), relationships=tuple(self.relationships)
            ),
            sequence_diagrams=tuple(self.diagrams),
            state_machines=tuple(self.machines),
        )
        violations = validate(spec)
        if violations:
            raise XmiImportError(
                "imported model is invalid: " + "; ".join(str(v) for v in violations[:5])
            )
        return spec

    def _walk(self, elem: ET.Element) -> None:
        for child in elem:
            tag = _local(child.tag)
            kind = _kind_of(child)
            if tag in {"packagedElement", "ownedMember"} or kind in {"Model", "Package"}:
                if kind == "Class":
                    self._read_class(child)
                elif kind == "Association":
                    self._read_association(child)
                elif kind == "Dependency":
                    self._read_dependency(child)
                elif kind == "Interaction":
                    self._read_interaction(child)
                elif kind in {"Model", "Package"}:
                    self._walk(child)
                else:
                    self.warn(f"skipped unsupported element kind '{kind}' (id={_xmi_id(child)})")
            elif tag in {"XMI", "Documentation", "documentation", "extension", "Extension"}:
                if tag == "XMI":
                    self._walk(child)
            else:
                # Non-model XML (comments container, tool extensions) is ignored.
                continue

    def _read_class(self, elem: ET.Element) -> None:
        cid = _xmi_id(elem)
        if not cid:
            self.warn("skipped class without an id")
            return
        attrs: list[Attribute] = []
        ops: list[Operation] = []
        for child in elem:
            tag = _local(child.tag)
            if tag == "ownedAttribute":
                if child.get("association"):
                    continue  # association end, captured by the Association element
                name = child.get("name")
                if not name:
                    self.warn(f"skipped unnamed attribute of class {cid}")
                    continue
                attrs.append(Attribute(name, _type_name(child, self.ids)))
            elif tag == "ownedOperation":
                name = child.get("name")
                if not name:
                    self.warn(f"skipped unnamed operation of class {cid}")
                    continue
                params: list[str] = []
                ret = ""
                for p in child:
                    if _local(p.tag) != "ownedParameter":
                        continue
                    tname = _type_name(p, self.ids)
                    if p.get("direction") == "return":
                        ret = tname
                    else:
                        params.append(tname)
                ops.append(Operation(name, tuple(params), ret))
            elif tag == "generalization":
                general = child.get("general")
                if general:
                    self.relationships.append(
                        Relationship(cid, general, RelationshipKind.GENERALIZATION)
                    )
                else:
                    self.warn(f"skipped generalization without target on class {cid}")
            elif tag == "ownedBehavior":
                bkind = _kind_of(child)
                if bkind == "StateMachine":
                    self._read_state_machine(child, cid)
                else:
                    self.warn(f"skipped unsupported owned behavior '{bkind}' of class {cid}")
        self.classes.append(
            ClassDef(
                id=cid,
                name=elem.get("name", cid),
                attributes=tuple(attrs),
                operations=tuple(ops),
            )
        )

    def _read_association(self, elem: ET.Element) -> None:
        aid = _xmi_id(elem)
        ends: list[ET.Element] = []
        member = elem.get("memberEnd")
        if member:
            for ref in member.split():
                target = self.ids.get(ref)
                if target is not None:
                    ends.append(target)
        else:
            ends = [c for c in elem if _local(c.tag) == "ownedEnd"]
        if len(ends) != 2:
            self.warn(f"skipped association {aid}: expected 2 ends, found {len(ends)}")
            return
        types = [e.get("type", "") for e in ends]
        if not all(types):
            self.warn(f"skipped association {aid}: untyped end")
            return
        kind = RelationshipKind.ASSOCIATION
        aggregations = {e.get("aggregation", "none") for e in ends}
        if "composite" in aggregations:
            kind = RelationshipKind.COMPOSITION
        elif "shared" in aggregations:
            kind = RelationshipKind.AGGREGATION
        # Undirected associations become one directed edge from the first end.
        self.relationships.append(Relationship(types[0], types[1], kind))

    def _read_dependency(self, elem: ET.Element) -> None:
        did = _xmi_id(elem)
        clients = (elem.get("client") or "").split()
        suppliers = (elem.get("supplier") or "").split()
        if not clients or not suppliers:
            self.warn(f"skipped dependency {did}: missing client or supplier")
            return
        for c in clients:
            for s in suppliers:
                self.relationships.append(Relationship(c, s, RelationshipKind.DEPENDENCY))

    def _read_interaction(self, elem: ET.Element) -> None:
        did = _xmi_id(elem) or f"interaction{len(self.diagrams) + 1}"
        lifelines: list[Lifeline] = []
        lifeline_ids: set[str] = set()
        for child in elem:
            if _local(child.tag) != "lifeline":
                continue
            lid = _xmi_id(child)
            if not lid:
                self.warn(f"skipped lifeline without id in interaction {did}")
                continue
            class_id = ""
            rep = child.get("represents")
            if rep:
                prop = self.ids.get(rep)
                if prop is not None:
                    class_id = prop.get("type", "")
            if not class_id:
                class_id = child.get("type", "")
            if not class_id:
                self.warn(f"skipped lifeline {lid}: cannot resolve its class")
                continue
            lifelines.append(Lifeline(lid, class_id))
            lifeline_ids.add(lid)

        messages: list[Message] = []
        order = 0
        for child in elem:
            if _local(child.tag) != "message":
                continue
            mid = _xmi_id(child)
            name = child.get("name")
            if not name:
                self.warn(f"skipped unnamed message {mid} in interaction {did}")
                continue
            src = self._covered_lifeline(child.get("sendEvent"))
            dst = self._covered_lifeline(child.get("receiveEvent"))
            if not src or not dst or src not in lifeline_ids or dst not in lifeline_ids:
                self.warn(f"skipped message {mid}: unresolved send/receive lifeline")
                continue
            order += 1
            messages.append(Message(src, dst, name, order))
        self.diagrams.append(
            SequenceDiagram(
                id=did,
                name=elem.get("name", did),
                lifelines=tuple(lifelines),
                messages=tuple(messages),
            )
        )

    def _covered_lifeline(self, event_ref: str | None) -> str | None:
        if not event_ref:
            return None
        event = self.ids.get(event_ref)
        if event is None:
            return None
        covered = event.get("covered")
        if not covered:
            return None
        return covered.split()[0]

    def _read_state_machine(self, elem: ET.Element, owner: str) -> None:
        states: list[State] = []
        transitions: list[Transition] = []
        state_ids: set[str] = set()

        def read_region(region: ET.Element) -> None:
            for child in region:
                tag = _local(child.tag)
                if tag == "subvertex":
                    kind = _kind_of(child)
                    sid = _xmi_id(child)
                    if not sid:
                        self.warn(f"skipped state without id in machine of {owner}")
                        continue
                    if kind == "State":
                        skind = StateKind.NORMAL
                    elif kind == "FinalState":
                        skind = StateKind.FINAL
                    elif kind == "Pseudostate":
                        pk = child.get("kind", "initial")
                        if pk != "initial":
                            self.warn(f"skipped pseudostate kind '{pk}' in machine of {owner}")
                            continue
                        skind = StateKind.INITIAL
                    else:
                        self.warn(f"skipped unsupported vertex kind '{kind}' in machine of {owner}")
                        continue
                    states.append(State(sid, child.get("name", sid), skind))
                    state_ids.add(sid)
                elif tag == "transition":
                    src, dst = child.get("source"), child.get("target")
                    if not src or not dst:
                        self.warn(f"skipped transition without endpoints in machine of {owner}")
                        continue
                    transitions.append(Transition(src, dst, child.get("name", "")))

        regions = [c for c in elem if _local(c.tag) == "region"]
        for region in regions or [elem]:
            read_region(region)
        transitions = [t for t in transitions if t.source in state_ids and t.target in state_ids]
        self.machines.append(
            StateMachine(owner_class_id=owner, states=tuple(states), transitions=tuple(transitions))
        )


def import_xmi(data: bytes | str) -> tuple[RequirementSpec, list[str]]:
    """Parse XMI bytes into a model plus skip warnings.

    Raises XmiImportError on malformed markup, when no classes are
    recognizable, or when the recognized subset violates model invariants.
    """
    if isinstance(data, str):
        data = data.encode("utf-8")
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        raise XmiImportError(f"malformed markup: {exc}") from None
    importer = _Importer(root)
    try:
        spec = importer.run()
    except SpecValidationError as exc:
        raise XmiImportError(f"imported model is invalid: {exc}") from None
    return spec, importer.warnings


def import_xmi_file(path) -> tuple[RequirementSpec, list[str]]:
    from pathlib import Path

    return import_xmi(Path(path).read_bytes())
