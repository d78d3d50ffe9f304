"""Synthetic models, perturbation operators, and corpus generation.

Perturbations mirror the interesting retrieval cases: splitting a class into
a composed pair, swapping message receivers across two messages, reordering
messages, and so on. A corpus pairs random base models with perturbed
variants and judges each base's variants relevant to it.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace

from .canonical import content_hash
from .errors import PerturbationError
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
    require_valid,
    validate,
)
from .text import tokenize

PERTURBATION_KINDS = (
    "renameTokens",
    "classSplit",
    "classMerge",
    "messageReceiverSwap",
    "messageReorder",
    "dropSequenceDiagram",
    "dropTransition",
)

_RENAME_WORDS = (
    "delta", "prime", "shadow", "vertex", "quantum", "zen", "flux", "nimbus",
    "zephyr", "cobalt", "onyx", "raven",
)


@dataclass(frozen=True)
class PerturbationOp:
    """A deterministic model edit: kind, how many times, and its own seed."""

    kind: str
    magnitude: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.kind not in PERTURBATION_KINDS:
            raise ValueError(f"unknown perturbation kind {self.kind!r}")
        if self.magnitude < 0:
            raise ValueError("magnitude must be non-negative")


def perturb(spec: RequirementSpec, op: PerturbationOp) -> RequirementSpec:
    """Apply one operator `magnitude` times; output always validates.

    Raises PerturbationError when the operator has nothing to act on (for
    example a receiver swap on a model without two differing messages).
    """
    rng = random.Random(op.seed)
    result = spec
    for _ in range(op.magnitude):
        result = _APPLIERS[op.kind](result, rng)
    violations = validate(result)
    if violations:
        raise PerturbationError(f"{op.kind} produced an invalid model: {violations[0]}")
    return result


def _with_classes(spec: RequirementSpec, classes, relationships) -> RequirementSpec:
    return replace(
        spec,
        class_diagram=ClassDiagram(classes=tuple(classes), relationships=tuple(relationships)),
    )


def _rename_tokens(spec: RequirementSpec, rng: random.Random) -> RequirementSpec:
    classes = list(spec.class_diagram.classes)
    if not classes:
        raise PerturbationError("renameTokens needs at least one class")
    idx = rng.randrange(len(classes))
    victim = classes[idx]
    tokens = list(tokenize(victim.name)) or [victim.name.lower()]
    slot = rng.randrange(len(tokens))
    choices = [w for w in _RENAME_WORDS if w != tokens[slot]]
    tokens[slot] = rng.choice(choices)
    new_name = "".join(t.capitalize() for t in tokens)
    classes[idx] = replace(victim, name=new_name)
    return _with_classes(spec, classes, spec.class_diagram.relationships)


def _class_split(spec: RequirementSpec, rng: random.Random) -> RequirementSpec:
    classes = list(spec.class_diagram.classes)
    if not classes:
        raise PerturbationError("classSplit needs at least one class")
    idx = rng.randrange(len(classes))
    victim = classes[idx]
    existing = {c.id for c in classes}
    part_id = f"{victim.id}_part"
    n = 2
    while part_id in existing:
        part_id = f"{victim.id}_part{n}"
        n += 1
    keep_a = (len(victim.attributes) + 1) // 2
    keep_o = (len(victim.operations) + 1) // 2
    part = ClassDef(
        id=part_id,
        name=f"{victim.name}Part",
        attributes=victim.attributes[keep_a:],
        operations=victim.operations[keep_o:],
    )
    classes[idx] = replace(
        victim, attributes=victim.attributes[:keep_a], operations=victim.operations[:keep_o]
    )
    classes.append(part)
    relationships = list(spec.class_diagram.relationships)
    relationships.append(Relationship(victim.id, part_id, RelationshipKind.COMPOSITION))
    return _with_classes(spec, classes, relationships)


def _class_merge(spec: RequirementSpec, rng: random.Random) -> RequirementSpec:
    machines = spec.machines_by_owner()
    candidates = [
        r
        for r in spec.class_diagram.relationships
        if r.kind is RelationshipKind.COMPOSITION
        and r.source != r.target
        and not (r.source in machines and r.target in machines)
    ]
    if not candidates:
        raise PerturbationError("classMerge needs a mergeable composition pair")
    rel = candidates[rng.randrange(len(candidates))]
    keep_id, drop_id = rel.source, rel.target
    classes = []
    dropped = None
    for c in spec.class_diagram.classes:
        if c.id == drop_id:
            dropped = c
        else:
            classes.append(c)
    assert dropped is not None
    classes = [
        replace(
            c,
            attributes=c.attributes + dropped.attributes,
            operations=c.operations + dropped.operations,
        )
        if c.id == keep_id
        else c
        for c in classes
    ]
    relationships = set()
    for r in spec.class_diagram.relationships:
        if r == rel:
            continue
        source = keep_id if r.source == drop_id else r.source
        target = keep_id if r.target == drop_id else r.target
        if source == target and r.source != r.target:
            continue  # collapsed into a self-edge by the merge
        relationships.add(Relationship(source, target, r.kind))
    diagrams = [
        SequenceDiagram(
            id=d.id,
            name=d.name,
            lifelines=tuple(
                Lifeline(l.id, keep_id if l.class_id == drop_id else l.class_id)
                for l in d.lifelines
            ),
            messages=d.messages,
        )
        for d in spec.sequence_diagrams
    ]
    machines_out = [
        replace(m, owner_class_id=keep_id) if m.owner_class_id == drop_id else m
        for m in spec.state_machines
    ]
    return replace(
        spec,
        class_diagram=ClassDiagram(tuple(classes), tuple(relationships)),
        sequence_diagrams=tuple(diagrams),
        state_machines=tuple(machines_out),
    )


def _swappable_pairs(diagram: SequenceDiagram, key) -> list[tuple[int, int]]:
    msgs = diagram.messages
    return [
        (i, j)
        for i in range(len(msgs))
        for j in range(i + 1, len(msgs))
        if key(msgs[i]) != key(msgs[j])
    ]


def _message_receiver_swap(spec: RequirementSpec, rng: random.Random) -> RequirementSpec:
    options = [
        (d_idx, pair)
        for d_idx, d in enumerate(spec.sequence_diagrams)
        for pair in _swappable_pairs(d, lambda m: m.to_lifeline)
    ]
    if not options:
        raise PerturbationError("messageReceiverSwap needs two messages with distinct receivers")
    d_idx, (i, j) = options[rng.randrange(len(options))]
    diagrams = list(spec.sequence_diagrams)
    msgs = list(diagrams[d_idx].messages)
    msgs[i], msgs[j] = (
        replace(msgs[i], to_lifeline=msgs[j].to_lifeline),
        replace(msgs[j], to_lifeline=msgs[i].to_lifeline),
    )
    diagrams[d_idx] = replace(diagrams[d_idx], messages=tuple(msgs))
    return replace(spec, sequence_diagrams=tuple(diagrams))


def _message_reorder(spec: RequirementSpec, rng: random.Random) -> RequirementSpec:
    key = lambda m: (m.from_lifeline, m.to_lifeline, m.operation)
    options = [
        (d_idx, pair)
        for d_idx, d in enumerate(spec.sequence_diagrams)
        for pair in _swappable_pairs(d, key)
    ]
    if not options:
        raise PerturbationError("messageReorder needs two differing messages")
    d_idx, (i, j) = options[rng.randrange(len(options))]
    diagrams = list(spec.sequence_diagrams)
    msgs = list(diagrams[d_idx].messages)
    msgs[i], msgs[j] = (
        replace(msgs[j], order=msgs[i].order),
        replace(msgs[i], order=msgs[j].order),
    )
    diagrams[d_idx] = replace(diagrams[d_idx], messages=tuple(msgs))
    return replace(spec, sequence_diagrams=tuple(diagrams))


def _drop_sequence_diagram(spec: RequirementSpec, rng: random.Random) -> RequirementSpec:
    if not spec.sequence_diagrams:
        raise PerturbationError("dropSequenceDiagram needs at least one diagram")
    idx = rng.randrange(len(spec.sequence_diagrams))
    diagrams = list(spec.sequence_diagrams)
    del diagrams[idx]
    return replace(spec, sequence_diagrams=tuple(diagrams))


def _drop_transition(spec: RequirementSpec, rng: random.Random) -> RequirementSpec:
    options = [
        (m_idx, t_idx)
        for m_idx, m in enumerate(spec.state_machines)
        for t_idx in range(len(m.transitions))
    ]
    if not options:
        raise PerturbationError("dropTransition needs at least one transition")
    m_idx, t_idx = options[rng.randrange(len(options))]
    machines = list(spec.state_machines)
    transitions = list(machines[m_idx].transitions)
    del transitions[t_idx]
    machines[m_idx] = replace(machines[m_idx], transitions=tuple(transitions))
    return replace(spec, state_machines=tuple(machines))


_APPLIERS = {
    "renameTokens": _rename_tokens,
    "classSplit": _class_split,
    "classMerge": _class_merge,
    "messageReceiverSwap": _message_receiver_swap,
    "messageReorder": _message_reorder,
    "dropSequenceDiagram": _drop_sequence_diagram,
    "dropTransition": _drop_transition,
}


_NOUNS = (
    "order", "invoice", "customer", "account", "ledger", "payment", "shipment",
    "catalog", "product", "basket", "session", "ticket", "agent", "policy",
    "claim", "sensor", "gateway", "router", "packet", "buffer", "journal",
    "report", "audit", "batch", "queue", "worker", "task", "schedule",
    "course", "student", "grade", "roster", "library", "loan", "reserve",
    "vehicle", "route", "depot", "cargo", "manifest", "warehouse", "bin",
    "patient", "ward", "dosage", "chart", "device", "probe",
)

_VERBS = (
    "create", "update", "cancel", "submit", "approve", "reject", "notify",
    "dispatch", "archive", "resolve", "assign", "release", "validate",
    "register", "suspend", "activate", "close", "open", "merge", "split",
    "query", "sync", "flush", "load", "store", "route", "audit", "retry",
)

_FIELDS = (
    "id", "name", "status", "total", "count", "created", "updated", "owner",
    "price", "quantity", "label", "code", "weight", "priority", "due",
    "origin", "target", "limit", "rate", "note",
)

_TYPES = ("int", "string", "bool", "real", "date")

_STATE_WORDS = (
    "idle", "active", "pending", "blocked", "review", "ready", "busy",
    "stalled", "draft", "final", "open", "closed",
)


def random_class_name(rng: random.Random, used: set[str]) -> str:
    while True:
        a, b = rng.sample(_NOUNS, 2)
        name = a.capitalize() + b.capitalize()
        if name not in used:
            used.add(name)
            return name


def random_spec(
    rng: random.Random,
    *,
    name: str = "model",
    min_classes: int = 2,
    max_classes: int = 8,
    min_sds: int = 1,
    max_sds: int = 3,
    max_messages: int = 8,
    machine_probability: float = 0.4,
) -> RequirementSpec:
    """A random, always-valid model within the given size envelope."""
    n = rng.randint(min_classes, max_classes)
    used_names: set[str] = set()
    classes = []
    for i in range(n):
        attrs = tuple(
            Attribute(rng.choice(_FIELDS), rng.choice(_TYPES)) for _ in range(rng.randint(0, 4))
        )
        attrs = tuple({a.name: a for a in attrs}.values())
        ops = tuple(
            Operation(
                rng.choice(_VERBS) + rng.choice(_NOUNS).capitalize(),
                tuple(rng.choice(_TYPES) for _ in range(rng.randint(0, 2))),
                rng.choice(_TYPES + ("",)),
            )
            for _ in range(rng.randint(0, 3))
        )
        ops = tuple({o.name: o for o in ops}.values())
        classes.append(
            ClassDef(id=f"c{i + 1}", name=random_class_name(rng, used_names),
                     attributes=attrs, operations=ops)
        )

    kinds = tuple(RelationshipKind)
    kind_weights = (46, 12, 12, 14, 4, 12)
    rel_set: set[tuple[str, str, RelationshipKind]] = set()
    for i in range(1, n):
        j = rng.randrange(i)
        kind = rng.choices(kinds, weights=kind_weights, k=1)[0]
        rel_set.add((classes[i].id, classes[j].id, kind))
    for _ in range(rng.randint(0, max(0, n - 2))):
        i, j = rng.sample(range(n), 2)
        kind = rng.choices(kinds, weights=kind_weights, k=1)[0]
        rel_set.add((classes[i].id, classes[j].id, kind))
    relationships = tuple(Relationship(s, t, k) for s, t, k in rel_set)

    diagrams = []
    for d in range(rng.randint(min_sds, max_sds)):
        k = rng.randint(2, min(4, n))
        members = rng.sample(range(n), k)
        lifelines = tuple(Lifeline(f"l{m + 1}", classes[m].id) for m in members)
        messages = []
        for order in range(1, rng.randint(1, max_messages) + 1):
            src, dst = rng.sample(lifelines, 2)
            op_name = rng.choice(_VERBS) + rng.choice(_NOUNS).capitalize()
            messages.append(Message(src.id, dst.id, op_name, order))
        diagrams.append(
            SequenceDiagram(
                id=f"sd{d + 1}",
                name=f"{name}Flow{d + 1}",
                lifelines=lifelines,
                messages=tuple(messages),
            )
        )

    machines = []
    for c in classes:
        if rng.random() >= machine_probability:
            continue
        n_states = rng.randint(2, 5)
        states = [State(id="s0", name="start", kind=StateKind.INITIAL)]
        for s in range(1, n_states):
            kind = StateKind.FINAL if s == n_states - 1 and rng.random() < 0.4 else StateKind.NORMAL
            states.append(State(id=f"s{s}", name=rng.choice(_STATE_WORDS), kind=kind))
        transitions = set()
        for _ in range(rng.randint(1, 2 * n_states)):
            src = rng.choice(states).id
            dst = rng.choice(states).id
            transitions.add(Transition(src, dst, rng.choice(_VERBS)))
        machines.append(
            StateMachine(owner_class_id=c.id, states=tuple(states), transitions=tuple(transitions))
        )

    return require_valid(
        RequirementSpec(
            name=name,
            class_diagram=ClassDiagram(tuple(classes), relationships),
            sequence_diagrams=tuple(diagrams),
            state_machines=tuple(machines),
        )
    )


@dataclass(frozen=True)
class CorpusConfig:
    base_models: int = 30
    variants_per_base: int = 3
    ops_per_variant: int = 2

    def __post_init__(self):
        if self.base_models < 1 or self.variants_per_base < 1:
            raise ValueError("base_models and variants_per_base must be at least 1")
        if self.ops_per_variant < 0:
            raise ValueError("ops_per_variant must be non-negative")


def _variant_op_kinds(spec: RequirementSpec, rng: random.Random) -> str:
    """Pick an applicable operator, biased toward edits that keep sizes close."""
    candidates = ["renameTokens"] * 3 + ["classSplit"] * 2
    if any(_swappable_pairs(d, lambda m: m.to_lifeline) for d in spec.sequence_diagrams):
        candidates += ["messageReceiverSwap"] * 2
    if any(
        _swappable_pairs(d, lambda m: (m.from_lifeline, m.to_lifeline, m.operation))
        for d in spec.sequence_diagrams
    ):
        candidates += ["messageReorder"] * 2
    if any(
        r.kind is RelationshipKind.COMPOSITION and r.source != r.target
        for r in spec.class_diagram.relationships
    ):
        candidates.append("classMerge")
    if any(m.transitions for m in spec.state_machines):
        candidates.append("dropTransition")
    if len(spec.sequence_diagrams) >= 3:
        candidates.append("dropSequenceDiagram")
    return rng.choice(candidates)


def generate_corpus(
    config: CorpusConfig, seed: int = 0
) -> tuple[list[tuple[str, RequirementSpec]], dict[str, frozenset[str]]]:
    """Base models plus perturbed variants, with ancestry as relevance judgments.

    Returns ([(modelId, model), ...], {queryId: relevant modelIds}); model
    contents are guaranteed pairwise distinct so every one can be stored.
    """
    rng = random.Random(seed)
    models: list[tuple[str, RequirementSpec]] = []
    judgments: dict[str, frozenset[str]] = {}
    seen_hashes: set[str] = set()
    for b in range(config.base_models):
        base_id = f"base{b:02d}"
        while True:
            base = random_spec(rng, name=base_id)
            digest = content_hash(base)
            if digest not in seen_hashes:
                break
        seen_hashes.add(digest)
        models.append((base_id, base))
        relevant = []
        for v in range(config.variants_per_base):
            variant_id = f"{base_id}-v{v + 1}"
            for _ in range(40):
                variant = base
                for _ in range(config.ops_per_variant):
                    kind = _variant_op_kinds(variant, rng)
                    op = PerturbationOp(kind=kind, magnitude=1, seed=rng.randrange(2**31))
                    try:
                        variant = perturb(variant, op)
                    except PerturbationError:
                        continue
                digest = content_hash(variant)
                if config.ops_per_variant == 0 or digest not in seen_hashes:
                    break
            else:
                raise PerturbationError(
                    f"could not derive a distinct variant for {base_id} after 40 attempts"
                )
            if config.ops_per_variant > 0:
                seen_hashes.add(digest)
            models.append((variant_id, variant))
            relevant.append(variant_id)
        judgments[base_id] = frozenset(relevant)
    return models, judgments
