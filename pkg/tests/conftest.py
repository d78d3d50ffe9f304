"""Shared fixtures: the three-model retrieval fixture and small builders."""

from __future__ import annotations

import random

import pytest

from modelmatch.model import (
    ClassDiagram,
    Relationship,
    RequirementSpec,
    State,
    StateMachine,
    Transition,
    make_class,
    make_sequence_diagram,
)


def build_query_model() -> RequirementSpec:
    """Q: classes A, B, C with A-B and B-C associations, one two-message flow."""
    cd = ClassDiagram(
        classes=(make_class("A"), make_class("B"), make_class("C")),
        relationships=(
            Relationship("A", "B", "association"),
            Relationship("B", "C", "association"),
        ),
    )
    sd = make_sequence_diagram(
        "s1",
        [("a", "A"), ("b", "B"), ("c", "C")],
        [("a", "b", "m1"), ("b", "c", "m2")],
    )
    return RequirementSpec(name="Q", class_diagram=cd, sequence_diagrams=(sd,))


def build_inconsistent_model() -> RequirementSpec:
    """R1: same class diagram as Q, but the two message receivers are swapped."""
    cd = ClassDiagram(
        classes=(make_class("A"), make_class("B"), make_class("C")),
        relationships=(
            Relationship("A", "B", "association"),
            Relationship("B", "C", "association"),
        ),
    )
    sd = make_sequence_diagram(
        "s1",
        [("a", "A"), ("b", "B"), ("c", "C")],
        [("a", "c", "m1"), ("b", "b", "m2")],
    )
    return RequirementSpec(name="R1", class_diagram=cd, sequence_diagrams=(sd,))


def build_split_model() -> RequirementSpec:
    """R2: Q with C split into a composed pair (merging C and D restores Q)."""
    cd = ClassDiagram(
        classes=(make_class("A"), make_class("B"), make_class("C"), make_class("D")),
        relationships=(
            Relationship("A", "B", "association"),
            Relationship("B", "C", "association"),
            Relationship("C", "D", "composition"),
        ),
    )
    sd = make_sequence_diagram(
        "s1",
        [("a", "A"), ("b", "B"), ("c", "C")],
        [("a", "b", "m1"), ("b", "c", "m2")],
    )
    return RequirementSpec(name="R2", class_diagram=cd, sequence_diagrams=(sd,))


@pytest.fixture
def query_model() -> RequirementSpec:
    return build_query_model()


@pytest.fixture
def inconsistent_model() -> RequirementSpec:
    return build_inconsistent_model()


@pytest.fixture
def split_model() -> RequirementSpec:
    return build_split_model()


def simple_machine(owner: str = "A", extra_state: bool = False) -> StateMachine:
    states = [State("s0", "start", "initial"), State("s1", "active", "normal")]
    transitions = [Transition("s0", "s1", "activate")]
    if extra_state:
        states.append(State("s2", "done", "final"))
        transitions.append(Transition("s1", "s2", "finish"))
    return StateMachine(owner_class_id=owner, states=tuple(states), transitions=tuple(transitions))


@pytest.fixture
def rng() -> random.Random:
    return random.Random(1234)
