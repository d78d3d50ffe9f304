import itertools

import pytest

from modelmatch.corpus import random_spec
from modelmatch.errors import MappingError, MatchTooLargeError
from modelmatch.matching import (
    Chromosome,
    GAConfig,
    MappingPair,
    MatchDimensions,
    Matcher,
    decode,
    encode,
    exhaustive_match,
    fitness,
    functional_map_hungarian,
    ga_match,
    hungarian,
    resolve_mapping,
)
from modelmatch.model import (
    ClassDiagram,
    RequirementSpec,
    make_class,
    make_sequence_diagram,
)
from modelmatch.scoring import functional_similarity


# ---- decode / encode -----------------------------------------------------------


def test_decode_worked_example():
    dims = MatchDimensions(c_q=6, c_r=3, s_q=1, s_r=1)
    ch = Chromosome(class_segment=(2, 5, 6, 1, 3, 4), sd_segment=(1,))
    mapping = decode(ch, dims)
    assert mapping.class_dict() == {2: 1, 5: 2, 6: 3}


def test_decode_second_segment():
    dims = MatchDimensions(c_q=1, c_r=1, s_q=2, s_r=1)
    ch = Chromosome(class_segment=(1,), sd_segment=(2, 1))
    assert decode(ch, dims).sd_dict() == {2: 1}


def test_decode_rejects_non_permutation():
    dims = MatchDimensions(c_q=3, c_r=3, s_q=0, s_r=0)
    with pytest.raises(MappingError, match="not a permutation"):
        decode(Chromosome(class_segment=(1, 1, 2), sd_segment=()), dims)


def test_encode_then_decode_round_trip(rng):
    for _ in range(50):
        max_c = rng.randint(0, 7)
        min_c = rng.randint(0, max_c)
        max_s = rng.randint(0, 4)
        min_s = rng.randint(0, max_s)
        dims = MatchDimensions(c_q=max_c, c_r=min_c, s_q=max_s, s_r=min_s)
        class_map = tuple(
            (g, i + 1) for i, g in enumerate(rng.sample(range(1, max_c + 1), min_c))
        )
        sd_map = tuple((g, i + 1) for i, g in enumerate(rng.sample(range(1, max_s + 1), min_s)))
        mapping = MappingPair(class_map=class_map, sd_map=sd_map)
        assert decode(encode(mapping, dims), dims) == mapping


# ---- hungarian ------------------------------------------------------------------


def test_hungarian_zero_diagonal():
    assignment, cost = hungarian([[0, 1], [1, 0]])
    assert assignment == {0: 0, 1: 1}
    assert cost == 0.0


def test_hungarian_antidiagonal_example():
    assignment, cost = hungarian([[1, 2, 3], [2, 4, 6], [3, 6, 9]])
    assert assignment == {0: 2, 1: 1, 2: 0}
    assert cost == 10.0


def test_hungarian_rectangular_example():
    assignment, cost = hungarian([[5, 1, 9], [9, 5, 1]])
    assert assignment == {0: 1, 1: 2}
    assert cost == 2.0


def test_hungarian_empty_matrix():
    assert hungarian([]) == ({}, 0.0)


def test_hungarian_rejects_bad_input():
    with pytest.raises(ValueError):
        hungarian([[1.0, -0.5]])
    with pytest.raises(ValueError):
        hungarian([[1.0, float("inf")]])
    with pytest.raises(ValueError):
        hungarian([[1.0, 2.0], [1.0]])


def brute_force_assignment_cost(matrix):
    rows, cols = len(matrix), len(matrix[0])
    if rows <= cols:
        return min(
            sum(matrix[r][c] for r, c in enumerate(perm))
            for perm in itertools.permutations(range(cols), rows)
        )
    return min(
        sum(matrix[r][c] for c, r in enumerate(perm))
        for perm in itertools.permutations(range(rows), cols)
    )


def test_hungarian_matches_brute_force_on_random_matrices(rng):
    for _ in range(200):
        rows = rng.randint(1, 7)
        cols = rng.randint(1, 7)
        if min(rows, cols) > 7:
            continue
        matrix = [[rng.random() for _ in range(cols)] for _ in range(rows)]
        _, cost = hungarian(matrix)
        assert cost == pytest.approx(brute_force_assignment_cost(matrix), abs=1e-12)


# ---- fitness ---------------------------------------------------------------------


def test_identity_fitness_is_one(query_model):
    mapping = MappingPair(class_map=((1, 1), (2, 2), (3, 3)), sd_map=((1, 1),))
    scores = fitness(query_model, query_model, mapping)
    assert scores.aggregate == pytest.approx(1.0, abs=1e-9)
    assert scores.structural == scores.functional == scores.behavioral == 1.0


def test_fitness_identity_map_on_swapped_receivers(query_model, inconsistent_model):
    mapping = MappingPair(class_map=((1, 1), (2, 2), (3, 3)), sd_map=((1, 1),))
    scores = fitness(query_model, inconsistent_model, mapping)
    assert scores.functional < 1.0
    assert scores.structural == pytest.approx(1.0)


def test_fitness_crossed_map_hurts_structural(query_model, inconsistent_model):
    crossed = MappingPair(class_map=((1, 1), (3, 2), (2, 3)), sd_map=((1, 1),))
    scores = fitness(query_model, inconsistent_model, crossed)
    assert scores.structural < 1.0


def test_fitness_rejects_wrong_size(query_model):
    with pytest.raises(MappingError):
        fitness(query_model, query_model, MappingPair(class_map=((1, 1),), sd_map=((1, 1),)))


def test_matcher_scores_agree_with_reference_fitness(rng):
    for _ in range(8):
        a = random_spec(rng, min_classes=2, max_classes=5)
        b = random_spec(rng, min_classes=2, max_classes=5)
        result = ga_match(a, b, config=GAConfig(seed=7, max_generations=40))
        ref = fitness(a, b, result.mapping)
        assert result.scores.aggregate == pytest.approx(ref.aggregate, abs=1e-9)
        assert result.scores.structural == pytest.approx(ref.structural, abs=1e-9)
        assert result.scores.functional == pytest.approx(ref.functional, abs=1e-9)
        assert result.scores.behavioral == pytest.approx(ref.behavioral, abs=1e-9)


# ---- exhaustive ------------------------------------------------------------------


def test_exhaustive_identity(query_model):
    result = exhaustive_match(query_model, query_model)
    assert result.scores.aggregate == pytest.approx(1.0, abs=1e-9)
    assert result.mapping.class_dict() == {1: 1, 2: 2, 3: 3}
    assert result.method == "exhaustive"


def test_exhaustive_fixture_ordering(query_model, inconsistent_model, split_model):
    to_r1 = exhaustive_match(query_model, inconsistent_model)
    to_r2 = exhaustive_match(query_model, split_model)
    assert to_r2.scores.aggregate > to_r1.scores.aggregate
    assert to_r1.scores.aggregate < 1.0


def test_exhaustive_rejects_large_instances():
    classes = tuple(make_class(f"c{i}", f"Class{i}") for i in range(10))
    sds = tuple(
        make_sequence_diagram(f"s{i}", [(f"l{i}", "c0")], []) for i in range(5)
    )
    big = RequirementSpec(
        name="big", class_diagram=ClassDiagram(classes=classes), sequence_diagrams=sds
    )
    with pytest.raises(MatchTooLargeError) as err:
        exhaustive_match(big, big)
    assert err.value.count == 3628800 * 120


def test_exhaustive_tie_break_is_lexicographic():
    # two indistinguishable classes: identity and swap tie; identity is smaller
    cd = ClassDiagram(classes=(make_class("a", "Same"), make_class("b", "Same")))
    spec = RequirementSpec(name="tie", class_diagram=cd)
    result = exhaustive_match(spec, spec)
    assert result.mapping.class_dict() == {1: 1, 2: 2}


# ---- ga ---------------------------------------------------------------------------


def test_ga_is_deterministic(query_model, split_model):
    r1 = ga_match(query_model, split_model, config=GAConfig(seed=11))
    r2 = ga_match(query_model, split_model, config=GAConfig(seed=11))
    assert r1 == r2


def test_ga_identity_on_identical_models(rng):
    spec = random_spec(rng, min_classes=4, max_classes=4)
    result = ga_match(spec, spec, config=GAConfig(seed=5))
    oracle = exhaustive_match(spec, spec)
    assert result.scores.aggregate == pytest.approx(oracle.scores.aggregate, abs=1e-9)
    assert result.scores.aggregate == pytest.approx(1.0, abs=1e-9)


def test_ga_strictly_below_one_on_inconsistent_fixture(query_model, inconsistent_model):
    for seed in range(5):
        result = ga_match(query_model, inconsistent_model, config=GAConfig(seed=seed))
        assert result.scores.aggregate < 1.0


def test_ga_history_is_non_decreasing(rng):
    for seed in (0, 1, 2):
        a = random_spec(rng, min_classes=2, max_classes=6)
        b = random_spec(rng, min_classes=2, max_classes=6)
        result = ga_match(a, b, config=GAConfig(seed=seed))
        history = result.best_fitness_history
        assert all(x <= y + 1e-12 for x, y in zip(history, history[1:]))
        assert result.scores.aggregate == pytest.approx(history[-1], abs=1e-12)


def test_ga_swap_symmetry_for_equal_seeds(rng):
    for _ in range(5):
        a = random_spec(rng, min_classes=2, max_classes=5)
        b = random_spec(rng, min_classes=2, max_classes=5)
        fwd = ga_match(a, b, config=GAConfig(seed=13))
        rev = ga_match(b, a, config=GAConfig(seed=13))
        assert fwd.scores.aggregate == pytest.approx(rev.scores.aggregate, abs=1e-9)


def test_ga_handles_degenerate_models():
    empty = RequirementSpec(name="void")
    result = ga_match(empty, empty, config=GAConfig(seed=1))
    assert result.scores.aggregate == pytest.approx(1.0)
    assert result.mapping.class_map == ()
    one = RequirementSpec(name="one", class_diagram=ClassDiagram(classes=(make_class("x"),)))
    mixed = ga_match(one, empty, config=GAConfig(seed=1))
    assert mixed.scores.structural == 0.0


def test_ga_config_validation():
    with pytest.raises(ValueError):
        GAConfig(population_size=3, elitism=2)
    with pytest.raises(ValueError):
        GAConfig(tournament_size=1)
    with pytest.raises(ValueError):
        GAConfig(crossover_rate=1.5)


# ---- hungarian functional mapping ---------------------------------------------


def test_functional_map_single_diagram(query_model):
    identity = {c.id: c.id for c in query_model.class_diagram.classes}
    result = functional_map_hungarian(query_model, query_model, identity)
    assert result.sd_map == {"s1": "s1"}
    assert result.functional == pytest.approx(1.0)
    assert result.pairwise_evaluations == 1


def test_functional_map_prefers_crossed_pairs():
    cd = ClassDiagram(classes=(make_class("A"), make_class("B")))
    sd_ab = make_sequence_diagram("d1", [("a", "A"), ("b", "B")], [("a", "b", "ping")])
    sd_ba = make_sequence_diagram("d2", [("a", "A"), ("b", "B")], [("b", "a", "pong")])
    m1 = RequirementSpec(name="m1", class_diagram=cd, sequence_diagrams=(sd_ab, sd_ba))
    m2 = RequirementSpec(
        name="m2",
        class_diagram=cd,
        sequence_diagrams=(
            make_sequence_diagram("e1", [("a", "A"), ("b", "B")], [("b", "a", "pong")]),
            make_sequence_diagram("e2", [("a", "A"), ("b", "B")], [("a", "b", "ping")]),
        ),
    )
    result = functional_map_hungarian(m1, m2, {"A": "A", "B": "B"})
    assert result.sd_map == {"d1": "e2", "d2": "e1"}
    assert result.functional == pytest.approx(1.0)
    assert result.pairwise_evaluations == 4


def test_functional_map_empty_side(query_model):
    bare = RequirementSpec(name="bare", class_diagram=query_model.class_diagram)
    identity = {c.id: c.id for c in query_model.class_diagram.classes}
    result = functional_map_hungarian(bare, query_model, identity)
    assert result.sd_map == {}
    assert result.functional == 0.0
    both_bare = functional_map_hungarian(bare, bare, identity)
    assert both_bare.functional == 1.0


def test_functional_map_is_optimal_by_enumeration(rng):
    for _ in range(6):
        a = random_spec(rng, min_classes=2, max_classes=4, min_sds=2, max_sds=4, max_messages=4)
        b = random_spec(rng, min_classes=2, max_classes=4, min_sds=2, max_sds=4, max_messages=4)
        ids_a = [c.id for c in a.class_diagram.classes]
        ids_b = [c.id for c in b.class_diagram.classes]
        if len(ids_a) <= len(ids_b):
            class_map = dict(zip(ids_a, rng.sample(ids_b, len(ids_a))))
        else:
            class_map = dict(zip(rng.sample(ids_a, len(ids_b)), ids_b))
        result = functional_map_hungarian(a, b, class_map)
        sds_a = [d.id for d in a.sequence_diagrams]
        sds_b = [d.id for d in b.sequence_diagrams]
        best = 0.0
        if len(sds_a) <= len(sds_b):
            for perm in itertools.permutations(sds_b, len(sds_a)):
                candidate = dict(zip(sds_a, perm))
                best = max(best, functional_similarity(a, b, class_map, candidate))
        else:
            for perm in itertools.permutations(sds_a, len(sds_b)):
                candidate = dict(zip(perm, sds_b))
                best = max(best, functional_similarity(a, b, class_map, candidate))
        assert result.functional == pytest.approx(best, abs=1e-9)


def test_hungarian_functional_matcher_method(query_model, split_model):
    result = Matcher(query_model, split_model).ga_hungarian_functional(GAConfig(seed=4))
    assert result.method == "hungarian-functional"
    oracle = exhaustive_match(query_model, split_model)
    assert result.scores.aggregate == pytest.approx(oracle.scores.aggregate, abs=1e-9)
    assert result.sd_evaluations >= result.evaluations


# ---- resolved mappings ------------------------------------------------------------


def test_resolve_mapping_orients_to_argument_order(query_model, split_model):
    result = exhaustive_match(query_model, split_model)
    resolved = resolve_mapping(query_model, split_model, result.mapping)
    assert resolved.class_pairs == (("A", "A"), ("B", "B"), ("C", "C"))
    assert resolved.sd_pairs == (("s1", "s1"),)
    flipped = exhaustive_match(split_model, query_model)
    back = resolve_mapping(split_model, query_model, flipped.mapping)
    assert back.class_pairs == (("A", "A"), ("B", "B"), ("C", "C"))
