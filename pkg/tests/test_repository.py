import logging

import pytest

from modelmatch.canonical import serialize_canonical
from modelmatch.corpus import random_spec
from modelmatch.errors import (
    DuplicateContentError,
    DuplicateModelError,
    RepositoryError,
)
from modelmatch.matching import GAConfig
from modelmatch.repository import (
    add_model,
    check_duplicate_of,
    init_repo,
    list_models,
    load_model,
    retrieve,
)

FAST_GA = GAConfig(population_size=30, max_generations=80, stagnation_limit=15, seed=42)


@pytest.fixture
def repo(tmp_path):
    return init_repo(tmp_path / "repo")


def test_init_then_add_then_list(repo, query_model):
    model_id = add_model(repo, query_model)
    entries = list_models(repo)
    assert [e.model_id for e in entries] == [model_id]
    assert entries[0].metadata.class_count == 3
    assert load_model(repo, model_id) == query_model


def test_init_twice_fails(tmp_path):
    init_repo(tmp_path / "r")
    with pytest.raises(RepositoryError, match="already initialized"):
        init_repo(tmp_path / "r")


def test_byte_identical_readd_is_rejected(repo, query_model):
    model_id = add_model(repo, query_model)
    with pytest.raises(DuplicateContentError) as err:
        add_model(repo, query_model)
    assert err.value.model_id == model_id


def test_explicit_model_id(repo, query_model, split_model):
    assert add_model(repo, query_model, model_id="q") == "q"
    with pytest.raises(RepositoryError, match="already used"):
        add_model(repo, split_model, model_id="q")


def test_duplicate_threshold_rejects_structural_copy(repo, query_model):
    add_model(repo, query_model, model_id="original")
    copy = query_model
    renamed = copy.__class__(
        name="other-name",
        class_diagram=copy.class_diagram,
        sequence_diagrams=copy.sequence_diagrams,
        state_machines=copy.state_machines,
    )
    with pytest.raises(DuplicateModelError) as err:
        add_model(repo, renamed, check_duplicate=True, ga_config=FAST_GA)
    assert err.value.model_id == "original"
    assert err.value.score == pytest.approx(1.0, abs=1e-9)
    # force overrides the guard
    add_model(repo, renamed, check_duplicate=True, force=True, ga_config=FAST_GA)
    assert len(list_models(repo)) == 2


def test_retrieve_identity_ranks_first(repo, query_model, split_model, inconsistent_model):
    add_model(repo, query_model, model_id="q")
    add_model(repo, split_model, model_id="r2")
    add_model(repo, inconsistent_model, model_id="r1")
    results = retrieve(repo, query_model, ga_config=FAST_GA)
    assert results[0].model_id == "q"
    assert results[0].scores.aggregate == pytest.approx(1.0, abs=1e-9)
    assert results[0].prefiltered


def test_retrieve_fixture_ordering(repo, query_model, split_model, inconsistent_model):
    add_model(repo, split_model, model_id="r2")
    add_model(repo, inconsistent_model, model_id="r1")
    results = retrieve(repo, query_model, ga_config=FAST_GA)
    assert [r.model_id for r in results] == ["r2", "r1"]
    assert results[0].scores.aggregate > results[1].scores.aggregate


def test_retrieve_empty_repo(repo, query_model):
    assert retrieve(repo, query_model) == []


def test_retrieve_skips_corrupt_entries(repo, query_model, split_model, caplog):
    add_model(repo, query_model, model_id="good")
    add_model(repo, split_model, model_id="bad")
    model_file = repo / "models" / "bad.rsq"
    model_file.write_bytes(serialize_canonical(split_model) + b"\n")
    with caplog.at_level(logging.WARNING, logger="modelmatch.repository"):
        results = retrieve(repo, query_model, ga_config=FAST_GA)
    assert [r.model_id for r in results] == ["good"]
    assert any("hash mismatch" in r.message for r in caplog.records)


def test_retrieve_never_mutates_the_repository(repo, query_model, split_model):
    add_model(repo, query_model, model_id="q")
    add_model(repo, split_model, model_id="r2")
    index_before = (repo / "index.rsx").read_bytes()
    files_before = sorted(p.name for p in (repo / "models").iterdir())
    retrieve(repo, query_model, ga_config=FAST_GA)
    assert (repo / "index.rsx").read_bytes() == index_before
    assert sorted(p.name for p in (repo / "models").iterdir()) == files_before


def test_retrieve_is_deterministic(repo, rng):
    for i in range(4):
        add_model(repo, random_spec(rng, name=f"m{i}"), model_id=f"m{i}")
    query = random_spec(rng, name="query")
    first = retrieve(repo, query, ga_config=FAST_GA)
    second = retrieve(repo, query, ga_config=FAST_GA)
    assert first == second


def test_prefilter_exclusions_reported_when_verbose(repo, rng, query_model):
    add_model(repo, query_model, model_id="small")
    big = random_spec(rng, name="big", min_classes=8, max_classes=8, min_sds=3, max_sds=3)
    add_model(repo, big, model_id="big")
    results = retrieve(repo, query_model, ga_config=FAST_GA, include_excluded=True)
    by_id = {r.model_id: r for r in results}
    assert by_id["small"].prefiltered
    assert not by_id["big"].prefiltered
    assert by_id["big"].reason.startswith("size(")
    assert by_id["big"].scores is None
    # with the prefilter disabled everything is scored
    results = retrieve(repo, query_model, ga_config=FAST_GA, use_prefilter=False)
    assert {r.model_id for r in results} == {"small", "big"}


def test_top_n_truncates(repo, rng):
    for i in range(5):
        add_model(repo, random_spec(rng, name=f"m{i}"), model_id=f"m{i}")
    query = random_spec(rng, name="q")
    results = retrieve(repo, query, ga_config=FAST_GA, use_prefilter=False, top_n=2)
    assert len(results) == 2


def test_check_duplicate(repo, query_model, split_model, inconsistent_model):
    assert check_duplicate_of(repo, query_model) is None
    add_model(repo, split_model, model_id="r2")
    found = check_duplicate_of(repo, query_model, 0.98, ga_config=FAST_GA)
    assert found is None  # related but well below the threshold
    add_model(repo, query_model, model_id="q")
    found = check_duplicate_of(repo, query_model, 0.98, ga_config=FAST_GA)
    assert found == ("q", 1.0)


def test_parallel_retrieve_matches_serial(repo, rng):
    for i in range(6):
        add_model(repo, random_spec(rng, name=f"m{i}"), model_id=f"m{i}")
    query = random_spec(rng, name="q")
    serial = retrieve(repo, query, ga_config=FAST_GA, use_prefilter=False, jobs=1)
    parallel = retrieve(repo, query, ga_config=FAST_GA, use_prefilter=False, jobs=2)
    assert serial == parallel
