"""Acceptance suite: one test per numbered criterion, each printing a PASS line.

Run `pytest tests/test_acceptance.py -v -s` to see the per-criterion lines and
the functional-view cost table (criterion 5). The synthetic-retrieval check
(criterion 7) is the slow one; it scores a 120-model corpus end to end.
"""

import itertools
import random
import time

import pytest

from modelmatch.canonical import parse_canonical, serialize_canonical
from modelmatch.corpus import CorpusConfig, generate_corpus, random_spec
from modelmatch.evaluation import average_precision, evaluate_rankings, mean_average_precision, r_precision
from modelmatch.matching import GAConfig, Matcher, exhaustive_match, hungarian
from modelmatch.metadata import PrefilterConfig, compute_metadata, cyclomatic_complexity, prefilter_pass
from modelmatch.model import State, StateMachine, Transition
from modelmatch.repository import add_model, init_repo, retrieve

from conftest import build_inconsistent_model, build_query_model, build_split_model


def _report(number: int, label: str) -> None:
    print(f"\nACCEPTANCE {number}: PASS - {label}", flush=True)


def test_criterion_1_fixture_ordering():
    started = time.perf_counter()
    q, r1, r2 = build_query_model(), build_inconsistent_model(), build_split_model()
    matcher_r1 = Matcher(q, r1)
    matcher_r2 = Matcher(q, r2)
    oracle_r1 = matcher_r1.exhaustive()
    oracle_r2 = matcher_r2.exhaustive()
    assert oracle_r2.scores.aggregate > oracle_r1.scores.aggregate
    assert oracle_r1.scores.aggregate < 1.0
    for seed in range(20):
        ga_r1 = matcher_r1.ga(GAConfig(seed=seed))
        ga_r2 = matcher_r2.ga(GAConfig(seed=seed))
        assert ga_r2.scores.aggregate > ga_r1.scores.aggregate, f"seed {seed}"
        assert ga_r1.scores.aggregate < 1.0
    elapsed = time.perf_counter() - started
    assert elapsed < 1.0, f"took {elapsed:.2f}s"
    _report(1, f"split model outranks inconsistent model, 20/20 seeds ({elapsed:.2f}s)")


def test_criterion_2_identity_retrieval(tmp_path):
    rng = random.Random(11)
    models = [
        random_spec(rng, name=f"m{i}", min_classes=2, max_classes=8, min_sds=1, max_sds=3)
        for i in range(10)
    ]
    repo = init_repo(tmp_path / "repo")
    for i, spec in enumerate(models):
        add_model(repo, spec, model_id=f"m{i}")
    for seed in (1, 42, 20250810):
        for i, spec in enumerate(models):
            results = retrieve(repo, spec, ga_config=GAConfig(seed=seed))
            assert results[0].model_id == f"m{i}"
            assert results[0].scores.aggregate == pytest.approx(1.0, abs=1e-9)
    _report(2, "each of 10 stored models retrieves itself first at aggregate 1.0")


def test_criterion_3_ga_matches_exhaustive_oracle():
    started = time.perf_counter()
    rng = random.Random(20250810)
    histories_ok = True
    for p in range(30):
        a = random_spec(rng, name=f"a{p}", min_classes=2, max_classes=6,
                        min_sds=0 if p % 5 == 0 else 1, max_sds=3)
        b = random_spec(rng, name=f"b{p}", min_classes=2, max_classes=6,
                        min_sds=0 if p % 7 == 0 else 1, max_sds=3)
        matcher = Matcher(a, b)
        oracle = matcher.exhaustive()
        hits = 0
        for seed in range(20):
            result = matcher.ga(GAConfig(seed=seed))
            if abs(result.scores.aggregate - oracle.scores.aggregate) <= 1e-9:
                hits += 1
            history = result.best_fitness_history
            if any(x > y + 1e-12 for x, y in zip(history, history[1:])):
                histories_ok = False
        assert hits >= 18, f"pair {p}: only {hits}/20 seeds reached the oracle"
    assert histories_ok, "a best-fitness history decreased"
    elapsed = time.perf_counter() - started
    assert elapsed < 60.0, f"took {elapsed:.1f}s"
    _report(3, f"30 pairs x 20 seeds >= 18/20 oracle hits, histories monotone ({elapsed:.1f}s)")


def test_criterion_4_hungarian_exactness():
    assignment, cost = hungarian([[0, 1], [1, 0]])
    assert (assignment, cost) == ({0: 0, 1: 1}, 0.0)
    assignment, cost = hungarian([[1, 2, 3], [2, 4, 6], [3, 6, 9]])
    assert (assignment, cost) == ({0: 2, 1: 1, 2: 0}, 10.0)
    assignment, cost = hungarian([[5, 1, 9], [9, 5, 1]])
    assert (assignment, cost) == ({0: 1, 1: 2}, 2.0)

    rng = random.Random(4242)
    for _ in range(200):
        rows, cols = rng.randint(1, 7), rng.randint(1, 7)
        matrix = [[rng.random() for _ in range(cols)] for _ in range(rows)]
        _, cost = hungarian(matrix)
        if rows <= cols:
            brute = min(
                sum(matrix[r][c] for r, c in enumerate(perm))
                for perm in itertools.permutations(range(cols), rows)
            )
        else:
            brute = min(
                sum(matrix[r][c] for c, r in enumerate(perm))
                for perm in itertools.permutations(range(rows), cols)
            )
        assert cost == brute
    _report(4, "assignment cost equals brute-force minimum on 200 random matrices")


def test_criterion_5_functional_view_cost_table():
    rng = random.Random(512)
    rows = []
    for s in range(2, 7):
        a = random_spec(rng, name=f"s{s}a", min_classes=5, max_classes=6,
                        min_sds=s, max_sds=s, max_messages=5)
        b = random_spec(rng, name=f"s{s}b", min_classes=5, max_classes=6,
                        min_sds=s, max_sds=s, max_messages=5)
        matcher = Matcher(a, b)
        ga = matcher.ga(GAConfig(seed=1))
        alt = matcher.ga_hungarian_functional(GAConfig(seed=1))
        pairwise_per_candidate = s * s
        rows.append(
            (s, pairwise_per_candidate, ga.evaluations, ga.sd_evaluations, alt.sd_evaluations)
        )
    print("\nfunctional-view cost comparison (per model pair)")
    print(f"{'s':>3} {'pairwise/candidate':>19} {'ga fitness evals':>17} "
          f"{'ga sd evals':>12} {'assignment-route sd evals':>26}")
    for s, pairwise, evals, sd_evals, alt_sd in rows:
        print(f"{s:>3} {pairwise:>19} {evals:>17} {sd_evals:>12} {alt_sd:>26}")
    for s, pairwise, evals, sd_evals, alt_sd in rows:
        assert pairwise == s * s
        assert evals > 0 and sd_evals == evals * s
        assert alt_sd >= pairwise
    _report(5, "cost comparison table emitted (measurement only, no threshold)")


def test_criterion_6_ir_metrics():
    assert average_precision(["a", "x", "b"], {"a", "b"}) == pytest.approx(5 / 6)
    assert average_precision(["x", "a"], {"a", "b"}) == pytest.approx(0.25)
    assert r_precision(["a", "x", "b"], {"a", "b"}) == pytest.approx(0.5)
    assert mean_average_precision(
        [(["a", "x", "b"], {"a", "b"}), (["a", "b"], {"a", "b"})]
    ) == pytest.approx(11 / 12)

    rng = random.Random(99)
    universe = [f"d{i}" for i in range(30)]
    for _ in range(100):
        ranked = rng.sample(universe, rng.randint(1, 20))
        relevant = set(rng.sample(universe, rng.randint(1, 8)))
        total = 0.0
        for k in range(1, len(ranked) + 1):
            if ranked[k - 1] in relevant:
                total += sum(1 for m in ranked[:k] if m in relevant) / k
        assert average_precision(ranked, relevant) == pytest.approx(
            total / len(relevant), abs=1e-12
        )
    _report(6, "AP / R-precision / MAP reproduce hand values and the brute-force oracle")


def test_criterion_7_synthetic_retrieval_quality(tmp_path):
    started = time.perf_counter()
    models, judgments = generate_corpus(
        CorpusConfig(base_models=30, variants_per_base=3, ops_per_variant=2), seed=20250810
    )
    by_id = dict(models)
    repo = init_repo(tmp_path / "repo")
    for model_id, spec in models:
        add_model(repo, spec, model_id=model_id)

    # Full rankings without pre-filtering (every candidate scored).
    rankings_full = {}
    for query_id in sorted(judgments):
        results = retrieve(repo, by_id[query_id], use_prefilter=False, top_n=None, jobs=2)
        rankings_full[query_id] = [r.model_id for r in results]
    _, map_without = evaluate_rankings(rankings_full, judgments)

    # Pre-filter decisions; scoring is per-pair deterministic, so the
    # pre-filtered ranking is the full ranking restricted to survivors.
    metas = {model_id: compute_metadata(spec) for model_id, spec in models}
    survivors_total = 0
    rankings_filtered = {}
    for query_id in sorted(judgments):
        passed = {
            model_id
            for model_id in metas
            if prefilter_pass(metas[query_id], metas[model_id]).passed
        }
        survivors_total += len(passed)
        rankings_filtered[query_id] = [m for m in rankings_full[query_id] if m in passed]
    _, map_with = evaluate_rankings(rankings_filtered, judgments)

    # Bind the shortcut to the real pipeline on one query.
    probe = sorted(judgments)[0]
    probe_results = retrieve(repo, by_id[probe], use_prefilter=True, top_n=None, jobs=2)
    assert [r.model_id for r in probe_results] == rankings_filtered[probe]

    scored_fraction = survivors_total / (len(judgments) * len(models))
    elapsed = time.perf_counter() - started
    assert map_without >= 0.9, f"MAP without pre-filter {map_without:.4f}"
    assert abs(map_without - map_with) <= 0.02, f"{map_without:.4f} vs {map_with:.4f}"
    assert scored_fraction <= 0.70, f"scored {scored_fraction:.2%} of candidates"
    assert elapsed < 300.0, f"took {elapsed:.0f}s"
    _report(
        7,
        f"MAP {map_without:.4f} (no filter) vs {map_with:.4f} (filtered), "
        f"{scored_fraction:.0%} scored, {elapsed:.0f}s",
    )


def test_criterion_8_metadata_checks():
    machine = StateMachine(
        owner_class_id="A",
        states=(
            State("s0", "start", "initial"),
            State("s1", "one"),
            State("s2", "two"),
            State("s3", "end", "final"),
        ),
        transitions=(
            Transition("s0", "s1", "a"),
            Transition("s1", "s2", "b"),
            Transition("s2", "s1", "c"),
            Transition("s2", "s3", "d"),
            Transition("s1", "s3", "e"),
        ),
    )
    assert cyclomatic_complexity(machine) == 3

    rng = random.Random(321)
    sample = random_spec(rng, name="sample")
    meta = compute_metadata(sample)
    for _ in range(1000):
        cfg = PrefilterConfig(
            size_tolerance=rng.random(),
            domain_filter_enabled=rng.random() < 0.5,
            min_token_jaccard=rng.random(),
        )
        assert prefilter_pass(meta, meta, cfg).passed

    fixtures = [build_query_model(), build_inconsistent_model(), build_split_model()]
    fixtures += [random_spec(rng, name=f"f{i}") for i in range(5)]
    for spec in fixtures:
        payload = serialize_canonical(spec)
        assert serialize_canonical(spec) == payload
        assert serialize_canonical(parse_canonical(payload)) == payload
    _report(8, "complexity fixture, 1000-config duplicate pass, byte-stable round trips")


def test_criterion_9_exhaustive_symmetry():
    rng = random.Random(606)
    worst = 0.0
    for p in range(50):
        a = random_spec(rng, name=f"a{p}", min_classes=2, max_classes=5,
                        min_sds=0 if p % 6 == 0 else 1, max_sds=2, max_messages=4)
        b = random_spec(rng, name=f"b{p}", min_classes=2, max_classes=5,
                        min_sds=0 if p % 4 == 0 else 1, max_sds=2, max_messages=4)
        forward = exhaustive_match(a, b).scores.aggregate
        backward = exhaustive_match(b, a).scores.aggregate
        worst = max(worst, abs(forward - backward))
        assert abs(forward - backward) <= 1e-9
    _report(9, f"aggregate symmetric under argument swap (worst delta {worst:.1e})")
