"""Entity matching: find the class/sequence-diagram mapping maximizing similarity.

The chromosome has two permutation segments: the first maps classes of the
model with more classes onto the one with fewer, the second does the same for
sequence diagrams. State machines are never searched; their pairing follows
the class mapping. A seeded GA handles realistic sizes, an exhaustive
enumerator serves as ground truth on small instances, and a Hungarian
assignment over pairwise diagram scores provides the alternative functional
mapping.

Internally the model with more classes always plays the "larger" role (ties
broken on canonical content), so results do not depend on argument order.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from typing import Mapping, Sequence

from .assignment import hungarian
from .canonical import serialize_canonical
from .errors import MappingError, MatchTooLargeError
from .model import RequirementSpec, SequenceDiagram
from .scoring import (
    DEFAULT_VIEW_WEIGHTS,
    KIND_ORDER,
    ScoreBreakdown,
    ScoringConfig,
    ViewWeights,
    behavioral_similarity,
    class_similarity,
    functional_similarity,
    kind_lookup,
    name_similarity,
    sequence_diagram_similarity,
    state_machine_similarity,
    structural_similarity,
)

EXHAUSTIVE_LIMIT = 10_000_000

_KIND_INDEX = {kind: i for i, kind in enumerate(KIND_ORDER)}


@dataclass(frozen=True)
class MatchDimensions:
    """Class and sequence-diagram counts of the two models being compared."""

    c_q: int
    c_r: int
    s_q: int
    s_r: int

    def __post_init__(self):
        if min(self.c_q, self.c_r, self.s_q, self.s_r) < 0:
            raise ValueError("dimensions must be non-negative")

    @property
    def min_c(self) -> int:
        return min(self.c_q, self.c_r)

    @property
    def max_c(self) -> int:
        return max(self.c_q, self.c_r)

    @property
    def min_s(self) -> int:
        return min(self.s_q, self.s_r)

    @property
    def max_s(self) -> int:
        return max(self.s_q, self.s_r)

    @classmethod
    def from_models(cls, m1: RequirementSpec, m2: RequirementSpec) -> "MatchDimensions":
        return cls(
            c_q=m1.class_count,
            c_r=m2.class_count,
            s_q=m1.sequence_diagram_count,
            s_r=m2.sequence_diagram_count,
        )

    def search_space(self) -> int:
        return math.perm(self.max_c, self.min_c) * math.perm(self.max_s, self.min_s)


@dataclass(frozen=True)
class Chromosome:
    """Two permutation segments over 1..maxC and 1..maxS."""

    class_segment: tuple[int, ...]
    sd_segment: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "class_segment", tuple(self.class_segment))
        object.__setattr__(self, "sd_segment", tuple(self.sd_segment))


@dataclass(frozen=True)
class MappingPair:
    """Injective pairs (larger-model index, smaller-model index), 1-based.

    The class map always covers every class of the smaller model; the
    sequence-diagram map likewise covers the smaller diagram set.
    """

    class_map: tuple[tuple[int, int], ...]
    sd_map: tuple[tuple[int, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "class_map", tuple(tuple(p) for p in self.class_map))
        object.__setattr__(self, "sd_map", tuple(tuple(p) for p in self.sd_map))

    def class_dict(self) -> dict[int, int]:
        return dict(self.class_map)

    def sd_dict(self) -> dict[int, int]:
        return dict(self.sd_map)


@dataclass(frozen=True)
class GAConfig:
    population_size: int = 60
    max_generations: int = 300
    tournament_size: int = 3
    crossover_rate: float = 0.9
    mutation_rate: float = 0.2
    elitism: int = 2
    stagnation_limit: int = 50
    seed: int = 42

    def __post_init__(self):
        if self.population_size < self.elitism + 2:
            raise ValueError("population_size must be at least elitism + 2")
        if self.tournament_size < 2:
            raise ValueError("tournament_size must be at least 2")
        for rate in (self.crossover_rate, self.mutation_rate):
            if not 0.0 <= rate <= 1.0:
                raise ValueError("rates must be in [0,1]")
        if self.elitism < 0 or self.max_generations < 0 or self.stagnation_limit < 0:
            raise ValueError("counts must be non-negative")


@dataclass(frozen=True)
class MatchResult:
    mapping: MappingPair
    scores: ScoreBreakdown
    method: str
    seed: int | None
    generations_run: int
    best_fitness_history: tuple[float, ...]
    evaluations: int = 0
    sd_evaluations: int = 0


@dataclass(frozen=True)
class FunctionalMatch:
    """Hungarian-optimal sequence-diagram mapping under a fixed class mapping."""

    sd_map: dict[str, str]
    functional: float
    pairwise_evaluations: int


@dataclass(frozen=True)
class ResolvedMapping:
    """Mapping expressed as (first-model id, second-model id) pairs."""

    class_pairs: tuple[tuple[str, str], ...]
    sd_pairs: tuple[tuple[str, str], ...]


def _require_permutation(segment: Sequence[int], n: int, label: str) -> None:
    if len(segment) != n or sorted(segment) != list(range(1, n + 1)):
        raise MappingError(f"{label} {list(segment)!r} is not a permutation of 1..{n}")


def decode(chromosome: Chromosome, dims: MatchDimensions) -> MappingPair:
    """Pair the first minC genes with smaller-model classes 1..minC (SDs alike)."""
    _require_permutation(chromosome.class_segment, dims.max_c, "class segment")
    _require_permutation(chromosome.sd_segment, dims.max_s, "sd segment")
    class_map = tuple(
        (chromosome.class_segment[i], i + 1) for i in range(dims.min_c)
    )
    sd_map = tuple((chromosome.sd_segment[i], i + 1) for i in range(dims.min_s))
    return MappingPair(class_map=class_map, sd_map=sd_map)


def encode(mapping: MappingPair, dims: MatchDimensions) -> Chromosome:
    """Inverse of decode; unmapped larger-model entities fill the tail in order."""

    def segment(pairs: tuple[tuple[int, int], ...], n_max: int, n_min: int, label: str):
        by_small = dict((small, large) for large, small in pairs)
        if len(pairs) != n_min or sorted(by_small) != list(range(1, n_min + 1)):
            raise MappingError(f"{label} does not cover smaller positions 1..{n_min}")
        head = [by_small[i] for i in range(1, n_min + 1)]
        if len(set(head)) != len(head) or any(not 1 <= g <= n_max for g in head):
            raise MappingError(f"{label} is not injective into 1..{n_max}")
        tail = [g for g in range(1, n_max + 1) if g not in set(head)]
        return tuple(head + tail)

    return Chromosome(
        class_segment=segment(mapping.class_map, dims.max_c, dims.min_c, "class map"),
        sd_segment=segment(mapping.sd_map, dims.max_s, dims.min_s, "sd map"),
    )


def _canonical_order(
    m1: RequirementSpec, m2: RequirementSpec, count1: int, count2: int
) -> tuple[RequirementSpec, RequirementSpec]:
    """(larger, smaller) by count; content decides ties so argument order never matters."""
    if count1 > count2:
        return m1, m2
    if count2 > count1:
        return m2, m1
    if serialize_canonical(m1) >= serialize_canonical(m2):
        return m1, m2
    return m2, m1


def class_roles(m1: RequirementSpec, m2: RequirementSpec):
    return _canonical_order(m1, m2, m1.class_count, m2.class_count)


def sd_roles(m1: RequirementSpec, m2: RequirementSpec):
    return _canonical_order(m1, m2, m1.sequence_diagram_count, m2.sequence_diagram_count)


def _id_maps(
    m1: RequirementSpec, m2: RequirementSpec, mapping: MappingPair
) -> tuple[dict[str, str], dict[str, str]]:
    """Translate index-level mapping into m1-id -> m2-id dictionaries."""
    cl_large, cl_small = class_roles(m1, m2)
    sd_large, sd_small = sd_roles(m1, m2)
    class_map: dict[str, str] = {}
    for large_i, small_i in mapping.class_map:
        try:
            lid = cl_large.class_diagram.classes[large_i - 1].id
            sid = cl_small.class_diagram.classes[small_i - 1].id
        except IndexError:
            raise MappingError(
                f"class pair ({large_i}, {small_i}) is out of range for these models"
            ) from None
        if cl_large is m1:
            class_map[lid] = sid
        else:
            class_map[sid] = lid
    sd_map: dict[str, str] = {}
    for large_i, small_i in mapping.sd_map:
        try:
            lid = sd_large.sequence_diagrams[large_i - 1].id
            sid = sd_small.sequence_diagrams[small_i - 1].id
        except IndexError:
            raise MappingError(
                f"sd pair ({large_i}, {small_i}) is out of range for these models"
            ) from None
        if sd_large is m1:
            sd_map[lid] = sid
        else:
            sd_map[sid] = lid
    return class_map, sd_map


def resolve_mapping(
    m1: RequirementSpec, m2: RequirementSpec, mapping: MappingPair
) -> ResolvedMapping:
    """Express an index-level mapping as id pairs oriented (m1, m2)."""
    class_map, sd_map = _id_maps(m1, m2, mapping)
    return ResolvedMapping(
        class_pairs=tuple(sorted(class_map.items())),
        sd_pairs=tuple(sorted(sd_map.items())),
    )


def fitness(
    m1: RequirementSpec,
    m2: RequirementSpec,
    mapping: MappingPair,
    weights: ViewWeights | None = None,
    scoring: ScoringConfig | None = None,
) -> ScoreBreakdown:
    """Score one mapping through the reference similarity implementations."""
    weights = weights or DEFAULT_VIEW_WEIGHTS
    dims = MatchDimensions.from_models(m1, m2)
    if len(mapping.class_map) != dims.min_c or len(mapping.sd_map) != dims.min_s:
        raise MappingError(
            f"mapping sizes ({len(mapping.class_map)}, {len(mapping.sd_map)}) do not match "
            f"dimensions ({dims.min_c}, {dims.min_s})"
        )
    class_map, sd_map = _id_maps(m1, m2, mapping)
    structural = structural_similarity(m1.class_diagram, m2.class_diagram, class_map, scoring)
    functional = functional_similarity(m1, m2, class_map, sd_map, scoring)
    behavioral = behavioral_similarity(m1, m2, class_map, scoring)
    return ScoreBreakdown.compute(structural, functional, behavioral, weights)


def functional_map_hungarian(
    m1: RequirementSpec,
    m2: RequirementSpec,
    class_map: Mapping[str, str],
    scoring: ScoringConfig | None = None,
) -> FunctionalMatch:
    """Exhaustive pairwise diagram scores + assignment, the GA-free alternative.

    Evaluates every (m1 diagram, m2 diagram) pair under the fixed class map,
    then picks the injective diagram mapping maximizing total similarity.
    """
    sds1, sds2 = m1.sequence_diagrams, m2.sequence_diagrams
    pairwise = len(sds1) * len(sds2)
    if not sds1 or not sds2:
        functional = functional_similarity(m1, m2, class_map, {}, scoring)
        return FunctionalMatch(sd_map={}, functional=functional, pairwise_evaluations=pairwise)
    sims = [
        [sequence_diagram_similarity(a, b, class_map, scoring) for b in sds2] for a in sds1
    ]
    assignment, _ = hungarian([[1.0 - v for v in row] for row in sims])
    sd_map = {sds1[r].id: sds2[c].id for r, c in assignment.items()}
    functional = functional_similarity(m1, m2, class_map, sd_map, scoring)
    return FunctionalMatch(sd_map=sd_map, functional=functional, pairwise_evaluations=pairwise)


class _SdPairContext:
    __slots__ = ("msgs_large", "msgs_small", "op_match", "large_is_class_large")

    def __init__(self, msgs_large, msgs_small, op_match, large_is_class_large):
        self.msgs_large = msgs_large
        self.msgs_small = msgs_small
        self.op_match = op_match
        self.large_is_class_large = large_is_class_large


class Matcher:
    """Shared evaluation context for repeatedly matching one model pair.

    Precomputes everything that does not depend on the mapping itself (class
    similarity matrix, relationship kind codes, per-diagram message structure,
    machine similarities), so evaluating one candidate mapping touches only
    small tables. Results are cached per decoded mapping; GA, exhaustive and
    hungarian-functional searches can share one instance.
    """

    def __init__(
        self,
        m1: RequirementSpec,
        m2: RequirementSpec,
        weights: ViewWeights | None = None,
        scoring: ScoringConfig | None = None,
    ):
        self.m1 = m1
        self.m2 = m2
        self.weights = weights or DEFAULT_VIEW_WEIGHTS
        self.scoring = scoring or ScoringConfig()
        self.dims = MatchDimensions.from_models(m1, m2)
        self.class_large, self.class_small = class_roles(m1, m2)
        self.sd_large, self.sd_small = sd_roles(m1, m2)
        self._cache: dict[tuple[tuple[int, ...], tuple[int, ...]], tuple] = {}
        self._hung_cache: dict[tuple[int, ...], tuple] = {}
        self._build_context()

    # -- context construction -------------------------------------------------

    def _build_context(self) -> None:
        cfg = self.scoring
        large_classes = self.class_large.class_diagram.classes
        small_classes = self.class_small.class_diagram.classes
        n_large, n_small = len(large_classes), len(small_classes)
        self._class_sim = [
            [class_similarity(lc, sc, cfg) for sc in small_classes] for lc in large_classes
        ]
        self._rel_large = self._kind_codes(self.class_large, large_classes)
        self._rel_small = self._kind_codes(self.class_small, small_classes)
        n_kinds = len(KIND_ORDER)
        self._one_minus_d = [
            [1.0 - cfg.kind_difference(KIND_ORDER[i], KIND_ORDER[j]) for j in range(n_kinds)]
            for i in range(n_kinds)
        ]
        total_classes = n_large + n_small
        self._coverage = (2 * n_small / total_classes) if total_classes else 0.0

        large_index = {c.id: i for i, c in enumerate(large_classes)}
        small_index = {c.id: i for i, c in enumerate(small_classes)}
        large_is_class_large = self.sd_large is self.class_large
        idx_for_sd_large = large_index if large_is_class_large else small_index
        idx_for_sd_small = small_index if large_is_class_large else large_index

        def resolve(sd: SequenceDiagram, index: dict[str, int]):
            lifelines = {l.id: l.class_id for l in sd.lifelines}
            return [
                (index[lifelines[m.from_lifeline]], index[lifelines[m.to_lifeline]], m.operation)
                for m in sd.messages
            ]

        theta = cfg.theta_msg
        self._sd_pairs: list[list[_SdPairContext]] = []
        small_resolved = [resolve(sd, idx_for_sd_small) for sd in self.sd_small.sequence_diagrams]
        for sd_l in self.sd_large.sequence_diagrams:
            row = []
            msgs_l = resolve(sd_l, idx_for_sd_large)
            for msgs_s in small_resolved:
                op_match = [
                    [name_similarity(a[2], b[2]) >= theta for b in msgs_s] for a in msgs_l
                ]
                row.append(_SdPairContext(msgs_l, msgs_s, op_match, large_is_class_large))
            self._sd_pairs.append(row)

        machines_large = self.class_large.machines_by_owner()
        machines_small = self.class_small.machines_by_owner()
        self._owns_large = [c.id in machines_large for c in large_classes]
        self._owns_small = [c.id in machines_small for c in small_classes]
        self._owner_idx_large = [i for i, owns in enumerate(self._owns_large) if owns]
        self._sm_sim: dict[tuple[int, int], float] = {}
        for i in self._owner_idx_large:
            for j, owns in enumerate(self._owns_small):
                if owns:
                    self._sm_sim[(i, j)] = state_machine_similarity(
                        machines_large[large_classes[i].id],
                        machines_small[small_classes[j].id],
                        cfg,
                    )
        self._has_machines = bool(machines_large or machines_small)
        w = self.weights
        self._w = (w.structural, w.functional, w.behavioral)
        self.max_fitness = w.structural + w.functional + w.behavioral

    @staticmethod
    def _kind_codes(model: RequirementSpec, classes) -> list[list[int]]:
        lookup = kind_lookup(model.class_diagram)
        n = len(classes)
        codes = [[0] * n for _ in range(n)]
        index = {c.id: i for i, c in enumerate(classes)}
        for (a, b), kind in lookup.items():
            ia, ib = index[a], index[b]
            code = _KIND_INDEX[kind]
            codes[ia][ib] = code
            codes[ib][ia] = code
        return codes

    # -- evaluation ------------------------------------------------------------

    def evaluate(self, class_sel: tuple[int, ...], sd_sel: tuple[int, ...]) -> tuple:
        """(structural, functional, behavioral, aggregate) for a decoded mapping."""
        key = (class_sel, sd_sel)
        found = self._cache.get(key)
        if found is None:
            found = self._compute(class_sel, sd_sel)
            self._cache[key] = found
        return found

    def _assign_array(self, class_sel: tuple[int, ...]) -> list[int]:
        assign = [-1] * self.dims.max_c
        for j, g in enumerate(class_sel):
            assign[g - 1] = j
        return assign

    def _compute(self, class_sel: tuple[int, ...], sd_sel: tuple[int, ...]) -> tuple:
        dims = self.dims
        assign = self._assign_array(class_sel)
        structural = self._structural(class_sel)
        if dims.max_s == 0:
            functional = 1.0
        elif dims.min_s == 0:
            functional = 0.0
        else:
            total = 0.0
            for p, g in enumerate(sd_sel):
                total += self._sd_pair_sim(g - 1, p, assign)
            functional = total / dims.max_s
        behavioral = self._behavioral(class_sel, assign)
        w_s, w_f, w_b = self._w
        return (
            structural,
            functional,
            behavioral,
            w_s * structural + w_f * functional + w_b * behavioral,
        )

    def _structural(self, class_sel: tuple[int, ...]) -> float:
        dims = self.dims
        if dims.max_c == 0:
            return 1.0
        if dims.min_c == 0:
            return 0.0
        cfg = self.scoring
        sim = self._class_sim
        acc = 0.0
        for j, g in enumerate(class_sel):
            acc += sim[g - 1][j]
        avg = acc / dims.min_c
        rel_large, rel_small, one_minus = self._rel_large, self._rel_small, self._one_minus_d
        racc = 0.0
        rcnt = 0
        for j1 in range(dims.min_c):
            l1 = class_sel[j1] - 1
            row_l = rel_large[l1]
            row_s = rel_small[j1]
            for j2 in range(j1 + 1, dims.min_c):
                k1 = row_l[class_sel[j2] - 1]
                k2 = row_s[j2]
                if k1 or k2:
                    racc += one_minus[k1][k2]
                    rcnt += 1
        rel = racc / rcnt if rcnt else 1.0
        return self._coverage * (cfg.class_sim_weight * avg + cfg.relationship_weight * rel)

    def _sd_pair_sim(self, large_idx: int, small_idx: int, assign: list[int]) -> float:
        ctx = self._sd_pairs[large_idx][small_idx]
        msgs_l, msgs_s = ctx.msgs_large, ctx.msgs_small
        n1, n2 = len(msgs_l), len(msgs_s)
        if n1 == 0 and n2 == 0:
            return 1.0
        if n1 == 0 or n2 == 0:
            return 0.0
        op_match = ctx.op_match
        prev = [0] * (n2 + 1)
        if ctx.large_is_class_large:
            for i in range(1, n1 + 1):
                cur = [0] * (n2 + 1)
                s1, r1, _ = msgs_l[i - 1]
                row = op_match[i - 1]
                for j in range(1, n2 + 1):
                    s2, r2, _ = msgs_s[j - 1]
                    if row[j - 1] and assign[s1] == s2 and assign[r1] == r2:
                        cur[j] = prev[j - 1] + 1
                    else:
                        cur[j] = prev[j] if prev[j] >= cur[j - 1] else cur[j - 1]
                prev = cur
        else:
            for i in range(1, n1 + 1):
                cur = [0] * (n2 + 1)
                s1, r1, _ = msgs_l[i - 1]
                row = op_match[i - 1]
                for j in range(1, n2 + 1):
                    s2, r2, _ = msgs_s[j - 1]
                    if row[j - 1] and assign[s2] == s1 and assign[r2] == r1:
                        cur[j] = prev[j - 1] + 1
                    else:
                        cur[j] = prev[j] if prev[j] >= cur[j - 1] else cur[j - 1]
                prev = cur
        return 2 * prev[n2] / (n1 + n2)

    def _behavioral(self, class_sel: tuple[int, ...], assign: list[int]) -> float:
        if not self._has_machines:
            return 1.0
        owns_large, owns_small = self._owns_large, self._owns_small
        total = 0.0
        counted = 0
        for j, g in enumerate(class_sel):
            l = g - 1
            ol, os = owns_large[l], owns_small[j]
            if ol or os:
                counted += 1
                if ol and os:
                    total += self._sm_sim[(l, j)]
        for l in self._owner_idx_large:
            if assign[l] < 0:
                counted += 1
        if counted == 0:
            return 1.0
        return total / counted

    # -- result assembly -------------------------------------------------------

    def _result(
        self,
        method: str,
        seed: int | None,
        class_sel: tuple[int, ...],
        sd_sel: tuple[int, ...],
        breakdown: tuple,
        generations: int,
        history: tuple[float, ...],
        evaluations: int,
        sd_evaluations: int = 0,
    ) -> MatchResult:
        mapping = MappingPair(
            class_map=tuple((g, j + 1) for j, g in enumerate(class_sel)),
            sd_map=tuple((g, j + 1) for j, g in enumerate(sd_sel)),
        )
        s, f, b, a = breakdown
        return MatchResult(
            mapping=mapping,
            scores=ScoreBreakdown(s, f, b, a),
            method=method,
            seed=seed,
            generations_run=generations,
            best_fitness_history=history,
            evaluations=evaluations,
            sd_evaluations=sd_evaluations,
        )

    # -- exhaustive search -----------------------------------------------------

    def exhaustive(self, limit: int = EXHAUSTIVE_LIMIT) -> MatchResult:
        """Enumerate every injective mapping; ties go to the lexicographically first."""
        dims = self.dims
        count = dims.search_space()
        if count > limit:
            raise MatchTooLargeError(count, limit)
        use_cache = count <= 200_000
        best = None
        best_key = None
        class_choices = itertools.permutations(range(1, dims.max_c + 1), dims.min_c)
        sd_all = list(itertools.permutations(range(1, dims.max_s + 1), dims.min_s))
        for class_sel in class_choices:
            for sd_sel in sd_all:
                if use_cache:
                    breakdown = self.evaluate(class_sel, sd_sel)
                else:
                    breakdown = self._compute(class_sel, sd_sel)
                if best is None or breakdown[3] > best[3]:
                    best = breakdown
                    best_key = (class_sel, sd_sel)
        assert best is not None and best_key is not None
        return self._result(
            "exhaustive",
            None,
            best_key[0],
            best_key[1],
            best,
            generations=0,
            history=(best[3],),
            evaluations=count,
        )

    # -- genetic search ----------------------------------------------------------

    def ga(self, config: GAConfig | None = None) -> MatchResult:
        """Seeded, deterministic GA over the two-segment chromosome.

        Tournament selection, per-segment order crossover and single-swap
        mutation, elitism, and a stagnation cutoff. Clone children are
        re-mutated (bounded) so small populations do not collapse early.
        """
        cfg = config or GAConfig()
        dims = self.dims
        n_c, n_s = dims.max_c, dims.max_s
        identity = (tuple(range(1, n_c + 1)), tuple(range(1, n_s + 1)))
        key_of = lambda ind: (ind[0][: dims.min_c], ind[1][: dims.min_s])

        space = dims.search_space()
        if space <= cfg.population_size:
            # One de-duplicated population covers every mapping: enumerate.
            best = None
            best_key = None
            for class_sel in itertools.permutations(range(1, n_c + 1), dims.min_c):
                for sd_sel in itertools.permutations(range(1, n_s + 1), dims.min_s):
                    breakdown = self.evaluate(class_sel, sd_sel)
                    if best is None or breakdown[3] > best[3]:
                        best = breakdown
                        best_key = (class_sel, sd_sel)
            return self._result(
                "ga", cfg.seed, best_key[0], best_key[1], best, 0, (best[3],), space,
                sd_evaluations=space * dims.min_s,
            )

        rng = random.Random(cfg.seed)

        def random_perm(n: int) -> tuple[int, ...]:
            genes = list(range(1, n + 1))
            rng.shuffle(genes)
            return tuple(genes)

        population = [identity]
        for _ in range(cfg.population_size - 1):
            population.append((random_perm(n_c), random_perm(n_s)))

        evaluations = 0

        def eval_all(pop):
            nonlocal evaluations
            evaluations += len(pop)
            return [self.evaluate(*key_of(ind)) for ind in pop]

        breakdowns = eval_all(population)
        fits = [b[3] for b in breakdowns]
        best_idx = max(range(len(fits)), key=fits.__getitem__)
        best_fit = fits[best_idx]
        best_key = key_of(population[best_idx])
        best_breakdown = breakdowns[best_idx]
        history = [best_fit]
        stagnant = 0
        generation = 0

        while (
            generation < cfg.max_generations
            and stagnant < cfg.stagnation_limit
            and best_fit < self.max_fitness - 1e-12
        ):
            order = sorted(range(len(population)), key=lambda i: -fits[i])
            next_pop = [population[i] for i in order[: cfg.elitism]]
            seen = set(next_pop)
            while len(next_pop) < cfg.population_size:
                pa = population[self._tournament(rng, fits, cfg.tournament_size)]
                pb = population[self._tournament(rng, fits, cfg.tournament_size)]
                child = (
                    self._vary_segment(rng, pa[0], pb[0], cfg),
                    self._vary_segment(rng, pa[1], pb[1], cfg),
                )
                child = _dedup_child(rng, child, seen)
                seen.add(child)
                next_pop.append(child)
            population = next_pop
            breakdowns = eval_all(population)
            fits = [b[3] for b in breakdowns]
            generation += 1
            gen_idx = max(range(len(fits)), key=fits.__getitem__)
            if fits[gen_idx] > best_fit:
                best_fit = fits[gen_idx]
                best_key = key_of(population[gen_idx])
                best_breakdown = breakdowns[gen_idx]
                stagnant = 0
            else:
                stagnant += 1
            history.append(best_fit)

        return self._result(
            "ga",
            cfg.seed,
            best_key[0],
            best_key[1],
            best_breakdown,
            generation,
            tuple(history),
            evaluations,
            sd_evaluations=evaluations * dims.min_s,
        )

    @staticmethod
    def _tournament(rng: random.Random, fits: list[float], k: int) -> int:
        best = rng.randrange(len(fits))
        for _ in range(k - 1):
            challenger = rng.randrange(len(fits))
            if fits[challenger] > fits[best]:
                best = challenger
        return best

    @staticmethod
    def _vary_segment(
        rng: random.Random, pa: tuple[int, ...], pb: tuple[int, ...], cfg: GAConfig
    ) -> tuple[int, ...]:
        child = pa
        if rng.random() < cfg.crossover_rate and len(pa) >= 2:
            child = _order_crossover(rng, pa, pb)
        if rng.random() < cfg.mutation_rate and len(child) >= 2:
            child = _swap_mutation(rng, child)
        return child

    # -- hungarian-functional search ---------------------------------------------

    def ga_hungarian_functional(self, config: GAConfig | None = None) -> MatchResult:
        """GA over the class segment only; diagrams paired by assignment solver.

        Every fitness evaluation scores the full minS x maxS diagram matrix,
        which is the cost the pairwise+assignment alternative pays.
        """
        cfg = config or GAConfig()
        dims = self.dims
        n_c = dims.max_c
        pair_cost = dims.min_s * dims.max_s

        def eval_class(class_sel: tuple[int, ...]) -> tuple:
            found = self._hung_cache.get(class_sel)
            if found is not None:
                return found
            assign = self._assign_array(class_sel)
            structural = self._structural(class_sel)
            behavioral = self._behavioral(class_sel, assign)
            if dims.max_s == 0:
                functional, sd_sel = 1.0, ()
            elif dims.min_s == 0:
                functional, sd_sel = 0.0, ()
            else:
                sims = [
                    [self._sd_pair_sim(x, y, assign) for y in range(dims.min_s)]
                    for x in range(dims.max_s)
                ]
                assignment, _ = hungarian([[1.0 - v for v in row] for row in sims])
                by_small = {y: x for x, y in assignment.items()}
                sd_sel = tuple(by_small[p] + 1 for p in range(dims.min_s))
                functional = sum(sims[x][y] for x, y in assignment.items()) / dims.max_s
            w_s, w_f, w_b = self._w
            found = (
                structural,
                functional,
                behavioral,
                w_s * structural + w_f * functional + w_b * behavioral,
                sd_sel,
            )
            self._hung_cache[class_sel] = found
            return found

        identity = tuple(range(1, n_c + 1))
        rng = random.Random(cfg.seed)
        evaluations = 0

        class_space = math.perm(dims.max_c, dims.min_c)
        if class_space <= cfg.population_size:
            best = None
            best_sel = None
            for class_sel in itertools.permutations(range(1, n_c + 1), dims.min_c):
                found = eval_class(class_sel)
                if best is None or found[3] > best[3]:
                    best = found
                    best_sel = class_sel
            return self._result(
                "hungarian-functional", cfg.seed, best_sel, best[4],
                best[:4], 0, (best[3],), class_space,
                sd_evaluations=class_space * pair_cost,
            )

        population = [identity]
        for _ in range(cfg.population_size - 1):
            genes = list(range(1, n_c + 1))
            rng.shuffle(genes)
            population.append(tuple(genes))

        def eval_all(pop):
            nonlocal evaluations
            evaluations += len(pop)
            return [eval_class(ind[: dims.min_c]) for ind in pop]

        results = eval_all(population)
        fits = [r[3] for r in results]
        best_i = max(range(len(fits)), key=fits.__getitem__)
        best = results[best_i]
        best_sel = population[best_i][: dims.min_c]
        history = [best[3]]
        stagnant = 0
        generation = 0
        while (
            generation < cfg.max_generations
            and stagnant < cfg.stagnation_limit
            and best[3] < self.max_fitness - 1e-12
        ):
            order = sorted(range(len(population)), key=lambda i: -fits[i])
            next_pop = [population[i] for i in order[: cfg.elitism]]
            seen = set(next_pop)
            while len(next_pop) < cfg.population_size:
                pa = population[self._tournament(rng, fits, cfg.tournament_size)]
                pb = population[self._tournament(rng, fits, cfg.tournament_size)]
                child = self._vary_segment(rng, pa, pb, cfg)
                tries = 0
                while child in seen and tries < 8 and len(child) >= 2:
                    child = _swap_mutation(rng, child)
                    tries += 1
                seen.add(child)
                next_pop.append(child)
            population = next_pop
            results = eval_all(population)
            fits = [r[3] for r in results]
            generation += 1
            gen_i = max(range(len(fits)), key=fits.__getitem__)
            if fits[gen_i] > best[3]:
                best = results[gen_i]
                best_sel = population[gen_i][: dims.min_c]
                stagnant = 0
            else:
                stagnant += 1
            history.append(best[3])

        return self._result(
            "hungarian-functional",
            cfg.seed,
            best_sel,
            best[4],
            best[:4],
            generation,
            tuple(history),
            evaluations,
            sd_evaluations=evaluations * pair_cost,
        )


def _dedup_child(
    rng: random.Random,
    child: tuple[tuple[int, ...], tuple[int, ...]],
    seen: set,
) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Re-mutate clone children (bounded) so the population keeps its diversity."""
    tries = 0
    while child in seen and tries < 8:
        class_seg = _swap_mutation(rng, child[0]) if len(child[0]) >= 2 else child[0]
        sd_seg = _swap_mutation(rng, child[1]) if len(child[1]) >= 2 else child[1]
        if class_seg == child[0] and sd_seg == child[1]:
            break
        child = (class_seg, sd_seg)
        tries += 1
    return child


def _order_crossover(
    rng: random.Random, pa: tuple[int, ...], pb: tuple[int, ...]
) -> tuple[int, ...]:
    """OX1: keep a slice of one parent, fill the rest in the other's order."""
    n = len(pa)
    i = rng.randrange(n)
    j = rng.randrange(n)
    if i > j:
        i, j = j, i
    middle = pa[i : j + 1]
    taken = set(middle)
    rest = [g for g in pb if g not in taken]
    return tuple(rest[:i]) + middle + tuple(rest[i:])


def _swap_mutation(rng: random.Random, perm: tuple[int, ...]) -> tuple[int, ...]:
    n = len(perm)
    i = rng.randrange(n)
    j = rng.randrange(n - 1)
    if j >= i:
        j += 1
    genes = list(perm)
    genes[i], genes[j] = genes[j], genes[i]
    return tuple(genes)


def ga_match(
    m1: RequirementSpec,
    m2: RequirementSpec,
    weights: ViewWeights | None = None,
    config: GAConfig | None = None,
    scoring: ScoringConfig | None = None,
) -> MatchResult:
    """One-shot GA match; see Matcher for repeated matching of the same pair."""
    return Matcher(m1, m2, weights, scoring).ga(config)


def exhaustive_match(
    m1: RequirementSpec,
    m2: RequirementSpec,
    weights: ViewWeights | None = None,
    scoring: ScoringConfig | None = None,
    limit: int = EXHAUSTIVE_LIMIT,
) -> MatchResult:
    """Ground-truth maximizer over every injective mapping (small instances only)."""
    return Matcher(m1, m2, weights, scoring).exhaustive(limit)


def hungarian_functional_match(
    m1: RequirementSpec,
    m2: RequirementSpec,
    weights: ViewWeights | None = None,
    config: GAConfig | None = None,
    scoring: ScoringConfig | None = None,
) -> MatchResult:
    return Matcher(m1, m2, weights, scoring).ga_hungarian_functional(config)


__all__ = [
    "Chromosome",
    "EXHAUSTIVE_LIMIT",
    "FunctionalMatch",
    "GAConfig",
    "MappingPair",
    "MatchDimensions",
    "MatchResult",
    "Matcher",
    "ResolvedMapping",
    "class_roles",
    "decode",
    "encode",
    "exhaustive_match",
    "fitness",
    "functional_map_hungarian",
    "ga_match",
    "hungarian",
    "hungarian_functional_match",
    "resolve_mapping",
    "sd_roles",
]
