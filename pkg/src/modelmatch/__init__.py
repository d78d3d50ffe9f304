"""modelmatch: retrieval of multi-view requirement models by similarity.

Models bundle a class diagram, sequence diagrams and per-class state
machines. Retrieval ranks stored models against a query using one consistent
class mapping across all three views, found by a seeded genetic algorithm
(with exhaustive and assignment-based alternatives).
"""

__version__ = "0.1.0"

from .canonical import (
    content_hash,
    load_spec,
    parse_canonical,
    save_spec,
    serialize_canonical,
)
from .config import EngineConfig, default_engine_config, load_config, resolve_config
from .corpus import (
    CorpusConfig,
    PERTURBATION_KINDS,
    PerturbationOp,
    generate_corpus,
    perturb,
    random_spec,
)
from .errors import (
    CanonicalSyntaxError,
    ConfigError,
    DuplicateContentError,
    DuplicateModelError,
    MappingError,
    MatchTooLargeError,
    ModelMatchError,
    PerturbationError,
    RepositoryError,
    SchemaError,
    SpecValidationError,
    XmiImportError,
)
from .evaluation import (
    QueryEvaluation,
    average_precision,
    evaluate_rankings,
    format_judgments,
    format_report,
    load_judgments,
    mean_average_precision,
    parse_judgments,
    r_precision,
)
from .matching import (
    Chromosome,
    FunctionalMatch,
    GAConfig,
    MappingPair,
    MatchDimensions,
    MatchResult,
    Matcher,
    ResolvedMapping,
    decode,
    encode,
    exhaustive_match,
    fitness,
    functional_map_hungarian,
    ga_match,
    hungarian,
    hungarian_functional_match,
    resolve_mapping,
)
from .metadata import (
    Metadata,
    PrefilterConfig,
    PrefilterDecision,
    compute_metadata,
    cyclomatic_complexity,
    prefilter_pass,
    relative_difference,
)
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
    Violation,
    make_class,
    make_sequence_diagram,
    require_valid,
    validate,
)
from .repository import (
    RankedResult,
    RepoIndexEntry,
    add_model,
    check_duplicate_of,
    init_repo,
    list_models,
    load_model,
    retrieve,
)
from .scoring import (
    ScoreBreakdown,
    ScoringConfig,
    ViewWeights,
    aggregate,
    behavioral_similarity,
    class_similarity,
    functional_similarity,
    member_set_similarity,
    name_similarity,
    sequence_diagram_similarity,
    state_machine_similarity,
    structural_similarity,
)
from .xmi import import_xmi, import_xmi_file
