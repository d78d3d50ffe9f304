"""Exception hierarchy shared across the package."""

from __future__ import annotations


class ModelMatchError(Exception):
    """Base class for all domain errors raised by this package."""


class CanonicalSyntaxError(ModelMatchError):
    """Input document is not syntactically valid."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        if line is not None:
            message = f"syntax error at line {line}, column {column}: {message}"
        super().__init__(message)
        self.line = line
        self.column = column


class SchemaError(ModelMatchError):
    """Document parses but does not conform to the canonical schema."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class SpecValidationError(ModelMatchError):
    """A constructed model violates one or more type invariants."""

    def __init__(self, violations):
        self.violations = list(violations)
        head = "; ".join(str(v) for v in self.violations[:5])
        more = "" if len(self.violations) <= 5 else f" (+{len(self.violations) - 5} more)"
        super().__init__(f"{len(self.violations)} validation violation(s): {head}{more}")


class XmiImportError(ModelMatchError):
    """XMI input could not be turned into a valid model."""


class MappingError(ModelMatchError):
    """An entity mapping is malformed (not injective, dangling endpoint, wrong size)."""


class MatchTooLargeError(ModelMatchError):
    """Exhaustive matching was asked to enumerate too many mappings."""

    def __init__(self, count: int, limit: int):
        super().__init__(
            f"exhaustive search space of {count} mappings exceeds the limit of {limit}"
        )
        self.count = count
        self.limit = limit


class ConfigError(ModelMatchError):
    """Configuration file or value is invalid."""


class RepositoryError(ModelMatchError):
    """Repository is missing, not initialized, or unreadable."""


class DuplicateContentError(ModelMatchError):
    """A byte-identical model already exists in the repository."""

    def __init__(self, model_id: str):
        super().__init__(f"byte-identical model already stored as '{model_id}'")
        self.model_id = model_id


class DuplicateModelError(ModelMatchError):
    """An existing model is more similar than the duplicate threshold allows."""

    def __init__(self, model_id: str, score: float, threshold: float):
        super().__init__(
            f"model '{model_id}' scores {score:.4f} >= duplicate threshold {threshold:.4f}"
        )
        self.model_id = model_id
        self.score = score
        self.threshold = threshold


class PerturbationError(ModelMatchError):
    """A perturbation operator cannot be applied to the given model."""
