"""Exception hierarchy shared across the pipeline."""


class AttackMapperError(Exception):
    """Base class for all domain errors."""


class ParseError(AttackMapperError):
    """Input bytes could not be decoded or parsed at all."""


class SchemaError(AttackMapperError):
    """Parsed input violates the expected structure (missing keys, duplicate ids)."""


class EmptyCorpusError(AttackMapperError):
    """A dataset operation produced or received zero usable samples."""


class DatasetImportError(AttackMapperError):
    """Imported rows reference labels unknown to the registry.

    `rows` holds (row_number, offending_value) pairs for reporting.
    """

    def __init__(self, message: str, rows=()):
        super().__init__(message)
        self.rows = list(rows)


class MergeError(AttackMapperError):
    """Corpora built against different registries cannot be merged."""


class FitError(AttackMapperError):
    """Vectorizer fitting received unusable input."""


class TrainError(AttackMapperError):
    """Classifier training received inconsistent data."""


class PredictError(AttackMapperError):
    """Inference input does not match the trained model."""


class FormatError(AttackMapperError):
    """Persisted artifact carries an unsupported format version."""


class ValidationError(AttackMapperError):
    """Imported numeric data violates its stated constraints."""


class ArgumentError(AttackMapperError, ValueError):
    """An argument is outside its documented domain."""
