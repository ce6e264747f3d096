"""Exception types shared across the toolkit.

Everything derives from :class:`AweKitError` and from ``ValueError`` so
callers can catch broadly or precisely.
"""


class AweKitError(ValueError):
    """Base class for all toolkit errors."""


class FormatError(AweKitError):
    """A file does not conform to its on-disk format."""


class ShapeError(AweKitError):
    """Array shapes or lengths are inconsistent."""


class IntervalError(AweKitError):
    """A time interval is empty or inverted."""


class ParameterError(AweKitError):
    """A numeric parameter is outside its valid range."""


class EmptySpanError(AweKitError):
    """A pooling request covered zero frames."""


class LayerError(AweKitError):
    """A layer index is not covered by the data at hand."""


class DegenerateVectorError(AweKitError):
    """A zero vector where cosine similarity is undefined."""


class UnknownWordError(AweKitError):
    """A word is missing from an embedding space."""


class EmptyVocabularyError(AweKitError):
    """No word types survived filtering."""


class LabelError(AweKitError):
    """A class label or label index is invalid."""


class SequenceError(AweKitError):
    """A sequence input is empty where at least one row is required."""


class SplitError(AweKitError):
    """A train/test split left one side empty."""


class ConfigurationError(AweKitError):
    """An experiment configuration is internally inconsistent."""
