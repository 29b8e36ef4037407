"""Exception types raised across the pipeline.

Everything derives from DeepBoostError so callers can catch the whole
family; the CLI maps these onto exit statuses.
"""


class DeepBoostError(Exception):
    """Base class for all errors raised by this package."""


# --- dataset ingestion ---------------------------------------------------

class UnsupportedFormatError(DeepBoostError):
    """File extension is not one of the supported raster formats."""


class CorruptImageError(DeepBoostError):
    """File claims a supported format but cannot be decoded."""


class UnsupportedChannelCountError(DeepBoostError):
    """Image has a channel count other than 1 or 3."""


class DegenerateImageError(DeepBoostError):
    """Image too small to resample (width or height < 2)."""


class InsufficientClassSizeError(DeepBoostError):
    """A class does not have strictly more items than train_per_class."""


# --- filter bank ----------------------------------------------------------

class InvalidFilterConfigError(DeepBoostError):
    """Filter bank parameters out of range."""


# --- weak learner ----------------------------------------------------------

class DegenerateWeightsError(DeepBoostError):
    """Sample weights are non-positive or non-finite."""


class EmptyFeatureMatrixError(DeepBoostError):
    """Feature matrix has no columns to search."""


class DimensionOutOfRangeError(DeepBoostError):
    """Stump references a feature dimension beyond the input vector."""


# --- boosting ---------------------------------------------------------------

class SingleClassInputError(DeepBoostError):
    """Training labels contain only one class."""


class DimensionMismatchError(DeepBoostError):
    """Feature vector does not match the classifier's dimensionality."""


# --- composition ------------------------------------------------------------

class TooFewFeaturesError(DeepBoostError):
    """Fewer than two selected features; nothing to pair."""


class MissingErrorRecordError(DeepBoostError):
    """A pair references a feature without a recorded training error."""


class IndexOutOfRangeError(DeepBoostError):
    """Composite parent index beyond the lower layer's dimensionality."""


# --- layered model ----------------------------------------------------------

class ConfigMismatchError(DeepBoostError):
    """Input does not match the configuration the model was trained with."""


class LayerOutOfRangeError(DeepBoostError):
    """Requested layer index outside 1..L."""


class VersionMismatchError(DeepBoostError):
    """Model file has wrong magic bytes or an unsupported format version."""


class ChecksumMismatchError(DeepBoostError):
    """Model file is truncated or its payload checksum does not match."""
