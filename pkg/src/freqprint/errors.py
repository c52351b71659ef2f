"""Exception hierarchy.

Everything the library raises on purpose derives from FreqprintError so the
CLI can catch one type and exit nonzero.
"""


class FreqprintError(Exception):
    pass


class UnknownFrequencyError(FreqprintError):
    """A kHz value is not a member of the cluster's frequency table."""


class BadClusterError(FreqprintError):
    """Cluster id or local level index out of range."""


class BadDurationError(FreqprintError):
    """Requested capture duration is not positive."""


class EmptyProfileListError(FreqprintError):
    """Corpus generation needs at least one workload profile."""


class AliasedCarrierError(FreqprintError):
    """EM sample rate below twice the highest synthetic carrier frequency."""


class EmptyTraceError(FreqprintError):
    """A trace or log contains no samples."""


class ParseError(FreqprintError):
    """Malformed record in an on-disk log; carries path and line number."""

    def __init__(self, path, line_no, reason):
        super().__init__(f"{path}:{line_no}: {reason}")
        self.path = str(path)
        self.line_no = line_no
        self.reason = reason


class NonMonotonicTimeError(FreqprintError):
    """Sample timestamps go backwards."""


class HeaderMismatchError(FreqprintError):
    """EM payload disagrees with its sidecar header."""


class LengthMismatchError(FreqprintError):
    """Series or rows that must share a length do not."""


class ClassTooSmallError(FreqprintError):
    """A class has too few signatures to split."""


class TooShortError(FreqprintError):
    """Series shorter than the window plan requires."""


class LayoutMismatchError(FreqprintError):
    """Feature columns do not match the fitted window layout."""


class KTooLargeError(FreqprintError):
    """KNN neighbor count exceeds the number of training rows."""


class SingleClassError(FreqprintError):
    """SVM training needs at least two classes."""


class WidthMismatchError(FreqprintError):
    """Prediction rows are wider or narrower than the training rows."""


class UnknownLabelError(FreqprintError):
    """A label is not part of the trained class set / corpus."""


class ConfigError(FreqprintError):
    """Bad or inconsistent configuration file."""


class IoError(FreqprintError):
    """Filesystem-level failure wrapped with context."""
