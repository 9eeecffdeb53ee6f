"""Exception hierarchy shared by every module."""


class DomainError(ValueError):
    """An argument lies outside the domain an operation is defined on."""


class DegenerateSeriesError(DomainError):
    """The series has zero sample variance."""


class SeriesTooShortError(DomainError):
    """The series is shorter than the minimum length a statistic needs."""


class EnumerationTooLargeError(DomainError):
    """Full enumeration was requested for a series with too many orderings."""


class DataError(ValueError):
    """Input data (typically a file) is malformed."""
