"""Exception hierarchy shared by every stage of the pipeline."""

from __future__ import annotations


class ValuationError(Exception):
    """Base class for all errors raised by this package."""


class MalformedRow(ValuationError):
    def __init__(self, path, line: int, column: str, reason: str):
        self.path = str(path)
        self.line = line
        self.column = column
        self.reason = reason
        super().__init__(f"{self.path}:{line}: column {column!r}: {reason}")


class UnknownIndicator(ValuationError):
    pass


class DuplicateDefinition(ValuationError):
    pass


class DuplicateObservation(ValuationError):
    pass


class MissingField(ValuationError):
    pass


class RangeViolation(ValuationError):
    pass


class AllMissing(ValuationError):
    pass


class NoDataForPillar(ValuationError):
    pass


class RankOutOfRange(ValuationError):
    pass


class GordonInvalid(ValuationError):
    pass


class NonviableRevenue(ValuationError):
    pass


class ConfigError(ValuationError):
    pass


class UnknownParameter(ConfigError):
    pass


class IoError(ValuationError):
    def __init__(self, path, cause):
        self.path = str(path)
        self.cause = cause
        super().__init__(f"{self.path}: {cause}")
