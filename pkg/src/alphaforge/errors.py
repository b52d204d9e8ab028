"""Exception types shared across the engine."""


class AlphaForgeError(Exception):
    """Base class for all engine errors."""


class MalformedRow(AlphaForgeError):
    """A CSV row could not be parsed (non-numeric field, bad date, wrong arity)."""


class InvariantViolation(AlphaForgeError):
    """A domain invariant does not hold (e.g. high < low, negative price)."""


class DuplicateDate(AlphaForgeError):
    """Two bars share the same date within one series."""


class EmptyFile(AlphaForgeError):
    """An input file contains a header but no data rows."""


class DegenerateSplit(AlphaForgeError):
    """A train/test split would leave one side empty."""


class EmptyUniverse(AlphaForgeError):
    """Every ticker was dropped while restricting the universe."""


class SeriesTooShort(AlphaForgeError):
    """A series is shorter than the computation's warm-up requirement."""


class TooFewRows(AlphaForgeError):
    """Not enough rows to fit statistics."""


class EmptyDataset(AlphaForgeError):
    """Feature/label assembly produced no rows."""


class SingleClassDataset(AlphaForgeError):
    """Training data contains only one label class."""


class CorruptModelFile(AlphaForgeError):
    """A model file is unreadable or structurally invalid."""


class SchemaVersionMismatch(AlphaForgeError):
    """A model file was written with an unsupported schema version."""


class InvalidProbabilities(AlphaForgeError):
    """A sentiment probability triple is off the simplex."""


class ZeroAtr(AlphaForgeError):
    """Position sizing received a non-positive ATR."""


class OverdraftRejected(AlphaForgeError):
    """A buy order would have driven cash negative."""


class UnmatchedSell(AlphaForgeError):
    """A trade log contains a SELL with no open position (log corruption)."""


class MissingRangeData(AlphaForgeError):
    """An index series does not cover the requested comparison range."""


class InvalidSpec(AlphaForgeError):
    """A fixture specification is internally inconsistent."""


class ConfigError(AlphaForgeError):
    """A run configuration is invalid or references missing paths."""
