"""Exception taxonomy shared across the package.

Every error the engine can raise derives from HypertokError so callers
(CLI, bindings) can map failures to exit codes / typed exceptions by
class name.  Constructors stay single-positional-message compatible so
the exceptions survive pickling across process pools.
"""


class HypertokError(Exception):
    """Base class for all engine errors."""


class TokenOutOfRange(HypertokError):
    """A base token id falls outside [0, base_vocab_size)."""


class UnknownCode(HypertokError):
    """A code references an entry that does not (yet) exist."""


class SessionAlreadyStarted(HypertokError):
    """Prompt ingestion attempted after the session already has history."""


class DimensionMismatch(HypertokError):
    """A vector's dimension does not match the embedding table."""


class CacheIncomplete(HypertokError):
    """An assigned hypertoken has no cached embedding vector."""


class ZeroTokens(HypertokError):
    """Token efficiency requested over zero tokens."""


class InvalidCounts(HypertokError):
    """Compression counts are inconsistent (e.g. compressed > original)."""


class DomainError(HypertokError):
    """Numeric argument outside the function's domain."""


class EmptyCorpus(HypertokError):
    """An operation that needs documents received none."""


class ParseError(HypertokError):
    """Malformed input file.  Message carries line/field context."""

    def __init__(self, message, line=None, field=None, path=None):
        parts = []
        if path is not None:
            parts.append(str(path))
        if line is not None:
            parts.append(f"line {line}")
        if field is not None:
            parts.append(f"field {field!r}")
        prefix = ", ".join(parts)
        super().__init__(f"{prefix}: {message}" if prefix else message)
        self.line = line
        self.field = field
        self.path = path
