"""Exception types shared across the package."""


class HandwaveError(Exception):
    """Base class for every error this package raises on purpose."""


class ParseError(HandwaveError):
    """Input text is not syntactically valid (malformed JSON, bad line)."""


class ValidationError(HandwaveError):
    """A value violates a structural invariant; the message names the field."""


class StreamOrderError(HandwaveError):
    """Frame timestamps in a stream are not strictly increasing."""


class ConfigError(HandwaveError):
    """A configuration value or combination is unusable."""


class DecodeError(HandwaveError):
    """Box decoding produced a non-finite or otherwise invalid geometry."""


class ProtocolError(HandwaveError):
    """Wire bytes deviate from the command line grammar.

    Attributes:
        offset: byte position of the first offending byte.
    """

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte {offset})")
        self.offset = offset


class DataError(HandwaveError):
    """A dataset, store, or record is empty, inconsistent, or unusable."""


class DimensionError(HandwaveError):
    """Vector or matrix shapes do not agree."""


class EmptyBatchError(HandwaveError):
    """An operation that needs at least one element received none."""


class NumericsError(HandwaveError):
    """A numeric quantity that must stay finite became non-finite."""


class SynthError(HandwaveError):
    """A requested synthetic hand pose cannot be realized by the templates."""
