"""Exception hierarchy used across the package."""


class NoiseFPError(Exception):
    """Base class for all errors raised by noisefp."""


class FormatError(NoiseFPError):
    """A file does not follow the expected container layout."""


class UnsupportedFormatError(FormatError):
    """The file is well formed but uses an encoding we do not read."""


class EmptyInputError(NoiseFPError, ValueError):
    pass


class TooShortError(NoiseFPError, ValueError):
    pass


class ShapeError(NoiseFPError, ValueError):
    pass


class NumericError(NoiseFPError, ValueError):
    """Non-finite values where finite ones are required."""


class DomainError(NoiseFPError, ValueError):
    pass


class ConfigError(NoiseFPError, ValueError):
    pass


class TypeTagError(FormatError):
    """A model file holds a different model type than the one requested."""


class TruncatedFileError(NoiseFPError, OSError):
    """A binary file ended before its declared payload."""
