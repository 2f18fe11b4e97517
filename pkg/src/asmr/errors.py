"""Exception hierarchy.

Everything raised on purpose derives from :class:`AsmrError`.  The three
intermediate classes map onto CLI exit codes (config 2, data 3, numeric 4).
"""


class AsmrError(Exception):
    exit_code = 1


class ConfigError(AsmrError, ValueError):
    exit_code = 2


class DataError(AsmrError, ValueError):
    exit_code = 3


class NumericError(AsmrError, ArithmeticError):
    exit_code = 4


# coords
class BaseProductMismatch(ConfigError):
    pass


class RaggedLevels(ConfigError):
    pass


class NonPositiveBase(ConfigError):
    pass


class CoordOutOfRange(ConfigError):
    pass


class LevelValueOutOfRange(ConfigError):
    pass


class LevelOutOfRange(ConfigError):
    pass


# tensor
class ShapeMismatch(ConfigError):
    pass


class BadFactor(ConfigError):
    pass


# model
class BadWidths(ConfigError):
    pass


class LevelCountMismatch(ConfigError):
    pass


class CorruptCheckpoint(DataError):
    pass


class VersionMismatch(DataError):
    pass


# profiler / train / cli
class InconsistentConfig(ConfigError):
    pass


class ExtentMismatch(ConfigError):
    pass


# metrics
class TooSmall(DataError):
    pass


# dataio
class BadMagic(DataError):
    pass


class TruncatedFile(DataError):
    pass


class UnsupportedMaxval(DataError):
    pass


class UnsupportedEncoding(DataError):
    pass


class TooShort(DataError):
    pass


class HeaderMismatch(DataError):
    pass


class DivergedError(NumericError):
    """Loss became NaN or infinite during training."""
