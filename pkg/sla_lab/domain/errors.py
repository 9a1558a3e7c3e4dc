"""Exception hierarchy shared by every layer.

Anything raised on purpose by this package derives from ``SlaError`` so the
CLI can turn it into a one-line reason and a non-zero exit code.
"""


class SlaError(Exception):
    """Root of all deliberate failures."""


class DimensionError(SlaError, ValueError):
    """Operand shapes do not fit together."""


class NumericError(SlaError, ArithmeticError):
    """NaN or infinite values where finite values are required."""


class ContractViolation(SlaError, ValueError):
    """A precondition of an operation does not hold."""


class LabelIndexError(SlaError, IndexError):
    """A class / joint / transformation label falls outside its range."""


class FormatError(SlaError, ValueError):
    """A file does not follow the expected binary or text layout."""


class ConsistencyError(SlaError, ValueError):
    """Two inputs that must agree (counts, class numbers, ...) disagree."""


class ConfigError(SlaError, ValueError):
    """An experiment configuration is invalid."""


class ModeError(SlaError, ValueError):
    """An inference mode is not supported by the model at hand."""
