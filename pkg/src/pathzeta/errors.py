"""Exception types shared across the package."""


class PathZetaError(Exception):
    """Base class for all errors raised by pathzeta."""


class InvalidParameterError(PathZetaError, ValueError):
    """A numeric argument lies outside the domain of the operation."""


class InvalidInputError(PathZetaError, ValueError):
    """A structured input (path, barcode, diagram) is malformed or empty."""


class PoleError(PathZetaError, ArithmeticError):
    """Evaluation requested at a pole of a meromorphic function."""


class DegenerateSampleError(PathZetaError, ArithmeticError):
    """Sample means are too degenerate for the estimator to be finite.

    Raised by the alpha estimator when a count difference vanishes, which
    means the chosen scale is too coarse for the sampling resolution.
    """


class UnstableTestError(PathZetaError, RuntimeError):
    """Too many bootstrap resamples were degenerate."""


class ParseError(PathZetaError, ValueError):
    """A CSV or JSON document could not be parsed.

    ``line`` is the 1-based line number of the offending record, when known.
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ConfigError(PathZetaError, ValueError):
    """An experiment configuration failed validation."""


class SeriesConvergenceError(PathZetaError, ArithmeticError):
    """A truncated series hit its term cap before meeting the tolerance."""
