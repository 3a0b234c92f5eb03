"""Exception hierarchy shared by all crowsqueeze modules."""


class CrowSqueezeError(Exception):
    """Base class for every error raised by this package."""


class DomainError(CrowSqueezeError, ValueError):
    """Argument outside the supported numerical regime."""


class SpecError(CrowSqueezeError, ValueError):
    """A cavity chain or state description is inconsistent with the request."""


class DimensionError(CrowSqueezeError, ValueError):
    """Matrix or index dimensions do not agree."""


class SingularMatrixError(CrowSqueezeError, ValueError):
    """The coupled overlap matrix cannot be inverted reliably."""


class ConvergenceError(CrowSqueezeError, RuntimeError):
    """The eigensolver failed or returned an inaccurate decomposition."""


class NonRealError(CrowSqueezeError, ValueError):
    """An observable that must be real came out with a large imaginary part."""


class PairError(CrowSqueezeError, ValueError):
    """A correlation pair names the same cavity twice or an unknown cavity."""


class ConfigError(CrowSqueezeError, ValueError):
    """Experiment configuration does not satisfy the schema."""


class ParseError(ConfigError):
    """A matrix file could not be parsed.

    ``line`` and ``column`` are 1-based and point at the offending token.
    """

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {column})" if column is not None else ")")
        super().__init__(message + where)
