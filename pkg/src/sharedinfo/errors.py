"""Exception hierarchy shared by every module."""


class SharedInfoError(Exception):
    """Base class for all errors raised by this package."""


class UnknownVariableError(SharedInfoError, KeyError):
    """A variable name does not belong to the distribution."""

    def __str__(self):
        return Exception.__str__(self)


class ParseError(SharedInfoError, ValueError):
    """Malformed input file. Carries the 1-based line number when known."""

    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class DistributionError(SharedInfoError, ValueError):
    """Masses are negative, do not normalize, or outcomes exceed arity."""


class CapacityError(SharedInfoError, ValueError):
    """Requested lattice is larger than supported."""


class EvaluationError(SharedInfoError, ArithmeticError):
    """A measure returned a non-finite value at some lattice node."""

    def __init__(self, message, node=None):
        self.node = node
        super().__init__(message)


class InfeasibleError(SharedInfoError, ValueError):
    """No convex combination of posteriors has finite divergence to the prior."""
