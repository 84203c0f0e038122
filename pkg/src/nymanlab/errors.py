"""Exception types shared by all modules.

The CLI maps each family onto its own exit status, so callers that want
to distinguish "bad input" from "numerics gave up" can catch the base
classes below.
"""


class NymanLabError(Exception):
    """Base class for every error raised by this package."""


class PreconditionError(NymanLabError, ValueError):
    """An argument violates the documented domain of an operation."""


class PoleError(PreconditionError):
    """Evaluation requested at a pole."""


class InputParseError(NymanLabError, ValueError):
    """A data file or inline token could not be parsed."""

    def __init__(self, message, line=None, source=None):
        self.line = line
        self.source = source
        where = ""
        if source is not None:
            where += f"{source}"
        if line is not None:
            where += f":{line}" if where else f"line {line}"
        super().__init__(f"{where}: {message}" if where else message)


class ConvergenceError(NymanLabError, ArithmeticError):
    """A requested tolerance could not be met within configured limits."""


class ProximityToZeroError(NymanLabError, ArithmeticError):
    """``|zeta|`` is too small for its logarithm to be trusted."""

    def __init__(self, t, modulus, error_estimate):
        self.t = t
        self.modulus = modulus
        self.error_estimate = error_estimate
        super().__init__(
            f"|zeta(1/2 + {t!r}i)| = {modulus:.3e} is below the guard "
            f"(error estimate {error_estimate:.3e}); split the panel at the zero"
        )


class InsufficientCoverageError(PreconditionError):
    """The zero table does not reach the requested truncation height."""
