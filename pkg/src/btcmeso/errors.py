"""Exception types shared across the package."""


class BtcMesoError(Exception):
    """Base class for all package errors."""


class ParseError(BtcMesoError):
    """Malformed input file. Carries the 1-based line number when known."""

    def __init__(self, message, line_number=None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class DuplicateTransactionError(ParseError):
    """Same tx_id seen twice in one input."""


class ValidationError(BtcMesoError):
    """A record or value violates its documented invariants."""


class ContractViolationError(BtcMesoError):
    """A caller broke a documented precondition (unsorted input, mixed granularity, ...)."""


class ParameterError(BtcMesoError):
    """A parameter is outside its documented range."""


class DomainError(BtcMesoError):
    """Inconsistent count arguments to a statistical routine."""


class EmptyGraphError(BtcMesoError):
    """Operation requires at least one node."""


class DegenerateInputError(BtcMesoError):
    """Input distribution is degenerate (e.g. all-zero values)."""


class ConvergenceError(BtcMesoError):
    """Iterative solver did not reach the requested tolerance."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class NearDeterministicEdgeWarning(UserWarning):
    """A degree sequence forces connection probabilities arbitrarily close to 1."""
