"""Exception hierarchy shared by every conjfix module."""


class ConjfixError(Exception):
    """Base class for all library errors."""


class ContractError(ConjfixError, ValueError):
    """Malformed input: wrong shapes, dimension mismatch, bad file content."""


class PreconditionError(ContractError):
    """Well-formed input that violates an operation's stated precondition."""


class InvariantViolation(ConjfixError, AssertionError):
    """A mathematical guarantee failed; indicates a bug, never bad input."""


class ResourceError(ConjfixError, RuntimeError):
    """A configured resource cap (e.g. grid node count) would be exceeded."""
