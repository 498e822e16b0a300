"""Exception taxonomy shared across the package.

The CLI maps these onto exit codes: domain/precondition/parse errors exit
with 2, capacity errors with 3, and internal consistency errors with 4.
"""


class CDLatticeError(Exception):
    """Base class for all package errors."""


class DomainError(CDLatticeError):
    """An element index lies outside a group's index domain."""


class PreconditionError(CDLatticeError):
    """An input violates an operation's stated contract."""


class CapacityError(CDLatticeError):
    """A configured size bound was exceeded; the message names the bound."""

    def __init__(self, message: str, *, bound: int | None = None):
        super().__init__(message)
        self.bound = bound


class InternalCheckError(CDLatticeError):
    """A verified structural invariant failed; indicates a bug, never silent."""


class SpecSyntaxError(CDLatticeError):
    """A group-spec expression failed to parse; carries the offending position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position
