"""Exception types shared across the package."""


class CqcheckError(Exception):
    """Base class for all errors raised by this package."""


class InputError(CqcheckError):
    """Malformed input: bad syntax, undeclared relations, unsafe queries, ..."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{line}:{column}: {message}"
        super().__init__(message)


class ReasoningError(CqcheckError):
    """A reasoning operation was called on inputs outside its preconditions."""


class Refusal(CqcheckError):
    """The requested entailment question is outside the decidable/characterized
    fragment; answering true or false would misstate the semantics."""


class LimitExceeded(CqcheckError):
    """An enumeration (representative valuations, action sequences, ...) grew
    past its configured cap.  Raised loudly instead of hanging."""
