"""Exception hierarchy shared by every module."""


class RetailcastError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(RetailcastError, ValueError):
    """An argument is outside the domain an operation accepts."""


class DegenerateInputError(RetailcastError, ValueError):
    """Input is well-formed but carries no usable information (e.g. zero variance)."""


class DomainError(RetailcastError, ValueError):
    """A value lies outside the mathematical domain of an operation."""


class ConvergenceError(RetailcastError, RuntimeError):
    """An iterative optimizer hit its iteration cap.

    The best iterate found so far is kept on ``best`` so callers can still
    inspect or use it.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class GridSearchError(RetailcastError, RuntimeError):
    """Every candidate in a model-order grid failed to fit."""

    def __init__(self, message, failures=None):
        super().__init__(message)
        self.failures = dict(failures or {})


class DataIntegrityError(RetailcastError, ValueError):
    """Tables disagree with each other or violate a schema invariant."""


class ParseError(DataIntegrityError):
    """A CSV file does not match its expected schema.

    ``line`` is the 1-based physical line number in the file (header = 1),
    or ``None`` when the problem is not tied to one line.
    """

    def __init__(self, message, path=None, line=None):
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)
        self.path = path
        self.line = line


class NotFoundError(RetailcastError, LookupError):
    """A requested product or series id does not exist."""
