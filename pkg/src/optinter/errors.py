"""Exception types shared across the package."""


class InputError(ValueError):
    """Malformed arguments: out-of-range vertices, violated preconditions."""


class ParseError(InputError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class EnumerationGuardError(InputError):
    """Raised when a brute-force enumeration is asked for too many vertices."""


class ConflictError(Exception):
    """Two pieces of structural knowledge contradict each other.

    With a consistent oracle this is unreachable, so seeing one means either
    the input knowledge graph was wrong or an update rule has a bug.
    """

    def __init__(self, message, pair=None, old=None, new=None, experiment=None):
        self.pair = pair
        self.old = old
        self.new = new
        self.experiment = experiment
        super().__init__(message)
