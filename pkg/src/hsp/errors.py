"""Exception types shared across the package.

The CLI maps these onto exit codes: usage errors exit 2, data errors 3,
anything else 4.
"""


class HSPError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(HSPError, ValueError):
    pass


class ResourceLimitError(HSPError):
    pass


class DegenerateDataError(HSPError, ValueError):
    pass


class DataFormatError(HSPError, ValueError):
    """A file could not be parsed. Carries the file and line when known."""

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


class ConsistencyError(HSPError, RuntimeError):
    """Sampler state violated one of its structural invariants."""
