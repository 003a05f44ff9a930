"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the documented domain of a function."""


class RangeError(OverflowError):
    """A result would overflow double precision."""


class NumericError(ArithmeticError):
    """An iterative or adaptive procedure failed to reach its tolerance.

    ``partial`` holds the best estimate available when the procedure gave up.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class ConfigError(ValueError):
    """Invalid sweep configuration. ``line`` and ``key`` locate the problem."""

    def __init__(self, message, line=None, key=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key '{key}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
        self.detail = message
        self.line = line
        self.key = key


class UsageError(ValueError):
    """A request that cannot be carried out as asked, e.g. emitting zero records."""
