"""Exception types shared across the package."""


class FracsimError(Exception):
    """Base class for all fracsim errors."""


class ConfigError(FracsimError, ValueError):
    """An engine configuration violates a documented constraint."""


class GraphParseError(FracsimError, ValueError):
    """A graph input line could not be parsed.

    Carries the 1-based line number of the offending line.
    """

    def __init__(self, message: str, line_no: int):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class ValidationError(FracsimError, ValueError):
    """Input data is well-formed but semantically invalid."""


class ResourceBudgetError(FracsimError, RuntimeError):
    """A computation would exceed the configured memory budget."""
