"""Exception types shared across the engine."""


class EngineError(Exception):
    """Base class for every error this package raises on purpose."""


class InvalidRangeError(EngineError):
    """A half-open key interval [lo, hi) was empty."""


class CsvFormatError(EngineError):
    """A relation CSV file did not parse; the message names the line."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class PlanSyntaxError(EngineError):
    """Plan or RPN text failed to parse; carries the character offset."""

    def __init__(self, message: str, position: int):
        super().__init__(f"at position {position}: {message}")
        self.position = position


class MalformedProgramError(EngineError):
    """An RPN program violated the operand/operator structure invariants."""


class UnknownRelationError(EngineError):
    """A catalog lookup named a relation that was never registered."""


class CardinalityLimitError(EngineError):
    """A join output would exceed the configured tuple cap."""
