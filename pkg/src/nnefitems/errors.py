"""Exception hierarchy shared by every stage of the toolchain."""

from __future__ import annotations


class NnefError(Exception):
    """Base class for all toolchain errors."""


# --- frontend -------------------------------------------------------------


class LexError(NnefError):
    def __init__(self, message: str, line: int, column: int) -> None:
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column


class ParseError(NnefError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None) -> None:
        where = f"{line}:{column}: " if line is not None else ""
        super().__init__(where + message)
        self.line = line
        self.column = column


class ArityError(ParseError):
    """An operation was called with a missing, unknown or repeated parameter."""


class DuplicateWriterError(NnefError):
    """Two send_var instructions write the same shared variable."""


class MissingWeight(NnefError):
    pass


class ShapeMismatch(NnefError):
    pass


# --- tensor-core ----------------------------------------------------------


class RankError(NnefError):
    pass


class UnsupportedDilation(NnefError):
    pass


class UnsupportedBorder(NnefError):
    pass


class UnsupportedGroups(NnefError):
    pass


class WindowTooLarge(NnefError):
    pass


class ChannelMismatch(NnefError):
    pass


class AxisOutOfRange(NnefError):
    pass


class ElementCountMismatch(NnefError):
    pass


class MissingInput(NnefError):
    pass


class EvaluationError(NnefError):
    """An operation failed while evaluating instruction ``index``."""

    def __init__(self, index: int, result: str, cause: Exception) -> None:
        super().__init__(f"instruction {index} ({result}): {cause}")
        self.index = index
        self.result = result
        self.cause = cause


# --- petri ----------------------------------------------------------------


class NotFireable(NnefError):
    pass


class CapExceeded(NnefError):
    def __init__(self, message: str, partial_count: int) -> None:
        super().__init__(message)
        self.partial_count = partial_count


class UnknownSourceItem(NnefError):
    pass


class UnresolvedVarsync(NnefError):
    pass


class UnknownTransition(NnefError):
    pass


# --- splitter -------------------------------------------------------------


class InvalidAssignment(NnefError):
    pass


class EmptyItem(NnefError):
    pass


class ConflictingDeclarations(NnefError):
    pass


class UnresolvedSync(NnefError):
    pass


# --- runtime --------------------------------------------------------------


class DeadlockDetected(NnefError):
    pass


class DoubleWrite(NnefError):
    """A shared slot was written a second time during one run."""


class ShapeUnsupported(NnefError):
    pass


class MalformedEvent(NnefError):
    def __init__(self, message: str, line: int) -> None:
        super().__init__(f"line {line}: {message}")
        self.line = line
