#!/usr/bin/env python3
# src/algebra/errors.py
"""Exception types raised by the algebra package."""
from typing import Any, Optional, Tuple


class LoopforgeError(Exception):
    """Base class for every error raised by loopforge."""


class MalformedTableError(LoopforgeError):
    """A table, map or file does not have the expected shape or index range."""

    def __init__(self, message: str, line_number: Optional[int] = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class NotAQuasigroupError(MalformedTableError):
    """The table is not a Latin square; `cell` names the first repeated entry."""

    def __init__(self, message: str, cell: Optional[Tuple[int, int]] = None):
        self.cell = cell
        super().__init__(message)


class PreconditionError(LoopforgeError):
    """A construction was refused; `report` holds the per-condition diagnostics."""

    def __init__(self, message: str, report: Any = None):
        self.report = report
        super().__init__(message)


class ResourceCapError(LoopforgeError):
    """A closure or tensor grew past its configured cap."""

    def __init__(self, message: str, partial_size: int = 0):
        self.partial_size = partial_size
        super().__init__(message)


class SearchCapError(LoopforgeError):
    """Exhaustive enumeration refused for the requested size."""


class FactorizationImpossibleError(LoopforgeError):
    """R x S -> Q, (r, s) -> rs is not a bijection."""


class SingularAntipodeError(LoopforgeError):
    """A negative antipode power was requested for a singular matrix."""


class InternalConsistencyError(LoopforgeError):
    """Two independent checks disagreed where they must agree."""
