"""
Error types for the Synthlock project.

Input problems subclass ValueError, internal consistency failures subclass
RuntimeError.
"""

from typing import Optional


class LtsError(ValueError):
    """Malformed transition system or vocabulary."""


class FormulaError(ValueError):
    """Ill-sorted formula, undeclared symbol or unbound variable."""


class ParseError(FormulaError):
    """Syntax error with a source location."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.message = message
        self.line = line
        self.column = column
        if line is not None:
            super().__init__(f"line {line}, column {column}: {message}")
        else:
            super().__init__(message)


class LtlError(ParseError):
    """LTL\\X formula rejected (X operator, unknown atom)."""


class SpecError(ValueError):
    """A specification operation was applied outside its precondition."""


class CompositionError(ValueError):
    """Components cannot be composed."""


class CodegenError(ValueError):
    """Program emission rejected the input processes."""


class SimulationError(RuntimeError):
    """Program simulation exceeded its state cap."""


class CheckerError(RuntimeError):
    """A counterexample failed re-validation."""


class SynthesisError(RuntimeError):
    """A Found result failed re-verification."""
