"""Exception hierarchy for the K(m) benchmark toolkit.

Every domain error carries the process exit code the CLI uses for it.
"""

from typing import Any, List, Optional


class ModalBenchError(Exception):
    """Base class for all toolkit errors (usage/config class, exit code 1)."""

    exit_code: int = 1


class FormulaSyntaxError(ModalBenchError):
    """Formula text does not follow the grammar."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class FormulaInvariantError(ModalBenchError):
    """A formula, clause or literal violates a structural invariant."""


class RepeatedAtomError(FormulaInvariantError):
    """A clause contains the same atom twice."""


class RepeatedClauseError(FormulaInvariantError):
    """A formula contains the same clause twice."""


class EmptyFormulaError(FormulaInvariantError):
    """Empty clause or empty formula."""


class SpecSyntaxError(ModalBenchError):
    """Bracket-notation spec text is malformed."""


class ParamsValidationError(ModalBenchError):
    """Generation parameters failed validation."""

    def __init__(self, diagnostics: List[Any]):
        lines = "; ".join(str(d) for d in diagnostics)
        super().__init__(f"invalid generation parameters: {lines}")
        self.diagnostics = diagnostics


class WideningError(ModalBenchError):
    """A widening coordinate is out of range or not zero."""


class GenerationError(ModalBenchError):
    """The generator exceeded its rejection cap."""

    exit_code = 2

    def __init__(
        self,
        message: str,
        depth: Optional[int] = None,
        length: Optional[int] = None,
        props: Optional[int] = None,
    ):
        super().__init__(message)
        self.depth = depth
        self.length = length
        self.props = props


class OracleIntractableError(ModalBenchError):
    """Instance is too large for exact enumeration."""


class BoundedOracleGuardError(ModalBenchError):
    """Formula falls outside the bounded-model oracle's guard."""


class InvariantViolation(ModalBenchError):
    """An internal consistency check failed."""

    exit_code = 3


class DecisionTimeout(Exception):
    """Raised inside the decider when its deadline passes."""
