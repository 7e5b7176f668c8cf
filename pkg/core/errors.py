from typing import FrozenSet, Optional


class WorkbenchError(Exception):
    """Base class for every error the workbench reports to its callers."""


class TermSyntaxError(WorkbenchError):
    """Raised when a term text does not conform to the concrete grammar."""

    def __init__(self, message: str, line: int, column: int, expected: FrozenSet[str] = frozenset()):
        self.line = line
        self.column = column
        self.expected = frozenset(expected)
        detail = f"{message} at line {line}, column {column}"
        if self.expected:
            detail += f" (expected one of: {', '.join(sorted(self.expected))})"
        super().__init__(detail)


class StateLimitExceeded(WorkbenchError):
    """The reachable state space grew past the configured bound."""

    def __init__(self, bound: int, explored: int):
        self.bound = bound
        self.explored = explored
        super().__init__(f"state bound {bound} exceeded after exploring {explored} states")


class UnknownStateError(WorkbenchError):
    def __init__(self, term: object):
        self.term = term
        super().__init__(f"not a state of this LTS: {term}")


class ConfigError(WorkbenchError):
    """Unreadable or wrongly shaped configuration file."""


class ProofFormatError(WorkbenchError):
    """Malformed proof document."""


class AxiomMismatch(WorkbenchError):
    """A claimed axiom instance does not match its schema.

    `side_condition` names the violated side condition when the shape of the
    schema matched but the condition did not hold.
    """

    def __init__(self, axiom: str, reason: str, side_condition: Optional[str] = None):
        self.axiom = axiom
        self.reason = reason
        self.side_condition = side_condition
        super().__init__(f"{axiom}: {reason}")


class InternalInvariantError(AssertionError):
    """A generated artefact broke an invariant the generator guarantees."""
