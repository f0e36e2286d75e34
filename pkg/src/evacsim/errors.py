"""Exception types shared across the package."""

from __future__ import annotations


class EvacsimError(Exception):
    """Base class for all package-specific errors."""


class ScenarioSyntaxError(EvacsimError):
    """Malformed scenario text. Carries the 1-based line and column."""

    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, col {column}: {message}")
        self.line = line
        self.column = column


class ScenarioSemanticError(EvacsimError):
    """A parsed scenario violates a structural invariant (e.g. no exit,
    unreachable spawn, dangling sign target)."""

    def __init__(self, findings):
        self.findings = list(findings)
        msg = "; ".join(str(f) for f in self.findings) or "invalid scenario"
        super().__init__(msg)


class ConfigurationError(EvacsimError):
    """Invalid run configuration (no ignitable room, zero population, ...)."""


class SessionStateError(EvacsimError):
    """An operation was applied to a session in the wrong state, such as
    input after the session ended or reading the score of a non-escaped run."""
