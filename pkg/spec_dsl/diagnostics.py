from dataclasses import dataclass

ERROR = "error"
WARNING = "warning"


@dataclass(frozen=True)
class Diagnostic:
    """One problem found in a spec file; line and column are 1-based."""

    severity: str
    line: int
    column: int
    message: str


def error(line: int, column: int, message: str) -> Diagnostic:
    return Diagnostic(ERROR, line, column, message)


def warning(line: int, column: int, message: str) -> Diagnostic:
    return Diagnostic(WARNING, line, column, message)


def has_errors(diagnostics) -> bool:
    return any(d.severity == ERROR for d in diagnostics)
