"""Diagnostics carried by the loader and the graph validator.

Every diagnostic has a stable code from the registry documented in
``docs/format.md``, a severity, a message, and a source location. In-memory
graphs that never came from a file use the ``<memory>`` location.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class Severity(str, Enum):
    ERROR = "error"
    WARNING = "warning"

    def __str__(self) -> str:  # pragma: no cover - trivial
        return self.value


@dataclass(frozen=True)
class SourceLocation:
    file: str
    line: int = 1
    column: int = 1

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


MEMORY = SourceLocation("<memory>", 1, 1)


@dataclass(frozen=True)
class Diagnostic:
    severity: Severity
    code: str
    message: str
    location: SourceLocation = MEMORY

    def __str__(self) -> str:
        return f"{self.code} {self.severity}: {self.message} ({self.location})"


def error(code: str, message: str, location: SourceLocation = MEMORY) -> Diagnostic:
    return Diagnostic(Severity.ERROR, code, message, location)


def warning(code: str, message: str, location: SourceLocation = MEMORY) -> Diagnostic:
    return Diagnostic(Severity.WARNING, code, message, location)


def has_errors(diagnostics: list[Diagnostic]) -> bool:
    return any(d.severity is Severity.ERROR for d in diagnostics)
