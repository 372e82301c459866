"""Shared exception type for contract violations.

Every operation that rejects its input raises :class:`ValidationError` with a
stable, machine-matchable ``kind`` tag (e.g. ``"cycle-detected"``,
``"missing-pair"``). The CLI maps these to exit code 3.
"""

from __future__ import annotations


class ValidationError(ValueError):
    """Input failed a contract check.

    Parameters
    ----------
    kind:
        Stable identifier for the failure class; tests and the CLI match on
        this rather than on message text.
    message:
        Human-readable detail.
    line:
        1-based input line number, when the failure is tied to a text input.
    """

    def __init__(self, kind: str, message: str, *, line: int | None = None):
        self.kind = kind
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(f"{kind}: {prefix}{message}")
