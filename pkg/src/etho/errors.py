"""Exception types shared across the engine.

Every user-facing failure is an EthoError so the CLI and HTTP layers can
map it to a diagnostic (and an exit code / status code) uniformly.
Parser errors carry line:col plus the expected-token set; unknown-name
errors carry the known alternatives so error explanations can list them.
"""

from __future__ import annotations


class EthoError(Exception):
    """Base class for all engine errors (validation family, CLI exit 2)."""


class SchemaError(EthoError):
    """Input file violates the canonical schema."""

    def __init__(self, message: str, *, row: int | None = None, column: str | None = None):
        loc = ""
        if row is not None:
            loc += f" (row {row}"
            loc += f", column {column})" if column is not None else ")"
        elif column is not None:
            loc += f" (column {column})"
        super().__init__(message + loc)
        self.row = row
        self.column = column


class DimensionError(EthoError):
    """Tensor dimensions do not match the declared sizes."""


class DuplicateNameError(EthoError):
    """A name that must be unique appears twice."""

    def __init__(self, kind: str, name: str):
        super().__init__(f"duplicate {kind} name: {name!r}")
        self.kind = kind
        self.name = name


class BoundsError(EthoError):
    """A non-missing coordinate lies outside the declared frame size."""


class GeometryError(EthoError):
    """Polygon is degenerate or self-intersecting."""


class UnknownNameError(EthoError):
    """Reference to a name that does not exist; carries known alternatives."""

    def __init__(self, kind: str, name: str, known: tuple[str, ...] = ()):
        msg = f"unknown {kind}: {name!r}"
        if known:
            msg += ". Known {}s: {}".format(kind, ", ".join(known))
        super().__init__(msg)
        self.kind = kind
        self.name = name
        self.known = tuple(known)


class ComparisonError(EthoError):
    """Malformed comparison string like '<40'; position is a 0-based index."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class InsufficientFramesError(EthoError):
    """Operation needs more frames than the dataset has."""


class FrameMismatchError(EthoError):
    """Event containers built over different frame counts were combined."""


class OversizeItemError(EthoError):
    """A single memory item exceeds the whole short-term budget."""


class StateVersionError(EthoError):
    """Session state file carries an unsupported version tag."""


class CycleError(EthoError):
    """Behavior definitions reference each other in a cycle."""

    def __init__(self, names: tuple[str, ...]):
        super().__init__("reference cycle between behaviors: " + " -> ".join(names))
        self.names = tuple(names)


class EthoSyntaxError(EthoError):
    """Positioned parse diagnostic: 1-based line and column."""

    def __init__(self, message: str, line: int, col: int, expected: tuple[str, ...] = ()):
        self.line = line
        self.col = col
        self.expected = tuple(expected)
        self.bare_message = message
        super().__init__(self.render())

    def render(self, filename: str | None = None) -> str:
        prefix = f"{filename}:" if filename else ""
        msg = f"{prefix}{self.line}:{self.col}: {self.bare_message}"
        if self.expected:
            msg += " (expected {})".format(", ".join(self.expected))
        return msg


class TransportError(Exception):
    """Generator backend failed at the transport level (runtime, exit 3)."""
