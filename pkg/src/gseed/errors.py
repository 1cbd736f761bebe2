"""Exception hierarchy shared by every gseed module."""

from __future__ import annotations


class GSeedError(Exception):
    """Base class for all library errors."""


class DomainError(GSeedError, ValueError):
    """Input outside the valid numeric domain (coordinate, level, area)."""


class ParseError(GSeedError, ValueError):
    """Malformed textual input.

    ``position`` is a character offset, ``field`` a named sub-field and
    ``segment`` a ``|``-delimited key segment index; whichever apply are set.
    """

    def __init__(
        self,
        message: str,
        *,
        position: int | None = None,
        field: str | None = None,
        segment: int | None = None,
    ) -> None:
        super().__init__(message)
        self.position = position
        self.field = field
        self.segment = segment


class PaddingCellError(DomainError):
    """Cell lies in the padding of the extended 512-degree space."""


class CoverageCapError(GSeedError):
    def __init__(self, cap: int, estimate: float, hint: str = "") -> None:
        super().__init__(
            f"coverage cap exceeded: estimated {estimate:.0f} cells > cap {cap}"
            + (f"; {hint}" if hint else "")
        )
        self.cap = cap
        self.estimate = estimate


class DuplicateKeyError(GSeedError, KeyError):
    def __str__(self) -> str:
        return f"duplicate primary key: {self.args[0]}"


class GeometryError(GSeedError, ValueError):
    """Invalid geometry (too few vertices, self-intersecting ring, ...)."""


class LoadError(GSeedError):
    def __init__(self, message: str, line: int) -> None:
        super().__init__(f"line {line}: {message}")
        self.line = line
