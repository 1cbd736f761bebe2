"""Composite ``GeoID|Timestamp|TypeCode`` primary keys."""

from __future__ import annotations

import datetime as _dt
from dataclasses import dataclass
from enum import Enum

from . import geosot
from .errors import ParseError
from .geosot import CellCode

SEPARATOR = "|"


class TypeCode(str, Enum):
    RAS = "RAS"
    VEC = "VEC"
    TB = "TB"
    DOC = "DOC"
    IMG = "IMG"
    AUD = "AUD"
    VEO = "VEO"
    UNK = "UNK"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True, order=True)
class Timestamp:
    year: int
    month: int
    day: int
    hour: int | None = None
    minute: int | None = None

    def __post_init__(self) -> None:
        if (self.hour is None) != (self.minute is None):
            raise ParseError("hour and minute must be given together", field="hour")
        if not 1 <= self.year <= 9999:
            raise ParseError(f"year {self.year} out of range", field="year")
        if not 1 <= self.month <= 12:
            raise ParseError(f"month {self.month} out of range", field="month")
        try:
            _dt.date(self.year, self.month, self.day)
        except ValueError:
            raise ParseError(
                f"day {self.day} invalid for {self.year:04d}-{self.month:02d}", field="day"
            ) from None
        if self.hour is not None:
            if not 0 <= self.hour <= 23:
                raise ParseError(f"hour {self.hour} out of range", field="hour")
            if not 0 <= self.minute <= 59:
                raise ParseError(f"minute {self.minute} out of range", field="minute")

    @property
    def granularity(self) -> str:
        return "day" if self.hour is None else "minute"

    def __str__(self) -> str:
        return format_timestamp(self)


def format_timestamp(t: Timestamp) -> str:
    text = f"{t.year:04d}{t.month:02d}{t.day:02d}"
    if t.hour is not None:
        text += f"{t.hour:02d}{t.minute:02d}"
    return text


_FIELDS = (("year", 0, 4), ("month", 4, 6), ("day", 6, 8), ("hour", 8, 10), ("minute", 10, 12))


def parse_timestamp(text: str) -> Timestamp:
    """Parse ``YYYYMMDD`` or ``YYYYMMDDHHmm``."""
    if len(text) not in (8, 12):
        raise ParseError(
            f"timestamp {text!r} must have 8 or 12 digits, got {len(text)}", field="length"
        )
    values = []
    for name, a, b in _FIELDS[: 3 if len(text) == 8 else 5]:
        part = text[a:b]
        if not (part.isascii() and part.isdigit()):
            raise ParseError(f"non-digit {name} {part!r} in timestamp {text!r}", field=name)
        values.append(int(part))
    return Timestamp(*values)


@dataclass(frozen=True, order=True)
class CompositeKey:
    cell: CellCode
    ts: Timestamp
    type: TypeCode

    def __str__(self) -> str:
        return build_pk(self.cell, self.ts, self.type)


def build_pk(cell: CellCode, ts: Timestamp, type_: TypeCode | str) -> str:
    return f"G{cell.path}|{format_timestamp(ts)}|{TypeCode(type_).value}"


def parse_pk(text: str) -> CompositeKey:
    parts = text.split(SEPARATOR)
    if len(parts) != 3:
        raise ParseError(
            f"key {text!r} needs exactly two '|' separators, found {len(parts) - 1}",
            segment=min(len(parts), 3),
        )
    try:
        cell = geosot.from_string(parts[0])
    except ParseError as exc:
        raise ParseError(f"bad cell segment: {exc}", segment=0, position=exc.position) from None
    try:
        ts = parse_timestamp(parts[1])
    except ParseError as exc:
        raise ParseError(f"bad timestamp segment: {exc}", segment=1, field=exc.field) from None
    try:
        type_ = TypeCode(parts[2])
    except ValueError:
        raise ParseError(f"unknown type code {parts[2]!r}", segment=2) from None
    return CompositeKey(cell, ts, type_)


def pk_cell_string(pk: str) -> str:
    return pk.split(SEPARATOR, 1)[0]
