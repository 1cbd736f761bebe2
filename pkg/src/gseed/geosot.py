"""GeoSOT cell codes: per-axis bit layout, Z-order encoding and cell algebra.

Each axis magnitude is packed as ``deg(8) min(6) sec(6) frac(11)``; the sign
selects the quadrant.  Level 1 is the quadrant digit and each further level
consumes one magnitude bit per axis, latitude bit high, longitude bit low.
Minute and second fields have 64 slots of which only 0-59 are geographic;
slots 60-63 are padding and never produced by the encoder.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple

from .errors import DomainError, ParseError, PaddingCellError

MAX_LEVEL = 32
METERS_PER_DEGREE = 111_320.0

FRAC_PER_SEC = 2048
UNITS_PER_SEC = FRAC_PER_SEC
UNITS_PER_MIN = 60 * UNITS_PER_SEC
UNITS_PER_DEG = 60 * UNITS_PER_MIN  # 7,372,800 units of 1/2048 arc-second

_AXIS_MAX = {"lon": 180, "lat": 90}
_MAG_BITS = 31

_SPREAD8 = [0] * 256
for _i in range(256):
    _v = 0
    for _b in range(8):
        if _i >> _b & 1:
            _v |= 1 << (2 * _b)
    _SPREAD8[_i] = _v
_QUAT8 = [
    "".join(str((_i >> s) & 3) for s in (6, 4, 2, 0)) for _i in range(256)
]


class GeoCoord(NamedTuple):
    lon: float
    lat: float

    @classmethod
    def of(cls, lon: float, lat: float) -> "GeoCoord":
        """Validated constructor; ``-0.0`` becomes ``+0.0``."""
        lon = float(lon)
        lat = float(lat)
        if not (math.isfinite(lon) and math.isfinite(lat)):
            raise DomainError(f"non-finite coordinate ({lon}, {lat})")
        if not -180.0 <= lon <= 180.0:
            raise DomainError(f"longitude {lon} outside [-180, 180]")
        if not -90.0 <= lat <= 90.0:
            raise DomainError(f"latitude {lat} outside [-90, 90]")
        return cls(lon + 0.0, lat + 0.0)


@dataclass(frozen=True)
class DimensionCode:
    sign: int
    deg: int
    minute: int
    sec: int
    frac: int

    @property
    def packed(self) -> int:
        return (
            self.sign << 31
            | self.deg << 23
            | self.minute << 17
            | self.sec << 11
            | self.frac
        )

    @property
    def magnitude_bits(self) -> int:
        return self.packed & 0x7FFFFFFF

    @classmethod
    def unpack(cls, packed: int) -> "DimensionCode":
        return cls(
            packed >> 31 & 1,
            packed >> 23 & 0xFF,
            packed >> 17 & 0x3F,
            packed >> 11 & 0x3F,
            packed & 0x7FF,
        )


def _check_axis(value: float, axis: str) -> float:
    try:
        limit = _AXIS_MAX[axis]
    except KeyError:
        raise DomainError(f"unknown axis {axis!r}") from None
    value = float(value)
    if not math.isfinite(value) or not -limit <= value <= limit:
        raise DomainError(f"{axis} value {value} outside [-{limit}, {limit}]")
    return value + 0.0


def _magnitude_units(mag: float) -> int:
    # exact floor(mag * UNITS_PER_DEG); as_integer_ratio avoids float rounding up
    num, den = mag.as_integer_ratio()
    return num * UNITS_PER_DEG // den


def _units_to_bits(units: int) -> int:
    deg, rem = divmod(units, UNITS_PER_DEG)
    minute, rem = divmod(rem, UNITS_PER_MIN)
    sec, frac = divmod(rem, UNITS_PER_SEC)
    return deg << 23 | minute << 17 | sec << 11 | frac


def _bits_to_units(bits: int) -> int:
    return (
        (bits >> 23 & 0xFF) * UNITS_PER_DEG
        + (bits >> 17 & 0x3F) * UNITS_PER_MIN
        + (bits >> 11 & 0x3F) * UNITS_PER_SEC
        + (bits & 0x7FF)
    )


def encode_dimension(value: float, axis: str) -> DimensionCode:
    """Pack one axis value, truncating its magnitude to 1/2048 arc-second."""
    value = _check_axis(value, axis)
    bits = _units_to_bits(_magnitude_units(abs(value)))
    return DimensionCode.unpack((1 << 31 if value < 0 else 0) | bits)


class Extent(NamedTuple):
    degrees: float
    meters: float


def _extent_units(level: int) -> int:
    if level <= 9:
        return (1 << (9 - level)) * UNITS_PER_DEG
    if level <= 15:
        return (1 << (15 - level)) * UNITS_PER_MIN
    if level <= 21:
        return (1 << (21 - level)) * UNITS_PER_SEC
    return 1 << (32 - level)


def _check_level(level: int, lo: int = 0, hi: int = MAX_LEVEL) -> int:
    if isinstance(level, bool) or not isinstance(level, int) or not lo <= level <= hi:
        raise DomainError(f"level {level!r} outside [{lo}, {hi}]")
    return level


def cell_extent(level: int) -> Extent:
    """Angular edge of a level's cells and its length in meters at the equator."""
    _check_level(level)
    degrees = _extent_units(level) / UNITS_PER_DEG
    return Extent(degrees, degrees * METERS_PER_DEGREE)


def edge_meters(level: int) -> float:
    return cell_extent(level).meters


@dataclass(frozen=True, order=True)
class CellCode:
    """A GeoSOT cell; ``path`` holds the quaternary digits after the ``G``."""

    path: str

    def __post_init__(self) -> None:
        if len(self.path) > MAX_LEVEL or self.path.strip("0123"):
            raise ParseError(f"invalid cell path {self.path!r}")

    @property
    def level(self) -> int:
        return len(self.path)

    def __str__(self) -> str:
        return "G" + self.path


ROOT = CellCode("")


def from_string(text: str) -> CellCode:
    if not text.startswith("G"):
        raise ParseError(f"cell code {text!r} must start with 'G'", position=0)
    if len(text) > MAX_LEVEL + 1:
        raise ParseError(
            f"cell code {text!r} longer than level {MAX_LEVEL}", position=MAX_LEVEL + 1
        )
    for i, ch in enumerate(text[1:], start=1):
        if ch not in "0123":
            raise ParseError(f"non-quaternary digit {ch!r} at position {i}", position=i)
    return CellCode(text[1:])


def to_string(cell: CellCode) -> str:
    return "G" + cell.path


def _spread32(x: int) -> int:
    s = _SPREAD8
    return (
        s[x >> 24] << 48
        | s[x >> 16 & 0xFF] << 32
        | s[x >> 8 & 0xFF] << 16
        | s[x & 0xFF]
    )


def encode_path(lon: float, lat: float, level: int) -> str:
    """Digit string of the level-``level`` cell holding an already valid point."""
    if level == 0:
        return ""
    lon_bits = _units_to_bits(_magnitude_units(abs(lon)))
    lat_bits = _units_to_bits(_magnitude_units(abs(lat)))
    quad = (2 if lat < 0 else 0) + (1 if lon < 0 else 0)
    morton = _spread32(lat_bits << 1) << 1 | _spread32(lon_bits << 1)
    digits = "".join(_QUAT8[b] for b in morton.to_bytes(8, "big"))
    return str(quad) + digits[: level - 1]


def z_encode(coord: GeoCoord, level: int) -> CellCode:
    _check_level(level)
    coord = GeoCoord.of(*coord)
    return CellCode(encode_path(coord.lon, coord.lat, level))


def encode(lon: float, lat: float, level: int) -> CellCode:
    return z_encode(GeoCoord.of(lon, lat), level)


@dataclass(frozen=True)
class CellBounds:
    """Cell rectangle in degrees.

    Intervals are half-open in magnitude away from the quadrant origin; the
    far edge is inclusive only when it was clipped to the +/-180 or +/-90
    limit (``lon_closed`` / ``lat_closed``).  ``quadrant`` is -1 for the root.
    """

    lon_min: float
    lon_max: float
    lat_min: float
    lat_max: float
    level: int
    quadrant: int = -1
    lon_closed: bool = False
    lat_closed: bool = False
    # exact magnitude ranges in 1/2048-second units; float bounds can round onto a point
    units: tuple[int, int, int, int] | None = field(default=None, compare=False, repr=False)

    @property
    def center(self) -> GeoCoord:
        return GeoCoord(
            (self.lon_min + self.lon_max) / 2 + 0.0,
            (self.lat_min + self.lat_max) / 2 + 0.0,
        )

    @property
    def box(self) -> tuple[float, float, float, float]:
        return (self.lon_min, self.lat_min, self.lon_max, self.lat_max)

    def contains(self, lon: float, lat: float) -> bool:
        lon += 0.0
        lat += 0.0
        if self.quadrant < 0:
            return (
                self.lon_min <= lon <= self.lon_max
                and self.lat_min <= lat <= self.lat_max
            )
        if self.units is None:
            raise DomainError("bounds without exact units cannot test containment")
        lon_lo, lon_hi, lat_lo, lat_hi = self.units
        return _in_axis(lon, lon_lo, lon_hi, self.quadrant & 1, self.lon_closed) and _in_axis(
            lat, lat_lo, lat_hi, self.quadrant >> 1, self.lat_closed
        )


def _in_axis(v: float, lo: int, hi: int, negative: int, closed: bool) -> bool:
    """Exact test of ``|v|`` against the unit range [lo, hi) (or [lo, hi] when closed)."""
    if (v < 0) != bool(negative) or math.isnan(v):
        return False
    units = _magnitude_units(abs(v))
    if closed:
        return lo <= units <= hi
    return lo <= units < hi


def _split_path(path: str) -> tuple[int, int, int]:
    """Quadrant plus the top magnitude bits of each axis, left-aligned to 31."""
    quad = int(path[0])
    k = len(path) - 1
    lon_bits = lat_bits = 0
    for ch in path[1:]:
        d = ord(ch) - 48
        lat_bits = lat_bits << 1 | d >> 1
        lon_bits = lon_bits << 1 | d & 1
    shift = _MAG_BITS - k
    return quad, lon_bits << shift, lat_bits << shift


def _is_padding(bits: int) -> bool:
    return (bits >> 17 & 0x3F) >= 60 or (bits >> 11 & 0x3F) >= 60


def _axis_range(bits: int, level: int, axis: str, clip: bool) -> tuple[int, int, bool]:
    """Magnitude range [lo, hi) in units, plus whether hi is inclusive."""
    if _is_padding(bits):
        raise PaddingCellError(f"padding cell ({axis} minute/second field >= 60)")
    lo = _bits_to_units(bits)
    limit = _AXIS_MAX[axis] * UNITS_PER_DEG
    if lo > limit:
        raise PaddingCellError(f"cell outside geographic {axis} range")
    hi = lo + _extent_units(level)
    if not clip:
        return lo, hi, False
    if 10 <= level <= 15:
        hi = min(hi, lo - lo % UNITS_PER_DEG + UNITS_PER_DEG)
    elif 16 <= level <= 21:
        hi = min(hi, lo - lo % UNITS_PER_MIN + UNITS_PER_MIN)
    if hi > limit:
        return lo, limit, True
    return lo, hi, False


def _bounds(cell: CellCode, clip: bool) -> CellBounds:
    level = cell.level
    if level == 0:
        if clip:
            return CellBounds(-180.0, 180.0, -90.0, 90.0, 0)
        return CellBounds(-256.0, 256.0, -256.0, 256.0, 0)
    quad, lon_bits, lat_bits = _split_path(cell.path)
    lon_lo, lon_hi, lon_closed = _axis_range(lon_bits, level, "lon", clip)
    lat_lo, lat_hi, lat_closed = _axis_range(lat_bits, level, "lat", clip)
    lon_lo_d, lon_hi_d = lon_lo / UNITS_PER_DEG, lon_hi / UNITS_PER_DEG
    lat_lo_d, lat_hi_d = lat_lo / UNITS_PER_DEG, lat_hi / UNITS_PER_DEG
    if quad & 1:
        lon_lo_d, lon_hi_d = -lon_hi_d, -lon_lo_d
    if quad >> 1:
        lat_lo_d, lat_hi_d = -lat_hi_d, -lat_lo_d
    return CellBounds(
        lon_lo_d + 0.0,
        lon_hi_d + 0.0,
        lat_lo_d + 0.0,
        lat_hi_d + 0.0,
        level,
        quad,
        lon_closed,
        lat_closed,
        (lon_lo, lon_hi, lat_lo, lat_hi),
    )


def decode(cell: CellCode) -> CellBounds:
    """Nominal cell rectangle in the extended space; extents equal ``cell_extent``."""
    return _bounds(cell, clip=False)


def geo_bounds(cell: CellCode) -> CellBounds:
    """Geographic part of the cell: nominal bounds clipped at padding and axis limits."""
    return _bounds(cell, clip=True)


def cell_center(cell: CellCode) -> GeoCoord:
    return geo_bounds(cell).center


def is_padding(cell: CellCode) -> bool:
    try:
        geo_bounds(cell)
    except PaddingCellError:
        return True
    return False


def parent(cell: CellCode) -> CellCode:
    if cell.level < 1:
        raise DomainError("root cell has no parent")
    return CellCode(cell.path[:-1])


def children(cell: CellCode) -> tuple[CellCode, CellCode, CellCode, CellCode]:
    if cell.level > MAX_LEVEL - 1:
        raise DomainError(f"level {MAX_LEVEL} cells have no children")
    p = cell.path
    return (CellCode(p + "0"), CellCode(p + "1"), CellCode(p + "2"), CellCode(p + "3"))


def geographic_children(cell: CellCode) -> Iterator[tuple[CellCode, CellBounds]]:
    """Children with their clipped bounds, skipping padding cells."""
    for child in children(cell):
        try:
            yield child, geo_bounds(child)
        except PaddingCellError:
            continue


def common_prefix_len(a: CellCode, b: CellCode) -> int:
    n = 0
    for x, y in zip(a.path, b.path):
        if x != y:
            break
        n += 1
    return n


def is_related(a: str, b: str) -> bool:
    """True when one code string is an ancestor of (or equal to) the other."""
    return a.startswith(b) or b.startswith(a)
