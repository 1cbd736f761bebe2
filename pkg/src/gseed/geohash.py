"""Plain Geohash (base32, longitude bit first) used as the comparison baseline."""

from __future__ import annotations

from typing import Sequence

from .errors import CoverageCapError, DomainError, ParseError
from .geosot import GeoCoord

BASE32 = "0123456789bcdefghjkmnpqrstuvwxyz"
_INDEX = {c: i for i, c in enumerate(BASE32)}
MAX_LENGTH = 12


def bit_counts(length: int) -> tuple[int, int]:
    """(longitude bits, latitude bits) for a code length."""
    total = 5 * length
    return (total + 1) // 2, total // 2


def cell_size(length: int) -> tuple[float, float]:
    lon_bits, lat_bits = bit_counts(length)
    return 360.0 / (1 << lon_bits), 180.0 / (1 << lat_bits)


def _check_length(length: int) -> None:
    if not 1 <= length <= MAX_LENGTH:
        raise DomainError(f"geohash length {length} outside [1, {MAX_LENGTH}]")


def _interleave(lon_idx: int, lat_idx: int, length: int) -> str:
    lon_bits, lat_bits = bit_counts(length)
    value = 0
    li, ai = lon_bits, lat_bits
    for i in range(5 * length):
        if i % 2 == 0:
            li -= 1
            value = value << 1 | (lon_idx >> li & 1)
        else:
            ai -= 1
            value = value << 1 | (lat_idx >> ai & 1)
    chars = []
    for _ in range(length):
        chars.append(BASE32[value & 31])
        value >>= 5
    return "".join(reversed(chars))


def _index(value: float, lo: float, hi: float, bits: int) -> int:
    """Cell index along one axis by repeated bisection (value >= mid -> 1)."""
    idx = 0
    for _ in range(bits):
        mid = (lo + hi) / 2
        if value >= mid:
            idx = idx << 1 | 1
            lo = mid
        else:
            idx <<= 1
            hi = mid
    return idx


def geohash_encode(lon: float, lat: float, length: int) -> str:
    _check_length(length)
    c = GeoCoord.of(lon, lat)
    lon_bits, lat_bits = bit_counts(length)
    return _interleave(
        _index(c.lon, -180.0, 180.0, lon_bits), _index(c.lat, -90.0, 90.0, lat_bits), length
    )


def _split(code: str) -> tuple[int, int]:
    if not 1 <= len(code) <= MAX_LENGTH:
        raise ParseError(f"geohash {code!r} length outside [1, {MAX_LENGTH}]")
    lon_idx = lat_idx = 0
    even = True
    for pos, ch in enumerate(code):
        try:
            v = _INDEX[ch]
        except KeyError:
            raise ParseError(f"invalid geohash character {ch!r} at {pos}", position=pos) from None
        for shift in range(4, -1, -1):
            bit = v >> shift & 1
            if even:
                lon_idx = lon_idx << 1 | bit
            else:
                lat_idx = lat_idx << 1 | bit
            even = not even
    return lon_idx, lat_idx


def geohash_decode(code: str) -> tuple[float, float, float, float]:
    """Cell rectangle (lon_min, lat_min, lon_max, lat_max)."""
    lon_idx, lat_idx = _split(code)
    w, h = cell_size(len(code))
    return (-180.0 + lon_idx * w, -90.0 + lat_idx * h, -180.0 + (lon_idx + 1) * w, -90.0 + (lat_idx + 1) * h)


def geohash_center(code: str) -> tuple[float, float]:
    w, s, e, n = geohash_decode(code)
    return (w + e) / 2, (s + n) / 2


def geohash_cover(box: Sequence[float], length: int, cap: int = 1_000_000) -> list[str]:
    """Length-``length`` cells meeting the box; areal boxes need positive-area overlap."""
    _check_length(length)
    w, s, e, n = box
    GeoCoord.of(w, s)
    GeoCoord.of(e, n)
    cw, ch = cell_size(length)
    estimate = (e - w) * (n - s) / (cw * ch)
    if estimate > cap:
        raise CoverageCapError(cap, estimate)
    lon_bits, lat_bits = bit_counts(length)
    i0 = _index(w, -180.0, 180.0, lon_bits)
    j0 = _index(s, -90.0, 90.0, lat_bits)
    i1 = _index(e, -180.0, 180.0, lon_bits)
    j1 = _index(n, -90.0, 90.0, lat_bits)
    # drop the far column/row when the box only touches its edge
    if e > w and i1 > i0 and -180.0 + i1 * cw >= e:
        i1 -= 1
    if n > s and j1 > j0 and -90.0 + j1 * ch >= n:
        j1 -= 1
    return sorted(_interleave(i, j, length) for i in range(i0, i1 + 1) for j in range(j0, j1 + 1))


def comparable_length(cell_area_deg2: float) -> int:
    """Shortest geohash length whose cell area is at most the given area."""
    for length in range(1, MAX_LENGTH + 1):
        w, h = cell_size(length)
        if w * h <= cell_area_deg2:
            return length
    return MAX_LENGTH
