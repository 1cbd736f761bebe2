"""Pipeline configuration and its INI file format.

Example file (every section optional)::

    [pipeline]
    tile_pixels = 16
    epsilon = 0.000277777
    coverage_cap = 1000000
    media_gps_level = 22
    media_fallback_level = 10
    unknown_level = 12
    admin_fallback_level = 12
    media_without_gps = fixed        ; or "admin" to use the admin table

    [extensions]
    .jp2 = RAS

    [admin]
    national = 7
    provincial = 9

    [sensors]
    ; kind = level, granularity (day|minute), cadence in minutes
    station = 17, minute, 60

    [gazetteer]
    ; region = lon, lat
    forest_park = 110.45, 31.62
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace
from pathlib import Path

from . import geosot
from .errors import ParseError
from .geometry import DEFAULT_COVER_CAP
from .keys import TypeCode

DEFAULT_EXTENSIONS: dict[str, TypeCode] = {
    ".tif": TypeCode.RAS,
    ".tiff": TypeCode.RAS,
    ".nc": TypeCode.RAS,
    ".shp": TypeCode.VEC,
    ".geojson": TypeCode.VEC,
    ".gpkg": TypeCode.VEC,
    ".kml": TypeCode.VEC,
    ".csv": TypeCode.TB,
    ".xls": TypeCode.TB,
    ".doc": TypeCode.DOC,
    ".pdf": TypeCode.DOC,
    ".txt": TypeCode.DOC,
    ".jpg": TypeCode.IMG,
    ".png": TypeCode.IMG,
    ".wav": TypeCode.AUD,
    ".flac": TypeCode.AUD,
    ".mp3": TypeCode.AUD,
    ".aac": TypeCode.AUD,
    ".ogg": TypeCode.AUD,
    ".mp4": TypeCode.VEO,
    ".avi": TypeCode.VEO,
}

ADMIN_TIERS = ("national", "provincial", "city", "county", "township")
DEFAULT_ADMIN_LEVELS = {"national": 7, "provincial": 9, "city": 11, "county": 13, "township": 14}


@dataclass(frozen=True)
class SensorProfile:
    level: int
    granularity: str  # "day" | "minute"
    cadence_minutes: int = 1


DEFAULT_SENSORS = {
    "station": SensorProfile(17, "minute", 60),
    "camera": SensorProfile(21, "day"),
    "soil": SensorProfile(22, "minute", 1),
    "wildlife": SensorProfile(24, "minute", 10),
}


@dataclass(frozen=True)
class PipelineConfig:
    extensions: dict[str, TypeCode] = field(default_factory=lambda: dict(DEFAULT_EXTENSIONS))
    admin_levels: dict[str, int] = field(default_factory=lambda: dict(DEFAULT_ADMIN_LEVELS))
    sensors: dict[str, SensorProfile] = field(default_factory=lambda: dict(DEFAULT_SENSORS))
    gazetteer: dict[str, tuple[float, float]] = field(default_factory=dict)
    tile_pixels: float = 16.0
    epsilon: float = geosot.cell_extent(21).degrees
    coverage_cap: int = DEFAULT_COVER_CAP
    media_gps_level: int = 22
    media_fallback_level: int = 10
    media_without_gps: str = "fixed"
    unknown_level: int = 12
    admin_fallback_level: int = 12

    def echo(self) -> dict[str, object]:
        """Flat summary written into report headers."""
        return {
            "tile_pixels": self.tile_pixels,
            "epsilon": self.epsilon,
            "coverage_cap": self.coverage_cap,
            "media_gps_level": self.media_gps_level,
            "media_fallback_level": self.media_fallback_level,
            "unknown_level": self.unknown_level,
        }


DEFAULT_CONFIG = PipelineConfig()

_INT_KEYS = {
    "coverage_cap",
    "media_gps_level",
    "media_fallback_level",
    "unknown_level",
    "admin_fallback_level",
}
_FLOAT_KEYS = {"tile_pixels", "epsilon"}


def _pair(text: str, where: str) -> tuple[float, float]:
    try:
        lon, lat = (float(x) for x in text.split(","))
    except ValueError:
        raise ParseError(f"{where}: expected 'lon, lat', got {text!r}") from None
    return lon, lat


def load_config(path: str | Path) -> PipelineConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    parser.optionxform = str  # keep extension/region case
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except configparser.Error as exc:
        raise ParseError(f"config {path}: {exc}") from None

    cfg = PipelineConfig()
    updates: dict[str, object] = {}
    if parser.has_section("pipeline"):
        for key, value in parser.items("pipeline"):
            if key not in _INT_KEYS | _FLOAT_KEYS | {"media_without_gps"}:
                raise ParseError(f"config [pipeline]: unknown key {key!r}", field=key)
            try:
                if key in _INT_KEYS:
                    updates[key] = int(value)
                elif key in _FLOAT_KEYS:
                    updates[key] = float(value)
                elif value in ("fixed", "admin"):
                    updates[key] = value
                else:
                    raise ValueError(value)
            except ValueError:
                raise ParseError(f"config [pipeline]: bad value for {key}: {value!r}", field=key) from None
    if parser.has_section("extensions"):
        ext = dict(cfg.extensions)
        for key, value in parser.items("extensions"):
            try:
                ext[normalize_extension(key)] = TypeCode(value.strip().upper())
            except ValueError:
                raise ParseError(f"config [extensions]: unknown type {value!r}", field=key) from None
        updates["extensions"] = ext
    if parser.has_section("admin"):
        admin = dict(cfg.admin_levels)
        for key, value in parser.items("admin"):
            try:
                admin[key.lower()] = int(value)
            except ValueError:
                raise ParseError(f"config [admin]: bad level {value!r}", field=key) from None
        updates["admin_levels"] = admin
    if parser.has_section("sensors"):
        sensors = dict(cfg.sensors)
        for key, value in parser.items("sensors"):
            parts = [p.strip() for p in value.split(",")]
            try:
                profile = SensorProfile(
                    int(parts[0]), parts[1], int(parts[2]) if len(parts) > 2 else 1
                )
            except (IndexError, ValueError):
                raise ParseError(f"config [sensors]: bad profile {value!r}", field=key) from None
            if profile.granularity not in ("day", "minute"):
                raise ParseError(f"config [sensors]: bad granularity {parts[1]!r}", field=key)
            sensors[key.lower()] = profile
        updates["sensors"] = sensors
    if parser.has_section("gazetteer"):
        gaz = dict(cfg.gazetteer)
        for key, value in parser.items("gazetteer"):
            gaz[key.lower()] = _pair(value, f"[gazetteer] {key}")
        updates["gazetteer"] = gaz
    return replace(cfg, **updates)


def normalize_extension(ext: str) -> str:
    ext = ext.strip().lower()
    return ext if ext.startswith(".") else "." + ext
