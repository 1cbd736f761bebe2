"""Record encoding: type detection, per-type level selection, center cell,
optional coverage and composite key construction."""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Iterable, Sequence

from . import geosot
from .config import ADMIN_TIERS, DEFAULT_CONFIG, PipelineConfig, normalize_extension
from .errors import DomainError, GeometryError, GSeedError
from .geometry import (
    CoverSet,
    Geometry,
    bbox,
    centroid,
    cover_geometry,
    douglas_peucker,
    size_exceeds_cell,
)
from .geosot import CellCode
from .keys import CompositeKey, Timestamp, TypeCode

RASTER_LEVELS = (15, 24)
VECTOR_LEVELS = (18, 21)
AREA_LEVELS = (7, 24)
MIN_AREA_KM2 = 1e-6  # (1 m)^2 floor for degenerate extents
KM_PER_DEGREE = geosot.METERS_PER_DEGREE / 1000.0


@dataclass(frozen=True)
class IngestMeta:
    res_m: float | None = None
    gps: bool = False
    admin_level: str | None = None
    source: str = ""
    extra: dict[str, Any] = field(default_factory=dict)
    flags: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.res_m is not None and not self.res_m > 0:
            raise DomainError(f"res_m must be > 0, got {self.res_m}")
        if self.admin_level is not None and self.admin_level not in ADMIN_TIERS:
            raise DomainError(
                f"admin_level {self.admin_level!r} not one of {', '.join(ADMIN_TIERS)}"
            )

    def to_json(self) -> dict[str, Any]:
        return {
            "res_m": self.res_m,
            "gps": self.gps,
            "admin_level": self.admin_level,
            "source": self.source,
            "extra": self.extra,
            "flags": list(self.flags),
        }

    @classmethod
    def from_json(cls, obj: dict[str, Any]) -> "IngestMeta":
        return cls(
            res_m=obj.get("res_m"),
            gps=bool(obj.get("gps", False)),
            admin_level=obj.get("admin_level"),
            source=obj.get("source", ""),
            extra=dict(obj.get("extra", {})),
            flags=tuple(obj.get("flags", ())),
        )


@dataclass(frozen=True)
class RecordEntry:
    pk: CompositeKey
    level: int
    center: CellCode
    covers: CoverSet
    bbox: tuple[float, float, float, float]
    meta: IngestMeta
    path: str

    @property
    def key(self) -> str:
        return str(self.pk)


def detect_type(extension: str, config: PipelineConfig = DEFAULT_CONFIG) -> TypeCode:
    return config.extensions.get(normalize_extension(extension), TypeCode.UNK)


def _finest(levels: range, ok) -> int | None:
    best = None
    for level in levels:
        if ok(level):
            best = level
    return best


def level_by_resolution(res_m: float, tile_pixels: float = 16.0) -> int:
    """Finest level whose cell edge spans ``tile_pixels`` pixels, within 15-24."""
    if not res_m > 0:
        raise DomainError(f"resolution must be > 0, got {res_m}")
    lo, hi = RASTER_LEVELS
    need = tile_pixels * res_m
    best = _finest(range(lo, hi + 1), lambda lv: geosot.edge_meters(lv) >= need)
    return lo if best is None else best


def level_by_size(g: Geometry) -> int:
    w, s, e, n = bbox(g)
    side = max(e - w, n - s)
    lo, hi = VECTOR_LEVELS
    best = _finest(range(lo, hi + 1), lambda lv: geosot.cell_extent(lv).degrees >= side)
    return lo if best is None else best


def level_by_admin(admin_level: str | None, config: PipelineConfig = DEFAULT_CONFIG) -> int:
    if admin_level is None:
        return config.admin_fallback_level
    try:
        return config.admin_levels[admin_level]
    except KeyError:
        raise DomainError(f"no grid level configured for admin tier {admin_level!r}") from None


def level_for_media(gps: bool, config: PipelineConfig = DEFAULT_CONFIG) -> int:
    return config.media_gps_level if gps else config.media_fallback_level


def adaptive_level_by_area(area_km2: float) -> int:
    """Finest level in 7-24 whose cell edge is at least the side of a square of that area."""
    if not area_km2 > 0 or math.isinf(area_km2):
        raise DomainError(f"area must be a positive finite number, got {area_km2}")
    side_m = 1000.0 * math.sqrt(area_km2)
    lo, hi = AREA_LEVELS
    best = _finest(range(lo, hi + 1), lambda lv: geosot.edge_meters(lv) >= side_m)
    return lo if best is None else best


def bbox_area_km2(box: Sequence[float]) -> float:
    """Planar bbox area using the fixed equatorial meters-per-degree constant."""
    w, s, e, n = box
    return (e - w) * KM_PER_DEGREE * (n - s) * KM_PER_DEGREE


def _simplify(g: Geometry, epsilon: float) -> Geometry:
    if g.kind == "polyline":
        return douglas_peucker(g, epsilon)
    if g.kind == "polygon":
        ring = douglas_peucker(Geometry("polyline", g.vertices + (g.vertices[0],)), epsilon)
        if len(ring.vertices) >= 4:
            return Geometry("polygon", ring.vertices[:-1])
    return g


def _apply_sensor(ts: Timestamp, profile) -> Timestamp:
    if profile.granularity == "day":
        return Timestamp(ts.year, ts.month, ts.day)
    hour = ts.hour or 0
    minute = ts.minute or 0
    cadence = max(1, profile.cadence_minutes)
    if cadence >= 60:
        minute = 0
    else:
        minute -= minute % cadence
    return Timestamp(ts.year, ts.month, ts.day, hour, minute)


def _gazetteer_point(meta: IngestMeta, config: PipelineConfig) -> Geometry:
    for name in (meta.extra.get("region"), meta.admin_level):
        if name and str(name).lower() in config.gazetteer:
            return Geometry.point(*config.gazetteer[str(name).lower()])
    raise GeometryError(
        "record has no geometry and no gazetteer entry for its region/admin level"
    )


def select_level(
    type_: TypeCode, g: Geometry, meta: IngestMeta, config: PipelineConfig = DEFAULT_CONFIG
) -> tuple[int, Geometry, tuple[str, ...]]:
    """Dispatch on type; returns level, (possibly simplified) geometry and new flags."""
    flags: tuple[str, ...] = ()
    if type_ is TypeCode.RAS:
        if meta.res_m is None:
            return RASTER_LEVELS[0], g, ("res_missing",)
        return level_by_resolution(meta.res_m, config.tile_pixels), g, flags
    if type_ is TypeCode.VEC:
        g = _simplify(g, config.epsilon)
        return level_by_size(g), g, flags
    if type_ in (TypeCode.IMG, TypeCode.VEO, TypeCode.AUD):
        if not meta.gps and config.media_without_gps == "admin":
            return level_by_admin(meta.admin_level, config), g, flags
        return level_for_media(meta.gps, config), g, flags
    if type_ in (TypeCode.TB, TypeCode.DOC):
        if meta.admin_level is None:
            flags = ("admin_missing",)
        return level_by_admin(meta.admin_level, config), g, flags
    return config.unknown_level, g, flags


def encode_record(
    path: str,
    g: Geometry | None,
    t: Timestamp,
    m: IngestMeta,
    config: PipelineConfig = DEFAULT_CONFIG,
    type_: TypeCode | None = None,
) -> RecordEntry:
    """Encode one source file into its index record."""
    if type_ is None:
        type_ = detect_type(os.path.splitext(path)[1], config)
    if g is None:
        if type_ not in (TypeCode.TB, TypeCode.DOC):
            raise GeometryError(f"{type_.value} record {path!r} requires a geometry")
        g = _gazetteer_point(m, config)
    source_bbox = bbox(g)

    sensor = m.extra.get("sensor")
    if sensor is not None:
        try:
            profile = config.sensors[str(sensor).lower()]
        except KeyError:
            raise DomainError(f"unknown sensor kind {sensor!r}") from None
        level, flags = profile.level, ()
        t = _apply_sensor(t, profile)
    else:
        level, g, flags = select_level(type_, g, m, config)

    c = centroid(g)
    center = CellCode(geosot.encode_path(c.lon, c.lat, level))
    covers = CoverSet(level)
    if size_exceeds_cell(g, level):
        covers = cover_geometry(g, level, config.coverage_cap)
    if flags:
        m = replace(m, flags=m.flags + flags)
    return RecordEntry(
        pk=CompositeKey(center, t, type_),
        level=level,
        center=center,
        covers=covers,
        bbox=source_bbox,
        meta=m,
        path=path,
    )


@dataclass(frozen=True)
class IngestItem:
    path: str
    geometry: Geometry | None
    timestamp: Timestamp
    meta: IngestMeta
    type: TypeCode | None = None


def _encode_item(args: tuple[IngestItem, PipelineConfig]) -> RecordEntry | GSeedError:
    item, config = args
    try:
        return encode_record(item.path, item.geometry, item.timestamp, item.meta, config, item.type)
    except GSeedError as exc:
        return exc


def encode_batch(
    items: Iterable[IngestItem], config: PipelineConfig = DEFAULT_CONFIG, jobs: int = 1
) -> list[RecordEntry | GSeedError]:
    """Encode items in input order; a failing item yields its error, not an abort."""
    work = [(item, config) for item in items]
    if jobs <= 1 or len(work) < 2:
        return [_encode_item(w) for w in work]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_encode_item, work, chunksize=max(1, len(work) // (4 * jobs))))

