"""JSON Lines ingestion manifests and CSV point files.

One manifest entry per line::

    {"path": "scene.tif", "geometry": {"type": "Polygon", ...},
     "timestamp": "20240615", "meta": {"res_m": 30}}

``type`` (a type code) is optional and overrides extension detection;
``geometry`` may be omitted for TB/DOC records resolved through the
gazetteer.  ``meta`` accepts res_m, gps, admin_level, source, sensor,
region and extra.
"""

from __future__ import annotations

import csv
import json
from collections import OrderedDict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

from .errors import GSeedError, ParseError
from .geometry import Geometry
from .keys import TypeCode, parse_timestamp
from .pipeline import IngestItem, IngestMeta
from .synth import CorpusFile

_META_KEYS = {"res_m", "gps", "admin_level", "source", "sensor", "region", "extra"}


@dataclass(frozen=True)
class ManifestError:
    line: int
    message: str

    def __str__(self) -> str:
        return f"line {self.line}: {self.message}"


def parse_entry(obj: dict) -> IngestItem:
    if not isinstance(obj, dict):
        raise ParseError("entry must be a JSON object")
    try:
        path = obj["path"]
        ts_text = obj["timestamp"]
    except KeyError as exc:
        raise ParseError(f"missing field {exc.args[0]!r}", field=exc.args[0]) from None
    if not isinstance(path, str) or not path:
        raise ParseError("path must be a non-empty string", field="path")
    ts = parse_timestamp(str(ts_text))
    geometry = obj.get("geometry")
    geom = Geometry.from_geojson(geometry) if geometry is not None else None
    raw = obj.get("meta") or {}
    unknown = set(raw) - _META_KEYS
    if unknown:
        raise ParseError(f"unknown meta keys {sorted(unknown)}", field="meta")
    extra = dict(raw.get("extra") or {})
    for key in ("sensor", "region"):
        if raw.get(key) is not None:
            extra[key] = raw[key]
    meta = IngestMeta(
        res_m=raw.get("res_m"),
        gps=bool(raw.get("gps", False)),
        admin_level=raw.get("admin_level"),
        source=raw.get("source", ""),
        extra=extra,
    )
    type_ = None
    if obj.get("type") is not None:
        try:
            type_ = TypeCode(str(obj["type"]).upper())
        except ValueError:
            raise ParseError(f"unknown type code {obj['type']!r}", field="type") from None
    return IngestItem(path, geom, ts, meta, type_)


def read_manifest(path: str | Path) -> Iterator[tuple[int, IngestItem | ManifestError]]:
    """Yield (line number, item or error); blank lines are skipped."""
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                yield lineno, parse_entry(json.loads(line))
            except json.JSONDecodeError as exc:
                yield lineno, ManifestError(lineno, f"invalid JSON: {exc.msg}")
            except GSeedError as exc:
                yield lineno, ManifestError(lineno, str(exc))


def entry_json(item: IngestItem) -> str:
    meta: dict = {}
    m = item.meta
    if m.res_m is not None:
        meta["res_m"] = m.res_m
    if m.gps:
        meta["gps"] = True
    if m.admin_level is not None:
        meta["admin_level"] = m.admin_level
    if m.source:
        meta["source"] = m.source
    if m.extra:
        meta["extra"] = m.extra
    obj: dict = {"path": item.path, "timestamp": str(item.timestamp)}
    if item.type is not None:
        obj["type"] = item.type.value
    if item.geometry is not None:
        obj["geometry"] = item.geometry.to_geojson()
    if meta:
        obj["meta"] = meta
    return json.dumps(obj, sort_keys=True)


def write_manifest(path: str | Path, items: Iterable[IngestItem]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for item in items:
            fh.write(entry_json(item) + "\n")


def corpus_items(files: Iterable[CorpusFile], timestamp: str = "20240615") -> list[IngestItem]:
    ts = parse_timestamp(timestamp)
    items = []
    for f in files:
        meta = IngestMeta(res_m=30.0) if f.kind == "raster" else IngestMeta()
        for g in f.geometries:
            items.append(IngestItem(f.path, g, ts, meta))
    return items


_KIND_BY_GEOMETRY = {"point": "point", "polyline": "line", "polygon": "polygon", "box": "raster"}


def corpus_from_items(items: Iterable[IngestItem], detect) -> list[CorpusFile]:
    """Group manifest entries by path into files; RAS entries are raster files."""
    groups: OrderedDict[str, list[IngestItem]] = OrderedDict()
    for item in items:
        if item.geometry is not None:
            groups.setdefault(item.path, []).append(item)
    files = []
    for path, group in groups.items():
        first = group[0]
        type_ = first.type or detect(Path(path).suffix)
        kind = "raster" if type_ is TypeCode.RAS else _KIND_BY_GEOMETRY[first.geometry.kind]
        files.append(CorpusFile(path, kind, tuple(i.geometry for i in group)))
    return files


def read_points(path: str | Path) -> list[tuple[float, float]]:
    """CSV with a ``lon,lat`` header."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if not reader.fieldnames or not {"lon", "lat"} <= set(reader.fieldnames):
            raise ParseError(f"{path}: points CSV needs a 'lon,lat' header")
        out = []
        for lineno, row in enumerate(reader, start=2):
            try:
                out.append((float(row["lon"]), float(row["lat"])))
            except (TypeError, ValueError):
                raise ParseError(f"{path}: bad point on line {lineno}", position=lineno) from None
        return out


def write_points(path: str | Path, points: Iterable[tuple[float, float]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["lon", "lat"])
        for lon, lat in points:
            writer.writerow([repr(lon), repr(lat)])
