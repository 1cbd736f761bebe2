"""Prefix-ordered record index with cover-cell postings and a line-oriented file format.

Concurrency contract: queries may run concurrently with each other; ``insert``
and ``save`` need exclusive access.  Nothing here locks.
"""

from __future__ import annotations

import json
import math
import re
from bisect import bisect_left, insort
from pathlib import Path
from typing import Iterator, Sequence

from . import geosot
from .errors import CoverageCapError, DomainError, DuplicateKeyError, GSeedError, LoadError, ParseError
from .geometry import CoverSet
from .geosot import CellCode
from .keys import parse_pk
from .pipeline import IngestMeta, RecordEntry, adaptive_level_by_area, bbox_area_km2, MIN_AREA_KM2

_PREFIX_RE = re.compile(r"G[0-3]{0,32}(\|[^|\t\n]*(\|[^|\t\n]*)?)?")


def _axis_reps(lo: float, hi: float, other: float, level: int, lon_axis: bool) -> list[float]:
    """One representative value per cell column (or row) meeting [lo, hi]."""
    reps = []
    v = lo
    while v <= hi:
        reps.append(v)
        x, y = (v, other) if lon_axis else (other, v)
        cb = geosot.geo_bounds(CellCode(geosot.encode_path(x, y, level)))
        edge = cb.lon_max if lon_axis else cb.lat_max
        nxt = edge
        if (cb.contains(edge, y) if lon_axis else cb.contains(x, edge)) or nxt <= v:
            nxt = math.nextafter(edge, math.inf)
        v = nxt
    return reps


def box_cells(box: Sequence[float], level: int, cap: int | None = None) -> list[CellCode]:
    """Every level cell holding (half-open) at least one point of the closed box."""
    w, s, e, n = box
    if cap is not None:
        ext = geosot.cell_extent(level).degrees
        estimate = (e - w) * (n - s) / (ext * ext)
        if estimate > cap:
            raise CoverageCapError(cap, estimate, "use a coarser query level")
    xs = _axis_reps(w, e, s, level, True)
    ys = _axis_reps(s, n, w, level, False)
    return [CellCode(geosot.encode_path(x, y, level)) for x in xs for y in ys]


def extent_level(box: Sequence[float], level: int) -> int:
    """Finest level <= ``level`` whose cells are at least as large as the box."""
    side = max(box[2] - box[0], box[3] - box[1])
    while level > 1 and geosot.cell_extent(level).degrees < side:
        level -= 1
    return level


def boxes_intersect(a: Sequence[float], b: Sequence[float]) -> bool:
    return a[0] <= b[2] and b[0] <= a[2] and a[1] <= b[3] and b[1] <= a[3]


class IndexStore:
    """Ordered map pk -> record, plus cell postings for spatial filtering.

    ``postings`` maps each cover cell to the keys recording it.  A second,
    internal map also holds every record's center cell and the cells touching
    its bbox so that bbox queries never miss a record whose bbox meets the box.
    """

    def __init__(self) -> None:
        self._records: dict[str, RecordEntry] = {}
        self._keys: list[str] = []
        self._ordered: list[RecordEntry] = []
        self.postings: dict[str, list[str]] = {}
        self._cells: dict[str, set[str]] = {}
        self._cell_keys: list[str] = []

    def __len__(self) -> int:
        return len(self._keys)

    def __iter__(self) -> Iterator[RecordEntry]:
        return iter(self._ordered)

    def __contains__(self, pk: object) -> bool:
        return pk in self._records

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, IndexStore):
            return NotImplemented
        return self._keys == other._keys and self._records == other._records

    def keys(self) -> list[str]:
        return list(self._keys)

    def get(self, pk: str) -> RecordEntry:
        return self._records[pk]

    def _post(self, cell: str, pk: str) -> None:
        holders = self._cells.get(cell)
        if holders is None:
            self._cells[cell] = {pk}
            insort(self._cell_keys, cell)
        else:
            holders.add(pk)

    def insert(self, r: RecordEntry) -> None:
        _check_record(r)
        pk = r.key
        if pk in self._records:
            raise DuplicateKeyError(pk)
        self._records[pk] = r
        i = bisect_left(self._keys, pk)
        self._keys.insert(i, pk)
        self._ordered.insert(i, r)
        for cell in r.covers:
            self.postings.setdefault(str(cell), []).append(pk)
            self._post(str(cell), pk)
        self._post(str(r.center), pk)
        for cell in box_cells(r.bbox, extent_level(r.bbox, r.level)):
            self._post(str(cell), pk)

    def _prefix_range(self, prefix: str) -> tuple[int, int]:
        # keys are ASCII, so every key extending the prefix sorts below prefix + DEL
        return bisect_left(self._keys, prefix), bisect_left(self._keys, prefix + "\x7f")

    def prefix_query(self, prefix: str) -> list[RecordEntry]:
        """Records whose key text starts with ``prefix``, in key order."""
        if not (prefix.isascii() and _PREFIX_RE.fullmatch(prefix)):
            raise ParseError(f"invalid query prefix {prefix!r}")
        lo, hi = self._prefix_range(prefix)
        return self._ordered[lo:hi]

    def _related(self, cell: str, found: set[str]) -> None:
        cell_keys = self._cell_keys
        i = bisect_left(cell_keys, cell)
        while i < len(cell_keys) and cell_keys[i].startswith(cell):
            found.update(self._cells[cell_keys[i]])
            i += 1
        for j in range(2, len(cell)):
            holders = self._cells.get(cell[:j])
            if holders:
                found.update(holders)

    def candidates(self, box: Sequence[float], level: int, cap: int = 1_000_000) -> set[str]:
        """Keys with a center/cover/extent cell prefix-related to a query cell."""
        found: set[str] = set()
        for cell in box_cells(box, level, cap):
            self._related(str(cell), found)
        return found

    def bbox_query(
        self, box: Sequence[float], level: int | None = None, cap: int = 1_000_000
    ) -> list[RecordEntry]:
        """Records whose bbox meets the closed query box, in key order."""
        w, s, e, n = (float(x) for x in box)
        if not (w <= e and s <= n):
            raise DomainError(f"invalid box {box!r}")
        for lon, lat in ((w, s), (e, n)):
            geosot.GeoCoord.of(lon, lat)
        if level is None:
            level = adaptive_level_by_area(max(bbox_area_km2((w, s, e, n)), MIN_AREA_KM2))
        keys = self.candidates((w, s, e, n), level, cap)
        hits = [k for k in keys if boxes_intersect(self._records[k].bbox, (w, s, e, n))]
        hits.sort()
        return [self._records[k] for k in hits]

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for pk in self._keys:
                fh.write(pk + "\t" + json.dumps(record_body(self._records[pk]), **_JSON) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "IndexStore":
        store = cls()
        previous = None
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.endswith("\n"):
                    raise LoadError("truncated line (no newline)", lineno)
                pk, sep, body = line[:-1].partition("\t")
                if not sep:
                    raise LoadError("missing tab between key and body", lineno)
                if previous is not None and pk <= previous:
                    raise LoadError("keys not strictly sorted", lineno)
                try:
                    record = record_from_body(pk, json.loads(body))
                    store.insert(record)
                except (ValueError, KeyError, TypeError, GSeedError) as exc:
                    raise LoadError(str(exc), lineno) from None
                previous = pk
        return store


_JSON = {"sort_keys": True, "separators": (",", ":"), "ensure_ascii": False}


def record_body(r: RecordEntry) -> dict:
    return {
        "level": r.level,
        "center": str(r.center),
        "covers": r.covers.strings(),
        "bbox": list(r.bbox),
        "meta": r.meta.to_json(),
        "path": r.path,
    }


def record_from_body(pk: str, body: dict) -> RecordEntry:
    key = parse_pk(pk)
    level = body["level"]
    center = geosot.from_string(body["center"])
    covers = CoverSet.of(level, (geosot.from_string(c) for c in body["covers"]))
    bbox = body["bbox"]
    if len(bbox) != 4:
        raise ValueError("bbox needs 4 numbers")
    return RecordEntry(
        pk=key,
        level=level,
        center=center,
        covers=covers,
        bbox=tuple(float(x) for x in bbox),
        meta=IngestMeta.from_json(body["meta"]),
        path=body["path"],
    )


def _check_record(r: RecordEntry) -> None:
    if r.pk.cell != r.center or r.center.level != r.level:
        raise DomainError(f"record {r.key}: key cell, center and level disagree")
    if r.covers and r.covers.level != r.level:
        raise DomainError(f"record {r.key}: covers not at level {r.level}")
