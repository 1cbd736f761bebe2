"""Evaluation metrics and the four experiment suites (levels, adaptive, hetero, compare)."""

from __future__ import annotations

import csv
from bisect import bisect_left
import io
import platform
import random
import statistics
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

from . import geohash, geosot
from .config import DEFAULT_CONFIG
from .errors import DomainError
from .geometry import Geometry, centroid, cover_geometry
from .index import IndexStore
from .keys import Timestamp, TypeCode
from .pipeline import (
    MIN_AREA_KM2,
    IngestMeta,
    adaptive_level_by_area,
    bbox_area_km2,
    encode_record,
)
from .synth import CorpusFile

SWEEP_LEVELS = (15, 17, 19, 21)
Point = tuple[float, float]


def repeat_rate(codes: Sequence[str]) -> float:
    if not codes:
        raise DomainError("repeat_rate of an empty code list")
    return 1.0 - len(set(codes)) / len(codes)


def prefix_consistency(codes: Sequence[str], depth: int) -> float:
    """Share of codes whose first ``depth`` digits equal the most common such prefix."""
    if not codes:
        raise DomainError("prefix_consistency of an empty code list")
    if depth < 1:
        raise DomainError(f"depth must be >= 1, got {depth}")
    bodies = [c[1:] if c.startswith("G") else c for c in codes]
    if any(len(b) < depth for b in bodies):
        raise DomainError(f"depth {depth} exceeds code length")
    _, count = Counter(b[:depth] for b in bodies).most_common(1)[0]
    return count / len(bodies)


@dataclass(frozen=True)
class EncodingStats:
    level: int
    total_codes: int
    unique_codes: int
    repeat_rate: float
    avg_length: float
    storage_bytes: int
    elapsed: float

    @classmethod
    def of(cls, level: int, codes: Sequence[str], elapsed: float) -> "EncodingStats":
        storage = sum(len(c.encode("utf-8")) for c in codes)
        return cls(
            level=level,
            total_codes=len(codes),
            unique_codes=len(set(codes)),
            repeat_rate=repeat_rate(codes),
            avg_length=storage / len(codes),
            storage_bytes=storage,
            elapsed=elapsed,
        )

    def row(self) -> dict[str, object]:
        return {
            "level": self.level,
            "total_codes": self.total_codes,
            "unique_codes": self.unique_codes,
            "repeat_rate": round(self.repeat_rate, 6),
            "avg_length": round(self.avg_length, 4),
            "storage_bytes": self.storage_bytes,
            "elapsed_s": self.elapsed,
        }


@dataclass
class BenchReport:
    suite: str
    params: dict[str, object]
    columns: list[str]
    rows: list[dict[str, object]] = field(default_factory=list)
    timing_columns: tuple[str, ...] = ()
    environment: str = field(
        default_factory=lambda: f"python {platform.python_version()} ({platform.python_implementation()}), single-threaded timings"
    )

    def to_csv(self, include_timing: bool = True) -> str:
        cols = [c for c in self.columns if include_timing or c not in self.timing_columns]
        buf = io.StringIO()
        for key, value in self.params.items():
            buf.write(f"# {key}={value}\n")
        writer = csv.DictWriter(buf, fieldnames=cols, extrasaction="ignore", lineterminator="\n")
        writer.writeheader()
        for row in self.rows:
            writer.writerow({c: _fmt(row.get(c)) for c in cols})
        return buf.getvalue()

    def to_markdown(self) -> str:
        lines = [f"# {self.suite}", ""]
        lines += [f"- {k}: `{v}`" for k, v in self.params.items()]
        lines += [f"- environment: {self.environment}", ""]
        lines.append("| " + " | ".join(self.columns) + " |")
        lines.append("|" + "---|" * len(self.columns))
        for row in self.rows:
            lines.append("| " + " | ".join(_fmt(row.get(c)) for c in self.columns) + " |")
        return "\n".join(lines) + "\n"

    def write(self, out_dir: str | Path) -> tuple[Path, Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        csv_path = out / f"{self.suite}.csv"
        md_path = out / f"{self.suite}.md"
        csv_path.write_text(self.to_csv(), encoding="utf-8")
        md_path.write_text(self.to_markdown(), encoding="utf-8")
        return csv_path, md_path


def _fmt(value: object) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def encode_codes(points: Sequence[Point], level: int) -> tuple[list[str], float]:
    """Level codes for valid points, plus the elapsed time of the bare encode loop."""
    enc = geosot.encode_path
    start = time.perf_counter()
    codes = ["G" + enc(lon, lat, level) for lon, lat in points]
    return codes, time.perf_counter() - start


def _validated(points: Iterable[Sequence[float]]) -> list[Point]:
    return [tuple(geosot.GeoCoord.of(p[0], p[1])) for p in points]


_STATS_COLS = ["level", "total_codes", "unique_codes", "repeat_rate", "avg_length", "storage_bytes", "elapsed_s"]


def run_level_sweep(
    points: Sequence[Point], levels: Sequence[int] = SWEEP_LEVELS, seed: int | None = None
) -> BenchReport:
    pts = _validated(points)
    if not pts:
        raise DomainError("level sweep needs at least one point")
    report = BenchReport(
        "levels",
        {"seed": seed, "points": len(pts), "levels": ",".join(map(str, levels))},
        list(_STATS_COLS),
        timing_columns=("elapsed_s",),
    )
    for level in levels:
        codes, elapsed = encode_codes(pts, level)
        report.rows.append(EncodingStats.of(level, codes, elapsed).row())
    return report


def points_area_km2(points: Sequence[Point]) -> float:
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    return bbox_area_km2((min(xs), min(ys), max(xs), max(ys)))


def run_adaptive(points: Sequence[Point], seed: int | None = None) -> BenchReport:
    pts = _validated(points)
    if len(pts) < 2:
        raise DomainError("adaptive suite needs at least two points")
    area = points_area_km2(pts)
    level = adaptive_level_by_area(max(area, MIN_AREA_KM2))
    codes, elapsed = encode_codes(pts, level)
    report = BenchReport(
        "adaptive",
        {"seed": seed, "points": len(pts)},
        ["area_km2", *_STATS_COLS],
        timing_columns=("elapsed_s",),
    )
    report.rows.append({"area_km2": round(area, 6), **EncodingStats.of(level, codes, elapsed).row()})
    return report


def file_codes(f: CorpusFile, level: int = 15) -> list[str]:
    """Codes of the coordinates extracted from one file.

    Points give themselves, lines and polygons their vertices, raster tiles
    their centers.
    """
    coords: list[tuple[float, float]] = []
    for g in f.geometries:
        if f.kind == "raster":
            c = centroid(g)
            coords.append((c.lon, c.lat))
        else:
            coords.extend(g.vertices)
    return encode_codes(coords, level)[0]


def _file_redundancy(args: tuple[CorpusFile, int]) -> tuple[str, float]:
    f, level = args
    return f.kind, repeat_rate(file_codes(f, level))


HETERO_KINDS = ("point", "line", "polygon", "raster")


def run_heterogeneous(
    files: Sequence[CorpusFile], level: int = 15, seed: int | None = None, jobs: int = 1
) -> BenchReport:
    """Average per-file redundancy for each data kind at one level."""
    work = [(f, level) for f in files]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_file_redundancy, work))
    else:
        results = [_file_redundancy(w) for w in work]
    by_kind: dict[str, list[float]] = {}
    for kind, rate in results:
        by_kind.setdefault(kind, []).append(rate)
    report = BenchReport(
        "hetero",
        {"seed": seed, "files": len(files), "level": level},
        ["data_type", "files", "avg_redundancy"],
    )
    for kind in HETERO_KINDS + tuple(sorted(set(by_kind) - set(HETERO_KINDS))):
        if kind in by_kind:
            rates = by_kind[kind]
            report.rows.append(
                {"data_type": kind, "files": len(rates), "avg_redundancy": round(statistics.fmean(rates), 6)}
            )
    return report


def adjacent_sample(points: Sequence[Point], k: int, anchor: Point) -> list[Point]:
    """The ``k`` points nearest the anchor (ties broken by coordinates)."""
    ax, ay = anchor
    ranked = sorted(points, key=lambda p: ((p[0] - ax) ** 2 + (p[1] - ay) ** 2, p))
    return ranked[:k]


def mean_adjacent_consistency(
    points: Sequence[Point], encode, depth: int, samples: int, k: int, seed: int
) -> float:
    """Prefix consistency averaged over ``samples`` groups of adjacent points."""
    rng = random.Random(seed)
    total = 0.0
    for _ in range(samples):
        near = adjacent_sample(points, min(k, len(points)), points[rng.randrange(len(points))])
        total += prefix_consistency([encode(x, y) for x, y in near], depth)
    return total / samples


def _median_time(fn, repeats: int = 5) -> tuple[object, float]:
    times = []
    result = None
    for _ in range(repeats):
        start = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - start)
    return result, statistics.median(times)


def modal_prefix(codes: Sequence[str], length: int) -> str:
    return Counter(c[:length] for c in codes).most_common(1)[0][0]


def point_index(points: Sequence[Point], level: int) -> IndexStore:
    """One IMG record per point at ``level``; minute timestamps keep keys unique."""
    config = replace(DEFAULT_CONFIG, media_gps_level=level)
    store = IndexStore()
    meta = IngestMeta(gps=True)
    for i, (lon, lat) in enumerate(points):
        day, minute = divmod(i, 1440)
        ts = Timestamp(2024, 1 + day // 28 % 12, 1 + day % 28, minute // 60, minute % 60)
        store.insert(encode_record(f"p{i}.jpg", Geometry.point(lon, lat), ts, meta, config, TypeCode.IMG))
    return store


COMPARE_COLS = [
    "method",
    "code_length",
    "prefix_depth",
    "prefix_consistency",
    "cover_cells",
    "query_prefix",
    "query_matched",
    "oracle_equal",
    "encode_s",
    "query_index_s",
    "query_scan_s",
]


def comparable_geohash_length(level: int) -> int:
    ext = geosot.cell_extent(level).degrees
    return geohash.comparable_length(ext * ext)


def run_comparison(
    points: Sequence[Point],
    box: Sequence[float],
    level: int = 21,
    depth: int | None = None,
    samples: int = 50,
    sample_size: int = 100,
    query_digits: int = 7,
    seed: int = 0,
) -> BenchReport:
    """G-SEED against the Geohash baseline at comparable resolution."""
    pts = _validated(points)
    if len(pts) < 100:
        raise DomainError("comparison suite needs at least 100 points")
    depth = level - 6 if depth is None else depth
    gh_len = comparable_geohash_length(level)
    gh_depth = comparable_geohash_length(depth)
    gh_query_len = comparable_geohash_length(query_digits)

    gs_consistency = mean_adjacent_consistency(
        pts, lambda x, y: geosot.encode_path(x, y, level), depth, samples, sample_size, seed
    )
    gh_consistency = mean_adjacent_consistency(
        pts, lambda x, y: geohash.geohash_encode(x, y, gh_len), gh_depth, samples, sample_size, seed
    )

    gs_cover = len(cover_geometry(Geometry.box(*box), level))
    gh_cover = len(geohash.geohash_cover(box, gh_len))

    gs_codes, gs_encode = encode_codes(pts, level)
    start = time.perf_counter()
    gh_codes = [geohash.geohash_encode(x, y, gh_len) for x, y in pts]
    gh_encode = time.perf_counter() - start

    store = point_index(pts, level)
    records = list(store)
    gs_prefix = modal_prefix(gs_codes, 1 + query_digits)
    hits, gs_index_t = _median_time(lambda: store.prefix_query(gs_prefix))
    scan, gs_scan_t = _median_time(lambda: [r for r in records if r.key.startswith(gs_prefix)])

    gh_sorted = sorted(gh_codes)
    gh_prefix = modal_prefix(gh_codes, gh_query_len)

    def gh_index_query() -> list[str]:
        i = bisect_left(gh_sorted, gh_prefix)
        out = []
        while i < len(gh_sorted) and gh_sorted[i].startswith(gh_prefix):
            out.append(gh_sorted[i])
            i += 1
        return out

    gh_hits, gh_index_t = _median_time(gh_index_query)
    gh_scan, gh_scan_t = _median_time(lambda: sorted(c for c in gh_codes if c.startswith(gh_prefix)))

    report = BenchReport(
        "compare",
        {
            "seed": seed,
            "points": len(pts),
            "box": ",".join(repr(float(x)) for x in box),
            "level": level,
            "geohash_length": gh_len,
            "adjacent_samples": f"{samples}x{sample_size}",
            "pairing": "shortest geohash length with cell area <= GeoSOT cell area",
        },
        list(COMPARE_COLS),
        timing_columns=("encode_s", "query_index_s", "query_scan_s"),
    )
    report.rows.append(
        {
            "method": "G-SEED",
            "code_length": level + 1,
            "prefix_depth": depth,
            "prefix_consistency": round(gs_consistency, 6),
            "cover_cells": gs_cover,
            "query_prefix": gs_prefix,
            "query_matched": len(hits),
            "oracle_equal": hits == scan,
            "encode_s": gs_encode,
            "query_index_s": gs_index_t,
            "query_scan_s": gs_scan_t,
        }
    )
    report.rows.append(
        {
            "method": "Geohash",
            "code_length": gh_len,
            "prefix_depth": gh_depth,
            "prefix_consistency": round(gh_consistency, 6),
            "cover_cells": gh_cover,
            "query_prefix": gh_prefix,
            "query_matched": len(gh_hits),
            "oracle_equal": gh_hits == gh_scan,
            "encode_s": gh_encode,
            "query_index_s": gh_index_t,
            "query_scan_s": gh_scan_t,
        }
    )
    return report
