"""Seeded synthetic data: clustered point clouds and a heterogeneous file corpus."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from . import geosot
from .geometry import Geometry

KM_PER_DEG = geosot.METERS_PER_DEGREE / 1000.0
# a forested mountain park in central China; only used as a plausible origin
DEFAULT_ORIGIN = (110.45, 31.62)

Point = tuple[float, float]


def clustered_points(
    n: int,
    seed: int,
    origin: Point = DEFAULT_ORIGIN,
    extent_km: float = 40.0,
    clusters: int = 150,
    sigma_m: float = 120.0,
) -> list[Point]:
    """Gaussian clusters whose centers are spread uniformly over a square region."""
    rng = random.Random(seed)
    half = extent_km / 2 / KM_PER_DEG
    centers = [
        (origin[0] + rng.uniform(-half, half), origin[1] + rng.uniform(-half, half))
        for _ in range(clusters)
    ]
    sigma = sigma_m / 1000 / KM_PER_DEG
    out = []
    for _ in range(n):
        cx, cy = centers[rng.randrange(clusters)]
        out.append((round(cx + rng.gauss(0, sigma), 7), round(cy + rng.gauss(0, sigma), 7)))
    return out


def cloud_with_area(area_km2: float, n: int, seed: int, origin: Point = DEFAULT_ORIGIN) -> list[Point]:
    """Points inside a square of the given planar area; two corners pin the bbox."""
    rng = random.Random(seed)
    side = math.sqrt(area_km2) / KM_PER_DEG
    x0, y0 = origin
    pts = [(x0, y0), (x0 + side, y0 + side)]
    pts += [(x0 + rng.uniform(0, side), y0 + rng.uniform(0, side)) for _ in range(max(0, n - 2))]
    return pts


@dataclass(frozen=True)
class CorpusFile:
    path: str
    kind: str  # point | line | polygon | raster
    geometries: tuple[Geometry, ...]


def _offset(p: Point, dx_m: float, dy_m: float) -> Point:
    return (p[0] + dx_m / geosot.METERS_PER_DEGREE, p[1] + dy_m / geosot.METERS_PER_DEGREE)


def _road(rng: random.Random, start: Point, length_m: float, step_m: float) -> Geometry:
    heading = rng.uniform(0, 2 * math.pi)
    pts = [start]
    p = start
    for _ in range(int(length_m / step_m)):
        heading += rng.gauss(0, 0.25)
        p = _offset(p, step_m * math.cos(heading), step_m * math.sin(heading))
        pts.append(p)
    return Geometry.polyline(pts)


def _parcel(rng: random.Random, center: Point, radius_m: float, vertices: int) -> Geometry:
    ring = []
    for k in range(vertices):
        a = 2 * math.pi * k / vertices
        r = radius_m * rng.uniform(0.8, 1.0)
        ring.append(_offset(center, r * math.cos(a), r * math.sin(a)))
    return Geometry.polygon(ring)


def hetero_corpus(seed: int, origin: Point = DEFAULT_ORIGIN, files_per_kind: int = 5) -> list[CorpusFile]:
    """Point, line, polygon and raster files laid out like a small park inventory.

    Point files hold plot locations at least one level-15 cell apart; roads
    are digitized every 800 m; parcels are small rings with dense outlines;
    raster files are one-tile-per-cell mosaics.
    """
    rng = random.Random(seed)
    cell = geosot.cell_extent(15).degrees
    files: list[CorpusFile] = []
    for f in range(files_per_kind):
        base = (origin[0] + f * 0.3, origin[1])
        pts = tuple(
            Geometry.point(base[0] + (i % 8) * cell * 1.5 + cell / 3, base[1] + (i // 8) * cell * 1.5 + cell / 3)
            for i in range(40)
        )
        files.append(CorpusFile(f"plots_{f}.csv", "point", pts))
    for f in range(files_per_kind):
        start = (origin[0] + rng.uniform(-0.1, 0.1), origin[1] - 0.2 + rng.uniform(-0.1, 0.1))
        roads = tuple(_road(rng, _offset(start, 0, 3000 * k), 12_000, 800) for k in range(3))
        files.append(CorpusFile(f"roads_{f}.geojson", "line", roads))
    for f in range(files_per_kind):
        base = (origin[0] - 0.3 + f * 0.05, origin[1] + 0.2)
        parcels = tuple(
            _parcel(rng, _offset(base, 2500 * k, 0), rng.uniform(150, 400), 48) for k in range(4)
        )
        files.append(CorpusFile(f"parcels_{f}.gpkg", "polygon", parcels))
    for f in range(files_per_kind):
        lon0 = math.floor((origin[0] + 0.5 + f * 0.2) / cell) * cell
        lat0 = math.floor((origin[1] - 0.3) / cell) * cell
        tiles = tuple(
            Geometry.box(lon0 + i * cell, lat0 + j * cell, lon0 + (i + 1) * cell, lat0 + (j + 1) * cell)
            for i in range(6)
            for j in range(6)
        )
        files.append(CorpusFile(f"scene_{f}.tif", "raster", tiles))
    return files
