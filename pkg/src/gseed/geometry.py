"""Geometry model, centroid/bbox helpers, Douglas-Peucker and grid coverage.

All math is planar in degree space.  Coverage descends the GeoSOT quadtree
from the four quadrant cells, pruning cells that miss the geometry and
expanding fully covered cells without further tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import partial
from typing import Iterable, Iterator, Sequence

from . import geosot
from .errors import CoverageCapError, DomainError, GeometryError
from .geosot import CellBounds, CellCode, GeoCoord

KINDS = ("point", "polyline", "polygon", "box")
DEFAULT_COVER_CAP = 1_000_000

Vertex = tuple[float, float]
BBox = tuple[float, float, float, float]


@dataclass(frozen=True)
class Geometry:
    kind: str
    vertices: tuple[Vertex, ...]

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise GeometryError(f"unknown geometry kind {self.kind!r}")
        need = {"point": 1, "polyline": 2, "polygon": 3, "box": 2}[self.kind]
        if len(self.vertices) < need:
            raise GeometryError(
                f"{self.kind} needs at least {need} vertices, got {len(self.vertices)}"
            )
        for v in self.vertices:
            GeoCoord.of(*v)

    @classmethod
    def point(cls, lon: float, lat: float) -> "Geometry":
        return cls("point", (_vertex((lon, lat)),))

    @classmethod
    def polyline(cls, coords: Iterable[Sequence[float]]) -> "Geometry":
        return cls("polyline", tuple(_vertex(c) for c in coords))

    @classmethod
    def polygon(cls, ring: Iterable[Sequence[float]], validate: bool = True) -> "Geometry":
        verts = [_vertex(c) for c in ring]
        if len(verts) > 1 and verts[0] == verts[-1]:
            verts.pop()
        g = cls("polygon", tuple(verts))
        if validate and _ring_self_intersects(g.vertices):
            raise GeometryError("polygon ring is self-intersecting")
        return g

    @classmethod
    def box(cls, lon_min: float, lat_min: float, lon_max: float, lat_max: float) -> "Geometry":
        if lon_min > lon_max or lat_min > lat_max:
            raise GeometryError("box minimum exceeds maximum")
        return cls("box", (_vertex((lon_min, lat_min)), _vertex((lon_max, lat_max))))

    @classmethod
    def from_geojson(cls, obj: dict) -> "Geometry":
        """Point, LineString or Polygon (outer ring only).

        ``{"type": "Box", "coordinates": [w, s, e, n]}`` is accepted as an
        extension for raster extents.
        """
        try:
            kind = obj["type"]
            coords = obj["coordinates"]
        except (KeyError, TypeError):
            raise GeometryError("geometry needs 'type' and 'coordinates'") from None
        try:
            if kind == "Point":
                return cls.point(coords[0], coords[1])
            if kind == "LineString":
                return cls.polyline(coords)
            if kind == "Polygon":
                return cls.polygon(coords[0])
            if kind == "Box":
                return cls.box(*coords)
        except (IndexError, TypeError, ValueError) as exc:
            if isinstance(exc, GeometryError):
                raise
            raise GeometryError(f"bad {kind} coordinates: {exc}") from None
        raise GeometryError(f"unsupported geometry type {kind!r}")

    def to_geojson(self) -> dict:
        if self.kind == "point":
            return {"type": "Point", "coordinates": list(self.vertices[0])}
        if self.kind == "polyline":
            return {"type": "LineString", "coordinates": [list(v) for v in self.vertices]}
        if self.kind == "box":
            (w, s), (e, n) = self.vertices
            return {"type": "Box", "coordinates": [w, s, e, n]}
        ring = [list(v) for v in self.vertices]
        return {"type": "Polygon", "coordinates": [ring + [ring[0]]]}


def _vertex(c: Sequence[float]) -> Vertex:
    if len(c) < 2:
        raise GeometryError(f"vertex {c!r} needs lon and lat")
    coord = GeoCoord.of(c[0], c[1])
    return (coord.lon, coord.lat)


def _orient(a: Vertex, b: Vertex, c: Vertex) -> float:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _on_segment(a: Vertex, b: Vertex, p: Vertex) -> bool:
    return min(a[0], b[0]) <= p[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= p[1] <= max(a[1], b[1])


def segments_intersect(p1: Vertex, p2: Vertex, q1: Vertex, q2: Vertex) -> bool:
    d1 = _orient(q1, q2, p1)
    d2 = _orient(q1, q2, p2)
    d3 = _orient(p1, p2, q1)
    d4 = _orient(p1, p2, q2)
    if ((d1 > 0 > d2) or (d1 < 0 < d2)) and ((d3 > 0 > d4) or (d3 < 0 < d4)):
        return True
    return (
        (d1 == 0 and _on_segment(q1, q2, p1))
        or (d2 == 0 and _on_segment(q1, q2, p2))
        or (d3 == 0 and _on_segment(p1, p2, q1))
        or (d4 == 0 and _on_segment(p1, p2, q2))
    )


def _ring_self_intersects(ring: Sequence[Vertex]) -> bool:
    n = len(ring)
    edges = [(ring[i], ring[(i + 1) % n]) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if j == i + 1 or (i == 0 and j == n - 1):
                continue
            if segments_intersect(*edges[i], *edges[j]):
                return True
    return False


def bbox(g: Geometry) -> BBox:
    xs = [v[0] for v in g.vertices]
    ys = [v[1] for v in g.vertices]
    return (min(xs), min(ys), max(xs), max(ys))


def _shoelace(ring: Sequence[Vertex]) -> tuple[float, float, float]:
    """Signed area and area-weighted centroid sums, relative to the first vertex."""
    ox, oy = ring[0]
    a = cx = cy = 0.0
    n = len(ring)
    for i in range(n):
        x0, y0 = ring[i][0] - ox, ring[i][1] - oy
        x1, y1 = ring[(i + 1) % n][0] - ox, ring[(i + 1) % n][1] - oy
        cross = x0 * y1 - x1 * y0
        a += cross
        cx += (x0 + x1) * cross
        cy += (y0 + y1) * cross
    return a / 2, cx, cy


def _clamp(lon: float, lat: float) -> GeoCoord:
    return GeoCoord.of(min(180.0, max(-180.0, lon)), min(90.0, max(-90.0, lat)))


def _vertex_mean(vs: Sequence[Vertex]) -> GeoCoord:
    n = len(vs)
    return _clamp(sum(v[0] for v in vs) / n, sum(v[1] for v in vs) / n)


def centroid(g: Geometry) -> GeoCoord:
    vs = g.vertices
    if g.kind == "point":
        return GeoCoord(*vs[0])
    if g.kind == "box":
        return _clamp((vs[0][0] + vs[1][0]) / 2, (vs[0][1] + vs[1][1]) / 2)
    if g.kind == "polyline":
        total = sx = sy = 0.0
        for a, b in zip(vs, vs[1:]):
            length = math.hypot(b[0] - a[0], b[1] - a[1])
            total += length
            sx += (a[0] + b[0]) / 2 * length
            sy += (a[1] + b[1]) / 2 * length
        if total == 0.0:
            return _vertex_mean(vs)
        return _clamp(sx / total, sy / total)
    area, cx, cy = _shoelace(vs)
    if area == 0.0:
        return _vertex_mean(vs)
    ox, oy = vs[0]
    return _clamp(ox + cx / (6 * area), oy + cy / (6 * area))


def point_segment_distance(p: Vertex, a: Vertex, b: Vertex) -> float:
    dx, dy = b[0] - a[0], b[1] - a[1]
    seg2 = dx * dx + dy * dy
    if seg2 == 0.0:
        return math.hypot(p[0] - a[0], p[1] - a[1])
    t = max(0.0, min(1.0, ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / seg2))
    return math.hypot(p[0] - (a[0] + t * dx), p[1] - (a[1] + t * dy))


def douglas_peucker(line: Geometry, epsilon: float) -> Geometry:
    """Simplify a polyline; vertices farther than ``epsilon`` from the chord survive."""
    if line.kind != "polyline":
        raise GeometryError(f"douglas_peucker needs a polyline, got {line.kind}")
    if epsilon < 0 or math.isnan(epsilon):
        raise DomainError(f"epsilon must be >= 0, got {epsilon}")
    vs = line.vertices
    if len(vs) <= 2:
        return line
    keep = [False] * len(vs)
    keep[0] = keep[-1] = True
    stack = [(0, len(vs) - 1)]
    while stack:
        first, last = stack.pop()
        dmax, index = -1.0, -1
        for i in range(first + 1, last):
            d = point_segment_distance(vs[i], vs[first], vs[last])
            if d > dmax:
                dmax, index = d, i
        if index >= 0 and dmax > epsilon:
            keep[index] = True
            stack.append((first, index))
            stack.append((index, last))
    return Geometry("polyline", tuple(v for v, k in zip(vs, keep) if k))


def size_exceeds_cell(g: Geometry, level: int) -> bool:
    w, s, e, n = bbox(g)
    return max(e - w, n - s) > geosot.cell_extent(level).degrees


@dataclass(frozen=True)
class CoverSet:
    level: int
    cells: tuple[CellCode, ...] = ()

    def __len__(self) -> int:
        return len(self.cells)

    def __iter__(self) -> Iterator[CellCode]:
        return iter(self.cells)

    def __contains__(self, cell: object) -> bool:
        return cell in self.cells

    def strings(self) -> list[str]:
        return [str(c) for c in self.cells]

    @classmethod
    def of(cls, level: int, cells: Iterable[CellCode]) -> "CoverSet":
        unique = sorted(set(cells))
        if any(c.level != level for c in unique):
            raise DomainError(f"cover cells must all be level {level}")
        return cls(level, tuple(unique))


NONE, PARTIAL, FULL = 0, 1, 2


def _excluded_edges(lo: float, hi: float, negative: int, closed: bool) -> tuple[float, ...]:
    if negative:
        edges = () if closed else (lo,)
        return edges + ((0.0,) if hi == 0.0 else ())
    return () if closed else (hi,)


def _clip_segment(a: Vertex, b: Vertex, r: BBox) -> tuple[Vertex, Vertex] | None:
    """Liang-Barsky clip of segment ab to the closed rectangle r."""
    x0, y0 = a
    dx, dy = b[0] - x0, b[1] - y0
    t0, t1 = 0.0, 1.0
    for p, q in ((-dx, x0 - r[0]), (dx, r[2] - x0), (-dy, y0 - r[1]), (dy, r[3] - y0)):
        if p == 0.0:
            if q < 0.0:
                return None
            continue
        t = q / p
        if p < 0.0:
            if t > t1:
                return None
            t0 = max(t0, t)
        else:
            if t < t0:
                return None
            t1 = min(t1, t)
    pa = a if t0 == 0.0 else (x0 + t0 * dx, y0 + t0 * dy)
    pb = b if t1 == 1.0 else (x0 + t1 * dx, y0 + t1 * dy)
    # snap onto the rectangle so edge tests below are exact
    pa = (min(max(pa[0], r[0]), r[2]), min(max(pa[1], r[1]), r[3]))
    pb = (min(max(pb[0], r[0]), r[2]), min(max(pb[1], r[1]), r[3]))
    return pa, pb


def segment_hits_cell(a: Vertex, b: Vertex, cb: CellBounds) -> bool:
    """Whether segment ab meets the half-open cell ``cb``."""
    clipped = _clip_segment(a, b, cb.box)
    if clipped is None:
        return False
    pa, pb = clipped
    if pa == pb:
        return cb.contains(*pa)
    quad = max(cb.quadrant, 0)
    for x in _excluded_edges(cb.lon_min, cb.lon_max, quad & 1, cb.lon_closed):
        if pa[0] == x and pb[0] == x:
            return False
    for y in _excluded_edges(cb.lat_min, cb.lat_max, quad >> 1, cb.lat_closed):
        if pa[1] == y and pb[1] == y:
            return False
    return True


def clip_polygon_area(ring: Sequence[Vertex], r: BBox) -> float:
    """Area of ring ∩ r via Sutherland-Hodgman, in coordinates relative to r's corner."""
    ox, oy = r[0], r[1]
    w, h = r[2] - ox, r[3] - oy
    pts = [(x - ox, y - oy) for x, y in ring]
    for axis, bound, keep_ge in ((0, 0.0, True), (0, w, False), (1, 0.0, True), (1, h, False)):
        if not pts:
            return 0.0
        out: list[Vertex] = []
        prev = pts[-1]
        prev_in = prev[axis] >= bound if keep_ge else prev[axis] <= bound
        for cur in pts:
            cur_in = cur[axis] >= bound if keep_ge else cur[axis] <= bound
            if cur_in != prev_in:
                t = (bound - prev[axis]) / (cur[axis] - prev[axis])
                other = 1 - axis
                cross = prev[other] + t * (cur[other] - prev[other])
                out.append((bound, cross) if axis == 0 else (cross, bound))
            if cur_in:
                out.append(cur)
            prev, prev_in = cur, cur_in
        pts = out
    if len(pts) < 3:
        return 0.0
    a = 0.0
    for i in range(len(pts)):
        x0, y0 = pts[i]
        x1, y1 = pts[(i + 1) % len(pts)]
        a += x0 * y1 - x1 * y0
    return abs(a) / 2


def point_in_ring(p: Vertex, ring: Sequence[Vertex]) -> bool:
    """Closed point-in-polygon test (boundary counts as inside)."""
    n = len(ring)
    inside = False
    for i in range(n):
        a, b = ring[i], ring[(i + 1) % n]
        if _orient(a, b, p) == 0 and _on_segment(a, b, p):
            return True
        if (a[1] > p[1]) != (b[1] > p[1]):
            x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1])
            if p[0] < x:
                inside = not inside
    return inside


_AREA_TOL = 1e-9


def _effective(g: Geometry) -> Geometry:
    """Zero-area boxes/polygons degrade to their outline."""
    if g.kind == "box":
        (w, s), (e, n) = g.vertices
        if w == e or s == n:
            if w == e and s == n:
                return Geometry("point", (g.vertices[0],))
            return Geometry("polyline", g.vertices)
    elif g.kind == "polygon" and _shoelace(g.vertices)[0] == 0.0:
        return Geometry("polyline", g.vertices + (g.vertices[0],))
    return g


def relation(g: Geometry, cb: CellBounds, min_area: float | None = None) -> int:
    """NONE, PARTIAL or FULL overlap between an effective geometry and a cell.

    Polygon overlaps of at most ``min_area`` count as NONE; the default is a
    relative tolerance of the cell's own area.
    """
    r = cb.box
    if g.kind == "point":
        return PARTIAL if cb.contains(*g.vertices[0]) else NONE
    if g.kind == "box":
        (w, s), (e, n) = g.vertices
        if not (w < r[2] and e > r[0] and s < r[3] and n > r[1]):
            return NONE
        if w <= r[0] and e >= r[2] and s <= r[1] and n >= r[3]:
            return FULL
        return PARTIAL
    if g.kind == "polyline":
        vs = g.vertices
        for a, b in zip(vs, vs[1:]):
            if segment_hits_cell(a, b, cb):
                return PARTIAL
        return NONE
    rect_area = (r[2] - r[0]) * (r[3] - r[1])
    if rect_area <= 0.0:
        return NONE
    area = clip_polygon_area(g.vertices, r)
    if area <= (rect_area * _AREA_TOL if min_area is None else min_area):
        return NONE
    if area >= rect_area * (1 - 1e-12) and all(
        point_in_ring(c, g.vertices)
        for c in ((r[0], r[1]), (r[2], r[1]), (r[2], r[3]), (r[0], r[3]))
    ):
        return FULL
    return PARTIAL


def estimate_cells(g: Geometry, level: int) -> float:
    w, s, e, n = bbox(g)
    ext = geosot.cell_extent(level).degrees
    return (e - w) * (n - s) / (ext * ext)


def _descendants(cell: CellCode, level: int, out: list[CellCode]) -> None:
    if cell.level == level:
        out.append(cell)
        return
    for child, _ in geosot.geographic_children(cell):
        _descendants(child, level, out)


def cover_cells(g: Geometry, level: int, rel=relation) -> list[CellCode]:
    """Quadtree descent collecting level-``level`` cells with ``rel(g, cell) != NONE``."""
    w, s, e, n = bbox(g)
    out: list[CellCode] = []
    stack = list(geosot.geographic_children(geosot.ROOT))
    while stack:
        cell, cb = stack.pop()
        if cb.lon_min > e or cb.lon_max < w or cb.lat_min > n or cb.lat_max < s:
            continue
        rel_ = rel(g, cb)
        if rel_ == NONE:
            continue
        if cell.level == level:
            out.append(cell)
        elif rel_ == FULL:
            _descendants(cell, level, out)
        else:
            stack.extend(geosot.geographic_children(cell))
    return out


def cover_geometry(g: Geometry, level: int, cap: int = DEFAULT_COVER_CAP) -> CoverSet:
    """Every level-``level`` cell whose half-open rectangle meets the geometry.

    Areal geometries (polygon, box) count a cell only when the overlap has
    positive area, so a box equal to one cell covers exactly that cell.
    """
    geosot._check_level(level, 1)
    if cap <= 0:
        raise DomainError(f"cap must be positive, got {cap}")
    estimate = estimate_cells(g, level)
    if estimate > cap:
        raise CoverageCapError(cap, estimate)
    eff = _effective(g)
    if eff.kind == "point":
        lon, lat = eff.vertices[0]
        return CoverSet(level, (CellCode(geosot.encode_path(lon, lat, level)),))
    # one threshold for the whole descent, so coarse ancestors never prune a
    # target-level cell whose overlap passes
    ext = geosot.cell_extent(level).degrees
    rel = partial(relation, min_area=ext * ext * _AREA_TOL)
    return CoverSet.of(level, cover_cells(eff, level, rel))
