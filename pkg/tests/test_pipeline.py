import random
from dataclasses import replace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gseed import geosot
from gseed.config import DEFAULT_CONFIG
from gseed.errors import DomainError, GeometryError
from gseed.geometry import Geometry, centroid, size_exceeds_cell
from gseed.keys import Timestamp, TypeCode
from gseed.pipeline import (
    AREA_LEVELS,
    RASTER_LEVELS,
    VECTOR_LEVELS,
    IngestItem,
    IngestMeta,
    adaptive_level_by_area,
    bbox_area_km2,
    detect_type,
    encode_batch,
    encode_record,
    level_by_resolution,
    level_by_size,
)

TS = Timestamp(2024, 6, 15, 10, 37)
PARCEL = Geometry.polygon([(110.40, 31.60), (110.45, 31.60), (110.45, 31.64), (110.40, 31.64)])


def test_detect_type():
    assert detect_type(".TIF") is TypeCode.RAS
    assert detect_type("geojson") is TypeCode.VEC
    assert detect_type(".mp3") is TypeCode.AUD
    assert detect_type(".bin") is TypeCode.UNK


@pytest.mark.parametrize("res_m, level", [(30, 17), (0.5, 22), (0.2, 24), (10_000, 15), (1, 21)])
def test_level_by_resolution(res_m, level):
    assert level_by_resolution(res_m) == level


@given(st.floats(1e-3, 1e6))
def test_resolution_level_in_range_and_monotone(res):
    lv = level_by_resolution(res)
    assert RASTER_LEVELS[0] <= lv <= RASTER_LEVELS[1]
    assert level_by_resolution(res * 2) <= lv


def test_level_by_size_range():
    for side in (1e-6, 1e-3, 0.01, 1.0):
        lv = level_by_size(Geometry.box(10, 10, 10 + side, 10 + side))
        assert VECTOR_LEVELS[0] <= lv <= VECTOR_LEVELS[1]


@pytest.mark.parametrize("area, level", [(2.1, 15), (1e6, 7), (1e-6, 24), (0.2, 17)])
def test_adaptive_level(area, level):
    assert adaptive_level_by_area(area) == level


def test_adaptive_level_rejects_bad_area():
    for bad in (0.0, -1.0, float("nan"), float("inf")):
        with pytest.raises(DomainError):
            adaptive_level_by_area(bad)


@given(st.floats(1e-8, 1e8))
def test_adaptive_level_in_range(area):
    assert AREA_LEVELS[0] <= adaptive_level_by_area(area) <= AREA_LEVELS[1]


def test_bbox_area():
    assert bbox_area_km2((0, 0, 1, 1)) == pytest.approx(111.32**2)


def test_raster_record():
    r = encode_record("scene.tif", Geometry.box(110.4, 31.6, 110.45, 31.65), TS, IngestMeta(res_m=30))
    assert r.level == 17 and r.pk.type is TypeCode.RAS
    assert len(r.covers) == 144  # 0.05 deg over ~0.0044-deg cells: 12 x 12
    assert r.key.startswith(str(r.center) + "|202406151037|")


def test_raster_without_resolution_is_flagged():
    r = encode_record("scene.tif", Geometry.box(110.4, 31.6, 110.41, 31.61), TS, IngestMeta())
    assert r.level == RASTER_LEVELS[0] and "res_missing" in r.meta.flags


def test_media_levels():
    img = encode_record("a.jpg", Geometry.point(110.4, 31.6), TS, IngestMeta(gps=True))
    assert img.level == 22 and img.pk.type is TypeCode.IMG and not img.covers
    nogps = encode_record("a.wav", Geometry.point(110.4, 31.6), TS, IngestMeta())
    assert nogps.level == DEFAULT_CONFIG.media_fallback_level
    cfg = replace(DEFAULT_CONFIG, media_without_gps="admin")
    admin = encode_record("a.mp4", Geometry.point(110.4, 31.6), TS, IngestMeta(admin_level="city"), cfg)
    assert admin.level == 11


def test_tabular_uses_admin_and_gazetteer():
    cfg = replace(DEFAULT_CONFIG, gazetteer={"forest_park": (110.45, 31.62)})
    r = encode_record("t.csv", None, TS, IngestMeta(admin_level="county", extra={"region": "Forest_Park"}), cfg)
    assert r.level == 13 and r.center == geosot.encode(110.45, 31.62, 13)
    flagged = encode_record("t.csv", Geometry.point(1, 1), TS, IngestMeta())
    assert "admin_missing" in flagged.meta.flags and flagged.level == DEFAULT_CONFIG.admin_fallback_level
    with pytest.raises(GeometryError):
        encode_record("t.csv", None, TS, IngestMeta(admin_level="county"))
    with pytest.raises(GeometryError):
        encode_record("a.jpg", None, TS, IngestMeta())


def test_unknown_type():
    r = encode_record("blob.bin", Geometry.point(1, 1), TS, IngestMeta())
    assert r.pk.type is TypeCode.UNK and r.level == DEFAULT_CONFIG.unknown_level


def test_sensor_profile_overrides_level_and_time():
    soil = encode_record("s.csv", Geometry.point(110.4, 31.6), TS, IngestMeta(extra={"sensor": "soil"}))
    assert soil.level == 22 and soil.pk.ts == TS
    station = encode_record("s.csv", Geometry.point(110.4, 31.6), TS, IngestMeta(extra={"sensor": "station"}))
    assert station.level == 17 and station.pk.ts == Timestamp(2024, 6, 15, 10, 0)
    wildlife = encode_record("s.csv", Geometry.point(110.4, 31.6), TS, IngestMeta(extra={"sensor": "wildlife"}))
    assert wildlife.pk.ts == Timestamp(2024, 6, 15, 10, 30)
    camera = encode_record("c.jpg", Geometry.point(110.4, 31.6), TS, IngestMeta(extra={"sensor": "camera"}))
    assert camera.level == 21 and camera.pk.ts == Timestamp(2024, 6, 15)
    with pytest.raises(DomainError):
        encode_record("s.csv", Geometry.point(1, 1), TS, IngestMeta(extra={"sensor": "sonar"}))


def test_meta_validation_and_json():
    with pytest.raises(DomainError):
        IngestMeta(res_m=0)
    with pytest.raises(DomainError):
        IngestMeta(admin_level="galactic")
    m = IngestMeta(res_m=2.5, gps=True, admin_level="city", source="x", extra={"k": 1}, flags=("a",))
    assert IngestMeta.from_json(m.to_json()) == m


def _random_item(rng: random.Random) -> IngestItem:
    ext = rng.choice([".tif", ".shp", ".csv", ".pdf", ".jpg", ".wav", ".mp4", ".xyz"])
    x, y = rng.uniform(-170, 170), rng.uniform(-80, 80)
    size = rng.choice([1e-5, 1e-3, 0.02])
    g = rng.choice(
        [
            Geometry.point(x, y),
            Geometry.box(x, y, x + size, y + size),
            Geometry.polyline([(x, y), (x + size, y + size / 2), (x + 2 * size, y)]),
            Geometry.polygon([(x, y), (x + size, y), (x + size, y + size)]),
        ]
    )
    meta = IngestMeta(res_m=rng.choice([None, 0.5, 30.0]), gps=rng.random() < 0.5,
                      admin_level=rng.choice([None, "city", "township"]))
    return IngestItem(f"f{rng.randrange(10**6)}{ext}", g, TS, meta)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**6))
def test_dispatch_is_total_and_consistent(seed):
    item = _random_item(random.Random(seed))
    r = encode_record(item.path, item.geometry, item.timestamp, item.meta)
    assert 1 <= r.level <= 32
    assert r.pk.cell == r.center and r.center.level == r.level
    # covers present exactly when the (simplified) geometry is larger than a cell
    if r.covers:
        assert size_exceeds_cell(item.geometry, r.level) or r.pk.type is TypeCode.VEC
        assert all(c.level == r.level for c in r.covers)
    else:
        assert not size_exceeds_cell(item.geometry, r.level)
    c = centroid(item.geometry)
    if r.pk.type is not TypeCode.VEC:
        assert r.center == geosot.encode(c.lon, c.lat, r.level)


def test_encode_batch_order_and_errors():
    rng = random.Random(5)
    items = [_random_item(rng) for _ in range(40)]
    items.insert(3, IngestItem("bad.jpg", None, TS, IngestMeta()))
    serial = encode_batch(items)
    parallel = encode_batch(items, jobs=2)
    assert isinstance(serial[3], GeometryError)
    assert [r.key if not isinstance(r, Exception) else str(r) for r in serial] == [
        r.key if not isinstance(r, Exception) else str(r) for r in parallel
    ]
