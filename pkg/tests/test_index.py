import random

import pytest

from gseed import geosot
from gseed.errors import CoverageCapError, DomainError, DuplicateKeyError, LoadError, ParseError
from gseed.geometry import Geometry
from gseed.index import IndexStore, box_cells
from gseed.keys import Timestamp
from gseed.pipeline import IngestMeta, encode_record

from oracles import boxes_meet

EXTS = [".tif", ".shp", ".csv", ".jpg", ".mp4", ".bin"]


def random_records(n, seed, region=(110.0, 31.0, 111.0, 32.0)):
    rng = random.Random(seed)
    w, s, e, n_ = region
    out, seen = [], set()
    while len(out) < n:
        x, y = rng.uniform(w, e), rng.uniform(s, n_)
        ext = rng.choice(EXTS)
        size = rng.choice([0.0, 1e-4, 0.003, 0.02, 0.08])
        kind = rng.random()
        if size == 0.0 or kind < 0.3 or ext in (".jpg", ".mp4"):  # media carry a GPS point
            g = Geometry.point(x, y)
        elif kind < 0.6:
            g = Geometry.box(x, y, x + size, y + size * rng.uniform(0.2, 1))
        elif kind < 0.8:
            g = Geometry.polyline([(x, y), (x + size, y + size / 3), (x + size / 2, y + size)])
        else:
            g = Geometry.polygon([(x, y), (x + size, y), (x + size / 2, y + size)])
        ts = Timestamp(2020 + rng.randrange(5), rng.randint(1, 12), rng.randint(1, 28), rng.randrange(24), rng.randrange(60))
        meta = IngestMeta(res_m=rng.choice([None, 10.0, 30.0]), gps=rng.random() < 0.7, admin_level="county")
        r = encode_record(f"f{len(out)}{ext}", g, ts, meta)
        if r.key not in seen:
            seen.add(r.key)
            out.append(r)
    return out


@pytest.fixture(scope="module")
def records():
    return random_records(1000, 11)


@pytest.fixture(scope="module")
def store(records):
    s = IndexStore()
    for r in records:
        s.insert(r)
    return s


def test_keys_sorted_and_iteration_in_key_order(store, records):
    assert store.keys() == sorted(r.key for r in records)
    assert [r.key for r in store] == store.keys()
    assert len(store) == len(records)


def test_prefix_queries_match_scan(store, records):
    rng = random.Random(2)
    prefixes = ["G", "G0", "G001"]
    for _ in range(60):
        k = rng.choice(records).key
        cut = rng.randint(1, len(k))
        prefixes.append(k[:cut])
    for p in prefixes:
        try:
            got = store.prefix_query(p)
        except ParseError:
            # only prefixes ending in a partial timestamp/type are rejected
            assert "|" in p
            continue
        assert [r.key for r in got] == sorted(r.key for r in records if r.key.startswith(p))
    assert len(store.prefix_query("G")) == len(records)


@pytest.mark.parametrize("bad", ["", "X", "G4", "G0\t", "G0|a|b|c", "Gé"])
def test_prefix_query_rejects_bad_prefix(store, bad):
    with pytest.raises(ParseError):
        store.prefix_query(bad)


def test_bbox_queries_match_scan(store, records):
    rng = random.Random(3)
    for i in range(60):
        x, y = rng.uniform(110.0, 111.0), rng.uniform(31.0, 32.0)
        size = rng.choice([1e-4, 0.002, 0.01, 0.05, 0.2])
        box = (x, y, x + size, y + size * rng.uniform(0.1, 2))
        level = None if i % 2 else rng.choice([10, 13, 16, 19])
        got = store.bbox_query(box, level)
        expected = sorted(r.key for r in records if boxes_meet(r.bbox, box))
        assert [r.key for r in got] == expected


def test_bbox_query_touching_edges(store, records):
    # boxes built from record bboxes touch them exactly at an edge or corner
    for r in records[:100]:
        w, s, e, n = r.bbox
        for box in ((e, n, e + 0.01, n + 0.01), (w - 0.01, s - 0.01, w, s), (w, s, w, s)):
            got = [x.key for x in store.bbox_query(box)]
            assert r.key in got
            assert got == sorted(x.key for x in records if boxes_meet(x.bbox, box))


def test_bbox_query_validation(store):
    with pytest.raises(DomainError):
        store.bbox_query((1, 1, 0, 0))
    with pytest.raises(DomainError):
        store.bbox_query((0, 0, 200, 1))
    with pytest.raises(CoverageCapError) as info:
        store.bbox_query((100, 20, 120, 40), level=24, cap=1000)
    assert "coarser" in str(info.value)


def test_box_cells_cover_every_point():
    rng = random.Random(4)
    for _ in range(200):
        level = rng.randint(8, 20)
        ext = geosot.cell_extent(level).degrees
        w, s = rng.uniform(-1, 1), rng.uniform(-1, 1)
        box = (w, s, w + ext * rng.uniform(0, 3), s + ext * rng.uniform(0, 3))
        cells = {str(c) for c in box_cells(box, level)}
        for _ in range(20):
            px, py = rng.uniform(box[0], box[2]), rng.uniform(box[1], box[3])
            assert str(geosot.encode(px, py, level)) in cells
        for px, py in ((box[0], box[1]), (box[2], box[3]), (box[0], box[3]), (box[2], box[1])):
            assert str(geosot.encode(px, py, level)) in cells
        assert len(cells) == len(box_cells(box, level))


def test_duplicate_insert_rejected(store, records):
    with pytest.raises(DuplicateKeyError):
        store.insert(records[0])


def test_postings_consistent(store, records):
    for r in records:
        for cell in r.covers.strings():
            assert r.key in store.postings[cell]
    total = sum(len(v) for v in store.postings.values())
    assert total == sum(len(r.covers) for r in records)


def test_save_load_round_trip(tmp_path, store):
    path = tmp_path / "index.tsv"
    store.save(path)
    loaded = IndexStore.load(path)
    assert loaded == store
    path2 = tmp_path / "again.tsv"
    loaded.save(path2)
    assert path.read_bytes() == path2.read_bytes()
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines == sorted(lines)


def _corrupt(tmp_path, store, mutate):
    path = tmp_path / "index.tsv"
    store.save(path)
    lines = path.read_text(encoding="utf-8").splitlines(keepends=True)
    path.write_text("".join(mutate(lines)), encoding="utf-8")
    return path


@pytest.mark.parametrize(
    "mutate, line",
    [
        (lambda ls: ls[:-1] + [ls[-1][: len(ls[-1]) // 2]], 1000),  # truncated tail
        (lambda ls: [ls[1], ls[0]] + ls[2:], 2),  # unsorted
        (lambda ls: ls[:5] + [ls[5].replace("\t", " ", 1)] + ls[6:], 6),  # missing tab
        (lambda ls: ls[:7] + [ls[7].split("\t")[0] + "\t{not json\n"] + ls[8:], 8),
        (lambda ls: ls[:9] + [ls[9].replace("|", "#", 1)] + ls[10:], 10),
    ],
)
def test_load_rejects_corrupt_files(tmp_path, store, mutate, line):
    path = _corrupt(tmp_path, store, mutate)
    with pytest.raises(LoadError) as info:
        IndexStore.load(path)
    assert info.value.line == line


def test_prefix_query_latency_20k():
    import time

    from gseed.bench import point_index
    from gseed.synth import clustered_points

    s = point_index(clustered_points(20_000, 1), 21)
    prefix = s.keys()[0][:9]
    start = time.perf_counter()
    hits = s.prefix_query(prefix)
    elapsed = time.perf_counter() - start
    assert hits == [r for r in s if r.key.startswith(prefix)]
    assert elapsed < 0.010
