import csv
import io
import json
import subprocess
import sys

import pytest

from gseed import geosot
from gseed.cli import main

TIMING = {"elapsed_s", "encode_s", "query_index_s", "query_scan_s"}


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def strip_timing(text: str) -> str:
    comments = [l for l in text.splitlines() if l.startswith("#")]
    body = "\n".join(l for l in text.splitlines() if not l.startswith("#"))
    rows = list(csv.reader(io.StringIO(body)))
    keep = [i for i, c in enumerate(rows[0]) if c not in TIMING]
    return "\n".join(comments + [",".join(r[i] for i in keep) for r in rows])


def test_encode(capsys):
    assert run(capsys, "encode", "--lon", "116.3", "--lat", "39.9", "--level", "9")[:2] == (0, "G001310322\n")
    assert run(capsys, "encode", "--lon", "0", "--lat", "0", "--level", "1")[1] == "G0\n"


def test_encode_range_error_is_data_error(capsys):
    code, out, err = run(capsys, "encode", "--lon", "200", "--lat", "0", "--level", "3")
    assert code == 2 and "longitude" in err and out == ""


def test_usage_errors_exit_1(capsys):
    for argv in (["encode", "--lon", "1"], ["frobnicate"], ["bench", "--suite", "nope"], []):
        with pytest.raises(SystemExit) as info:
            main(argv)
        assert info.value.code == 1
    capsys.readouterr()


def test_decode(capsys):
    code, out, _ = run(capsys, "decode", "--code", "G0")
    assert code == 0
    assert out.splitlines() == ["level 1", "lon [0.0, 180.0]", "lat [0.0, 90.0]", "center 90.0 45.0"]
    assert run(capsys, "decode", "--code", "G5")[0] == 2
    assert run(capsys, "decode", "--code", "G0000000003333")[0] == 2  # padding cell


def _geometry_file(tmp_path, obj):
    p = tmp_path / "g.json"
    p.write_text(json.dumps(obj))
    return str(p)


def test_cover(tmp_path, capsys):
    cb = geosot.geo_bounds(geosot.encode(110.5, 31.5, 15))
    one = _geometry_file(tmp_path, {"type": "Box", "coordinates": list(cb.box)})
    code, out, _ = run(capsys, "cover", "--geometry-file", one, "--level", "15")
    assert code == 0 and out.splitlines() == [str(geosot.encode(110.5, 31.5, 15))]
    ext = geosot.cell_extent(15).degrees
    w, s, e, n = cb.box
    ring = [[w + ext / 2, s + ext / 2], [e + ext / 2, s + ext / 2], [e + ext / 2, n + ext / 2], [w + ext / 2, n + ext / 2]]
    four = _geometry_file(tmp_path, {"type": "Feature", "geometry": {"type": "Polygon", "coordinates": [ring + [ring[0]]]}})
    lines = run(capsys, "cover", "--geometry-file", four, "--level", "15")[1].splitlines()
    assert len(lines) == 4 and lines == sorted(lines)
    assert run(capsys, "cover", "--geometry-file", str(tmp_path / "missing.json"), "--level", "3")[0] == 2
    big = _geometry_file(tmp_path, {"type": "Box", "coordinates": [0, 0, 10, 10]})
    assert run(capsys, "cover", "--geometry-file", big, "--level", "21", "--cap", "10")[0] == 2


MANIFEST = [
    {"path": "scene.tif", "geometry": {"type": "Box", "coordinates": [110.40, 31.60, 110.42, 31.62]},
     "timestamp": "20240615", "meta": {"res_m": 30}},
    {"path": "roads.shp", "geometry": {"type": "LineString", "coordinates": [[110.4, 31.6], [110.401, 31.6005]]},
     "timestamp": "202406150830"},
    {"path": "cam.jpg", "geometry": {"type": "Point", "coordinates": [110.43, 31.61]},
     "timestamp": "202406151200", "meta": {"gps": True}},
]


def _manifest(tmp_path, entries, extra_lines=()):
    p = tmp_path / "m.jsonl"
    p.write_text("".join(json.dumps(e) + "\n" for e in entries) + "".join(extra_lines))
    return p


def test_ingest_and_query(tmp_path, capsys):
    out_index = tmp_path / "idx.tsv"
    code, out, _ = run(capsys, "ingest", "--manifest", str(_manifest(tmp_path, MANIFEST)), "--out", str(out_index))
    assert code == 0 and out.strip() == "3 ok, 0 skipped"
    lines = out_index.read_text().splitlines()
    assert len(lines) == 3 and lines == sorted(lines)
    code, out, _ = run(capsys, "query", "--index", str(out_index), "--prefix", "G")
    assert code == 0 and len(out.splitlines()) == 3
    assert out.splitlines() == [l.split("\t")[0] for l in lines]
    code, out, _ = run(capsys, "query", "--index", str(out_index), "--bbox", "110.425,31.605,110.435,31.615")
    cam = [l.split("\t")[0] for l in lines if '"path":"cam.jpg"' in l]
    assert code == 0 and out.splitlines() == cam and len(cam) == 1
    assert run(capsys, "query", "--index", str(out_index), "--bbox", "1,2,3")[0] == 1
    assert run(capsys, "query", "--index", str(out_index), "--prefix", "Q")[0] == 2
    assert run(capsys, "query", "--index", str(tmp_path / "none.tsv"), "--prefix", "G")[0] == 2


def test_ingest_skips_bad_lines(tmp_path, capsys):
    m = _manifest(tmp_path, MANIFEST, ["{oops\n", '{"path": "x.tif", "timestamp": "20241340"}\n', json.dumps(MANIFEST[0]) + "\n"])
    code, out, err = run(capsys, "ingest", "--manifest", str(m), "--out", str(tmp_path / "i.tsv"), "--jobs", "2")
    assert code == 0 and out.strip() == "3 ok, 3 skipped"
    assert "line 4" in err and "line 5" in err and "line 6" in err and "duplicate" in err


def test_ingest_with_config(tmp_path, capsys):
    cfg = tmp_path / "c.ini"
    cfg.write_text("[pipeline]\nmedia_gps_level = 20\n")
    m = _manifest(tmp_path, MANIFEST[2:])
    run(capsys, "ingest", "--manifest", str(m), "--out", str(tmp_path / "i.tsv"), "--config", str(cfg))
    key = (tmp_path / "i.tsv").read_text().split("\t")[0]
    assert len(key.split("|")[0]) == 21
    cfg.write_text("[pipeline]\nnope = 1\n")
    assert run(capsys, "ingest", "--manifest", str(m), "--out", str(tmp_path / "j.tsv"), "--config", str(cfg))[0] == 2


def test_bench_deterministic(tmp_path, capsys):
    for d in ("a", "b"):
        code, _, _ = run(capsys, "bench", "--suite", "levels", "--seed", "42", "--n", "3000", "--out", str(tmp_path / d))
        assert code == 0
    a = (tmp_path / "a" / "levels.csv").read_text()
    b = (tmp_path / "b" / "levels.csv").read_text()
    assert strip_timing(a) == strip_timing(b)
    assert (tmp_path / "a" / "levels.md").exists()


def test_bench_synthesize_then_use_files(tmp_path, capsys):
    data = tmp_path / "data"
    assert run(capsys, "bench", "--synthesize", "--n", "500", "--seed", "1", "--out", str(data))[0] == 0
    assert (data / "points.csv").read_text().startswith("lon,lat\n")
    code, _, _ = run(
        capsys, "bench", "--suite", "hetero", "--manifest", str(data / "corpus.jsonl"), "--out", str(tmp_path / "r")
    )
    assert code == 0
    hetero = (tmp_path / "r" / "hetero.csv").read_text()
    assert "point,5,0.0" in hetero and "raster,5,0.0" in hetero
    code, _, _ = run(capsys, "bench", "--suite", "adaptive", "--points", str(data / "points.csv"), "--out", str(tmp_path / "r"))
    assert code == 0
    assert run(capsys, "bench", "--out", str(tmp_path / "r"))[0] == 1
    assert run(capsys, "bench", "--suite", "levels", "--points", str(tmp_path / "missing.csv"))[0] == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "gseed", "encode", "--lon", "0", "--lat", "0", "--level", "1"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout == "G0\n"
