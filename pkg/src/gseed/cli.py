"""``gseed`` command line: encode, decode, cover, ingest, query and bench.

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from . import bench, geosot, synth
from .config import DEFAULT_CONFIG, load_config
from .errors import GSeedError, ParseError
from .geometry import Geometry, cover_geometry
from .index import IndexStore
from .manifest import (
    ManifestError,
    corpus_from_items,
    corpus_items,
    read_manifest,
    read_points,
    write_manifest,
    write_points,
)
from .pipeline import detect_type, encode_batch

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2
SUITES = ("levels", "adaptive", "hetero", "compare")
DEFAULT_POINTS = 20_000
COMPARE_HALF_WIDTH = 0.01  # degrees around the cloud origin for the coverage box


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse exits with 2 by default
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fmt(x: float) -> str:
    return repr(float(x))


def cmd_encode(args: argparse.Namespace) -> int:
    print(geosot.encode(args.lon, args.lat, args.level))
    return EXIT_OK


def cmd_decode(args: argparse.Namespace) -> int:
    cell = geosot.from_string(args.code)
    cb = geosot.geo_bounds(cell)
    c = geosot.cell_center(cell)
    print(f"level {cell.level}")
    print(f"lon [{_fmt(cb.lon_min)}, {_fmt(cb.lon_max)}]")
    print(f"lat [{_fmt(cb.lat_min)}, {_fmt(cb.lat_max)}]")
    print(f"center {_fmt(c.lon)} {_fmt(c.lat)}")
    return EXIT_OK


def _read_geometry(path: Path) -> Geometry:
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON: {exc.msg}") from None
    if isinstance(obj, dict) and obj.get("type") == "Feature":
        obj = obj.get("geometry")
    return Geometry.from_geojson(obj)


def cmd_cover(args: argparse.Namespace) -> int:
    cells = cover_geometry(_read_geometry(args.geometry_file), args.level, args.cap)
    for s in cells.strings():
        print(s)
    return EXIT_OK


def cmd_ingest(args: argparse.Namespace) -> int:
    config = load_config(args.config) if args.config else DEFAULT_CONFIG
    lines: list[int] = []
    items = []
    skipped = 0
    for lineno, entry in read_manifest(args.manifest):
        if isinstance(entry, ManifestError):
            print(f"{args.manifest}: {entry}", file=sys.stderr)
            skipped += 1
        else:
            lines.append(lineno)
            items.append(entry)
    store = IndexStore()
    for lineno, result in zip(lines, encode_batch(items, config, args.jobs)):
        try:
            if isinstance(result, GSeedError):
                raise result
            store.insert(result)
        except GSeedError as exc:
            print(f"{args.manifest}: line {lineno}: {exc}", file=sys.stderr)
            skipped += 1
    store.save(args.out)
    print(f"{len(store)} ok, {skipped} skipped")
    return EXIT_OK


def _parse_box(text: str) -> tuple[float, float, float, float]:
    try:
        parts = [float(p) for p in text.split(",")]
    except ValueError:
        raise UsageError(f"--bbox needs four numbers w,s,e,n, got {text!r}") from None
    if len(parts) != 4:
        raise UsageError(f"--bbox needs four numbers w,s,e,n, got {text!r}")
    return parts[0], parts[1], parts[2], parts[3]


def cmd_query(args: argparse.Namespace) -> int:
    store = IndexStore.load(args.index)
    if args.prefix is not None:
        hits = store.prefix_query(args.prefix)
    else:
        hits = store.bbox_query(_parse_box(args.bbox), args.level)
    for r in hits:
        print(r.key)
    return EXIT_OK


def _synthesize(out: Path, n: int, seed: int) -> None:
    out.mkdir(parents=True, exist_ok=True)
    write_points(out / "points.csv", synth.clustered_points(n, seed))
    write_manifest(out / "corpus.jsonl", corpus_items(synth.hetero_corpus(seed)))
    print(f"wrote {out / 'points.csv'} ({n} points) and {out / 'corpus.jsonl'}")


def _hetero_files(args: argparse.Namespace) -> list[synth.CorpusFile]:
    if args.manifest is None:
        return synth.hetero_corpus(args.seed)
    items = []
    for _, entry in read_manifest(args.manifest):
        if isinstance(entry, ManifestError):
            print(f"{args.manifest}: {entry}", file=sys.stderr)
        else:
            items.append(entry)
    return corpus_from_items(items, detect_type)


def cmd_bench(args: argparse.Namespace) -> int:
    if args.synthesize:
        _synthesize(args.out, args.n, args.seed)
        return EXIT_OK
    if args.suite is None:
        raise UsageError("--suite is required unless --synthesize is given")
    suites = SUITES if args.suite == "all" else (args.suite,)
    needs_points = {"levels", "compare"} & set(suites)
    points = None
    if args.points is not None:
        points = read_points(args.points)
    elif needs_points:
        points = synth.clustered_points(args.n, args.seed)
    for suite in suites:
        if suite == "levels":
            report = bench.run_level_sweep(points, seed=args.seed)
        elif suite == "adaptive":
            cloud = points if args.points is not None else synth.cloud_with_area(2.1, args.n, args.seed)
            report = bench.run_adaptive(cloud, seed=args.seed)
        elif suite == "hetero":
            report = bench.run_heterogeneous(_hetero_files(args), seed=args.seed, jobs=args.jobs)
        else:
            x0, y0 = synth.DEFAULT_ORIGIN
            h = COMPARE_HALF_WIDTH
            report = bench.run_comparison(points, (x0 - h, y0 - h, x0 + h, y0 + h), seed=args.seed)
        csv_path, md_path = report.write(args.out)
        print(f"{suite}: wrote {csv_path} and {md_path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gseed", description="GeoSOT spatio-temporal encoding toolkit")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("encode", help="encode a coordinate at a level")
    p.add_argument("--lon", type=float, required=True)
    p.add_argument("--lat", type=float, required=True)
    p.add_argument("--level", type=int, required=True)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="print a cell's bounds and center")
    p.add_argument("--code", required=True)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("cover", help="list the cells covering a GeoJSON geometry")
    p.add_argument("--geometry-file", type=Path, required=True)
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--cap", type=int, default=1_000_000, help="maximum estimated cell count")
    p.set_defaults(func=cmd_cover)

    p = sub.add_parser("ingest", help="encode a JSON Lines manifest into an index file")
    p.add_argument("--manifest", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--config", type=Path)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("query", help="prefix or bbox query against an index file")
    p.add_argument("--index", type=Path, required=True)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--prefix")
    g.add_argument("--bbox", help="w,s,e,n in degrees")
    p.add_argument("--level", type=int, help="query cell level for --bbox (default: by box area)")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("bench", help="run benchmark suites and write CSV + markdown reports")
    p.add_argument("--suite", choices=(*SUITES, "all"))
    p.add_argument("--points", type=Path, help="CSV with a lon,lat header (default: synthetic)")
    p.add_argument("--manifest", type=Path, help="corpus manifest for the hetero suite")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--n", type=int, default=DEFAULT_POINTS, help="synthetic point count")
    p.add_argument("--out", type=Path, default=Path("reports"))
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--synthesize", action="store_true", help="write points.csv and corpus.jsonl to --out")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"gseed: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (GSeedError, OSError) as exc:
        print(f"gseed: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
