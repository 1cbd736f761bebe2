"""GeoSOT spatio-temporal encoding: cell codes, coverage, composite keys,
a prefix index, a Geohash baseline and benchmark suites."""

from .geosot import CellCode, GeoCoord, cell_center, cell_extent, decode, encode, geo_bounds
from .geometry import CoverSet, Geometry, cover_geometry
from .index import IndexStore
from .keys import CompositeKey, Timestamp, TypeCode, build_pk, parse_pk
from .pipeline import IngestMeta, RecordEntry, encode_record

__all__ = [
    "CellCode",
    "CompositeKey",
    "CoverSet",
    "GeoCoord",
    "Geometry",
    "IndexStore",
    "IngestMeta",
    "RecordEntry",
    "Timestamp",
    "TypeCode",
    "build_pk",
    "cell_center",
    "cell_extent",
    "cover_geometry",
    "decode",
    "encode",
    "encode_record",
    "geo_bounds",
    "parse_pk",
]
