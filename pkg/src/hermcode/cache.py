"""Binary geometry cache.

Layout, all integers little-endian::

    b"PGEO"                      magic
    u32 format_version
    u32 p, u32 h, u32 r
    u32 x (h+1)                  modulus coefficients, lowest degree first
    u64 n_points
    u64 x n_points               point encodings, ascending
    u64 x n_points               hyperplane covector encodings, by hyperplane id

The covector of hyperplane j is the coordinate vector of point j, so the two
arrays coincide; both are stored so a reader never has to know that rule.
"""

from __future__ import annotations

import os
import struct
from pathlib import Path

import numpy as np

from .errors import IntegrityError
from .field import field_build
from .geometry import Geometry, _GEOMETRIES, geometry_build

MAGIC = b"PGEO"
FORMAT_VERSION = 1


def cache_path(cache_dir: str | os.PathLike, p: int, h: int, r: int) -> Path:
    return Path(cache_dir) / f"pg_{p}_{h}_{r}.pgeo"


def encode_geometry(g: Geometry) -> bytes:
    f = g.field
    head = MAGIC + struct.pack("<4I", FORMAT_VERSION, f.p, f.h, g.r)
    head += struct.pack(f"<{f.h + 1}I", *f.modulus)
    head += struct.pack("<Q", g.n_points)
    enc = g.encodings.astype("<u8")
    powers = g.s ** np.arange(g.r, -1, -1, dtype=np.int64)
    cov = (g.coords[np.arange(g.n_hyperplanes)].astype(np.int64) @ powers).astype("<u8")
    return head + enc.tobytes() + cov.tobytes()


def save_geometry(g: Geometry, path: str | os.PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(encode_geometry(g))
    os.replace(tmp, path)
    return path


def decode_geometry(data: bytes) -> Geometry:
    if data[:4] != MAGIC:
        raise IntegrityError("not a geometry cache file")
    off = 4
    version, p, h, r = struct.unpack_from("<4I", data, off)
    off += 16
    if version != FORMAT_VERSION:
        raise IntegrityError(f"cache format {version} is not {FORMAT_VERSION}")
    modulus = struct.unpack_from(f"<{h + 1}I", data, off)
    off += 4 * (h + 1)
    (n,) = struct.unpack_from("<Q", data, off)
    off += 8
    if len(data) != off + 16 * n:
        raise IntegrityError("cache file truncated or padded")
    field = field_build(p, h)
    if tuple(modulus) != tuple(field.modulus):
        raise IntegrityError("cache modulus differs from the field's modulus")
    enc = np.frombuffer(data, dtype="<u8", count=n, offset=off).astype(np.int64)
    cov = np.frombuffer(data, dtype="<u8", count=n, offset=off + 8 * n).astype(np.int64)
    s = field.order
    if n != (s ** (r + 1) - 1) // (s - 1):
        raise IntegrityError("point count does not match PG(r, s)")
    if np.any(np.diff(enc) <= 0):
        raise IntegrityError("point encodings are not strictly ascending")
    if not np.array_equal(enc, cov):
        raise IntegrityError("hyperplane covectors do not follow point order")
    powers = s ** np.arange(r, -1, -1, dtype=np.int64)
    coords = ((enc[:, None] // powers[None, :]) % s).astype(np.int32)
    lead = (coords != 0).argmax(axis=1)
    if np.any(coords[np.arange(n), lead] != 1):
        raise IntegrityError("a stored point is not canonical")
    return Geometry(field, r, _coords=coords)


def load_geometry(path: str | os.PathLike) -> Geometry:
    return decode_geometry(Path(path).read_bytes())


def cached_geometry(cache_dir: str | os.PathLike | None, p: int, h: int, r: int) -> tuple[Geometry, bool]:
    """Geometry from the cache when present, else built and written.

    Returns ``(geometry, loaded_from_cache)``.  A loaded geometry becomes the
    memoised instance so later lookups share it.
    """
    field = field_build(p, h)
    if cache_dir is None:
        return geometry_build(field, r), False
    path = cache_path(cache_dir, p, h, r)
    if path.exists():
        key = (p, h, r)
        if key in _GEOMETRIES:
            g = _GEOMETRIES[key]
            if path.read_bytes() != encode_geometry(g):
                raise IntegrityError(f"{path} disagrees with the built geometry")
            return g, True
        g = load_geometry(path)
        _GEOMETRIES[key] = g
        return g, True
    g = geometry_build(field, r)
    save_geometry(g, path)
    return g, False
