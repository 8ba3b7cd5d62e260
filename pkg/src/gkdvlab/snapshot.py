"""GKDV1 binary snapshot format.

Layout (little-endian)::

    b"GKDV" 0x01 | u32 M | f64 period | u8 flags | M x (f64 re, f64 im)

flags: bit0 real, bit1 mean-zero.  Coefficients are in FFT order.
"""

from __future__ import annotations

import os
import struct
from pathlib import Path

import numpy as np

from .spectral import SpectralField, TorusGrid

MAGIC = b"GKDV"
VERSION = 1
_HEADER = struct.Struct("<4sBIdB")


class SnapshotFormatError(ValueError):
    pass


def encode(field: SpectralField) -> bytes:
    flags = (1 if field.real else 0) | (2 if field.mean_zero else 0)
    head = _HEADER.pack(MAGIC, VERSION, field.grid.modes, field.grid.period, flags)
    body = np.empty((field.grid.modes, 2), dtype="<f8")
    body[:, 0] = field.coeffs.real
    body[:, 1] = field.coeffs.imag
    return head + body.tobytes()


def decode(data: bytes) -> SpectralField:
    fields, rest = _decode_one(memoryview(data))
    if len(rest):
        raise SnapshotFormatError(f"{len(rest)} trailing bytes after snapshot")
    return fields


def _decode_one(buf):
    if len(buf) < _HEADER.size:
        raise SnapshotFormatError("truncated header")
    magic, version, M, period, flags = _HEADER.unpack_from(buf)
    if magic != MAGIC:
        raise SnapshotFormatError(f"bad magic {bytes(magic)!r}")
    if version != VERSION:
        raise SnapshotFormatError(f"unsupported version {version}")
    need = _HEADER.size + 16 * M
    if len(buf) < need:
        raise SnapshotFormatError("truncated coefficient block")
    arr = np.frombuffer(buf[_HEADER.size:need], dtype="<f8").reshape(M, 2)
    c = arr[:, 0] + 1j * arr[:, 1]
    field = SpectralField(TorusGrid(period, M), c, real=bool(flags & 1), mean_zero=bool(flags & 2))
    return field, buf[need:]


def decode_stream(data: bytes) -> list[SpectralField]:
    """Decode a concatenation of snapshots (a trajectory export)."""
    out = []
    buf = memoryview(data)
    while len(buf):
        f, buf = _decode_one(buf)
        out.append(f)
    return out


def write(path, fields) -> None:
    """Write one snapshot or a sequence of them; the file appears atomically."""
    if isinstance(fields, SpectralField):
        fields = [fields]
    path = Path(path)
    tmp = path.with_name(path.name + ".part")
    with open(tmp, "wb") as fh:
        for f in fields:
            fh.write(encode(f))
    os.replace(tmp, path)


def read(path) -> list[SpectralField]:
    return decode_stream(Path(path).read_bytes())


def to_csv_rows(field: SpectralField):
    """Rows (wavenumber, xi, re, im) in FFT order."""
    g = field.grid
    for k, xi, c in zip(g.wavenumbers, g.frequencies, field.coeffs):
        yield int(k), float(xi), float(c.real), float(c.imag)
