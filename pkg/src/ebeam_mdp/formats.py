"""On-disk formats: PFM/PGM rasters, shot-list CSV, trace CSV."""

from __future__ import annotations

import csv
import io
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .model import ShotSet

SHOT_HEADER = ("id", "x", "y", "w", "h", "d", "q")


class FormatError(ValueError):
    """A file could not be parsed."""


def write_pfm(path, field: np.ndarray) -> None:
    """Grayscale little-endian PFM; row 0 of ``field`` is the bottom scanline."""
    data = np.ascontiguousarray(np.asarray(field), dtype="<f4")
    if data.ndim != 2:
        raise ValueError("PFM fields must be 2-D")
    rows, cols = data.shape
    with open(path, "wb") as fh:
        fh.write(b"Pf\n%d %d\n-1.0\n" % (cols, rows))
        fh.write(data.tobytes())


def _header_tokens(buf: bytes, count: int) -> tuple[list[bytes], int]:
    tokens, pos = [], 0
    while len(tokens) < count:
        while pos < len(buf) and buf[pos:pos + 1].isspace():
            pos += 1
        if buf[pos:pos + 1] == b"#":
            pos = buf.index(b"\n", pos)
            continue
        start = pos
        while pos < len(buf) and not buf[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise FormatError("truncated header")
        tokens.append(buf[start:pos])
    return tokens, pos + 1  # exactly one whitespace byte precedes the payload


def read_pfm(path) -> np.ndarray:
    """Read a grayscale PFM as float32, bottom scanline first."""
    buf = Path(path).read_bytes()
    try:
        (magic, cols, rows, scale), start = _header_tokens(buf, 4)
        cols, rows, scale = int(cols), int(rows), float(scale)
    except (ValueError, IndexError) as exc:
        raise FormatError(f"{path}: bad PFM header") from exc
    if magic != b"Pf":
        raise FormatError(f"{path}: not a grayscale PFM (magic {magic!r})")
    dtype = "<f4" if scale < 0 else ">f4"
    payload = buf[start:start + 4 * rows * cols]
    if len(payload) != 4 * rows * cols:
        raise FormatError(f"{path}: truncated PFM payload")
    return np.frombuffer(payload, dtype=dtype).reshape(rows, cols).astype(np.float32)


def heatmap_bytes(field: np.ndarray) -> np.ndarray:
    """Min-max normalize to 0..255; a constant field maps to 0."""
    f = np.asarray(field, dtype=np.float64)
    lo, hi = float(f.min()), float(f.max())
    if hi <= lo:
        return np.zeros(f.shape, dtype=np.uint8)
    return np.rint((f - lo) / (hi - lo) * 255.0).astype(np.uint8)


def write_pgm(path, field: np.ndarray) -> None:
    """8-bit P5 heatmap, flipped so that y increases upward in viewers."""
    img = np.flipud(heatmap_bytes(field))
    rows, cols = img.shape
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (cols, rows))
        fh.write(np.ascontiguousarray(img).tobytes())


def read_pgm(path) -> np.ndarray:
    """Read a P5 PGM as floats in [0, 1], bottom row first."""
    buf = Path(path).read_bytes()
    try:
        (magic, cols, rows, maxval), start = _header_tokens(buf, 4)
        cols, rows, maxval = int(cols), int(rows), int(maxval)
    except (ValueError, IndexError) as exc:
        raise FormatError(f"{path}: bad PGM header") from exc
    if magic != b"P5":
        raise FormatError(f"{path}: not a binary PGM (magic {magic!r})")
    dtype = np.uint8 if maxval < 256 else ">u2"
    n = rows * cols * np.dtype(dtype).itemsize
    payload = buf[start:start + n]
    if len(payload) != n:
        raise FormatError(f"{path}: truncated PGM payload")
    img = np.frombuffer(payload, dtype=dtype).reshape(rows, cols)
    return np.flipud(img).astype(np.float64) / maxval


def read_raster(path) -> np.ndarray:
    """PFM or PGM by extension, as float64."""
    suffix = Path(path).suffix.lower()
    if suffix == ".pfm":
        return read_pfm(path).astype(np.float64)
    if suffix == ".pgm":
        return read_pgm(path)
    raise FormatError(f"{path}: unsupported raster extension {suffix!r}")


def _fmt_number(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def write_shots(path, shots: ShotSet) -> None:
    """Shot list CSV ``id,x,y,w,h,d,q``; integral values are written as integers."""
    with open(path, "w", newline="") as fh:
        fh.write(shots_to_csv(shots))


def shots_to_csv(shots: ShotSet) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(SHOT_HEADER)
    for k, s in enumerate(shots):
        writer.writerow([k] + [_fmt_number(v) for v in s.as_tuple()])
    return out.getvalue()


def read_shots(path, grid: int) -> ShotSet:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError(f"{path}: empty shot file") from None
        if tuple(h.strip() for h in header) != SHOT_HEADER:
            raise FormatError(f"{path}: expected header {','.join(SHOT_HEADER)}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(SHOT_HEADER):
                raise FormatError(f"{path}:{lineno}: expected {len(SHOT_HEADER)} columns")
            try:
                values = [float(v) for v in row[1:]]
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: {exc}") from exc
            if not all(math.isfinite(v) for v in values):
                raise FormatError(f"{path}:{lineno}: non-finite value")
            rows.append(values)
    return ShotSet.from_tuples(rows, grid)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence[str]]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
