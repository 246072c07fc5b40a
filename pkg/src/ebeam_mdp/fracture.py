"""Coarse initial shots: exact non-overlapping rectangle cover of a binary mask.

Rows are scanned for maximal runs of set pixels; runs with identical extent
in consecutive rows merge into one rectangle. Rectangles larger than the shot
bounds are then cut into a near-uniform grid of compliant pieces.
"""

from __future__ import annotations

import math

import numpy as np

from .model import ShotBounds, ShotSet, as_params


class FractureError(ValueError):
    """The mask contains a feature that no in-bounds shot can cover exactly."""


def _row_runs(row: np.ndarray) -> list[tuple[int, int]]:
    padded = np.concatenate(([False], row, [False]))
    edges = np.flatnonzero(padded[1:] != padded[:-1])
    return list(zip(edges[0::2].tolist(), edges[1::2].tolist()))


def _split(start: int, length: int, max_len: int) -> list[tuple[int, int]]:
    pieces = math.ceil(length / max_len)
    base, extra = divmod(length, pieces)
    out, pos = [], start
    for i in range(pieces):
        size = base + (1 if i < extra else 0)
        out.append((pos, size))
        pos += size
    return out


def maximal_rectangles(mask: np.ndarray) -> list[tuple[int, int, int, int]]:
    """Slab decomposition into ``(x, y, w, h)`` rectangles, ordered by (y, x)."""
    mask = np.asarray(mask, dtype=bool)
    done: list[tuple[int, int, int, int]] = []
    open_rects: dict[tuple[int, int], int] = {}  # (x0, x1) -> starting row
    for y in range(mask.shape[0] + 1):
        runs = set(_row_runs(mask[y])) if y < mask.shape[0] else set()
        for run in list(open_rects):
            if run not in runs:
                y0 = open_rects.pop(run)
                done.append((run[0], y0, run[1] - run[0], y - y0))
        for run in runs:
            open_rects.setdefault(run, y)
    return sorted(done, key=lambda r: (r[1], r[0], r[3], r[2]))


def fracture(mask: np.ndarray, bounds: ShotBounds = ShotBounds(),
             default_dose: float | None = None) -> ShotSet:
    """Cover the true pixels of a square mask with active, non-overlapping shots."""
    mask = np.asarray(mask, dtype=bool)
    if mask.ndim != 2 or mask.shape[0] != mask.shape[1] or mask.size == 0:
        raise ValueError("mask must be a nonempty square 2-D array")
    if default_dose is None:
        default_dose = 0.5 * (bounds.d_min + bounds.d_max)
    rows = []
    for x, y, w, h in maximal_rectangles(mask):
        if w < bounds.w_min or h < bounds.h_min:
            raise FractureError(
                f"feature at x={x}, y={y} of size {w}x{h} is thinner than the minimum shot "
                f"size {bounds.w_min}x{bounds.h_min}")
        for py, ph in _split(y, h, bounds.h_max):
            for px, pw in _split(x, w, bounds.w_max):
                if pw < bounds.w_min or ph < bounds.h_min:
                    raise FractureError(
                        f"cannot split {w}x{h} rectangle at x={x}, y={y} within shot bounds")
                rows.append((px, py, pw, ph, default_dose, 1.0))
    return ShotSet.from_tuples(rows, mask.shape[0])


def rasterize(shots, grid: int | None = None) -> np.ndarray:
    """Boolean coverage of active shots with integer geometry."""
    params, grid = as_params(shots, grid)
    out = np.zeros((grid, grid), dtype=bool)
    for x, y, w, h, _, q in params:
        if q < 0.5:
            continue
        x0, y0 = max(int(x), 0), max(int(y), 0)
        out[y0:max(int(y + h), 0), x0:max(int(x + w), 0)] = True
    return out
