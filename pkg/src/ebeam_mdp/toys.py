"""Committed desk-scale toy problems used by tests, scripts and the CLI."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .fracture import fracture
from .model import EblParams, OlParams, ShotBounds, ShotSet
from .optical import magnify_4x
from .optimize import OptConfig

MDP_GRID = 128
WAFER_GRID = 64

# the 4x reduction adjoint shrinks ILT gradients, so ILT takes larger steps
ILT_LR = 0.2


def rectangle_target(grid: int = MDP_GRID) -> np.ndarray:
    t = np.zeros((grid, grid))
    t[48:80, 40:88] = 1.0
    return t


def l_shape_target(grid: int = MDP_GRID) -> np.ndarray:
    t = np.zeros((grid, grid))
    t[32:48, 32:96] = 1.0
    t[32:96, 32:48] = 1.0
    return t


def cross_target(grid: int = WAFER_GRID) -> np.ndarray:
    t = np.zeros((grid, grid))
    t[26:38, 12:52] = 1.0
    t[12:52, 26:38] = 1.0
    return t


def perturbed_init(mask: np.ndarray, bounds: ShotBounds, seed: int = 0,
                   amplitude: int = 3) -> ShotSet:
    """Fracture ``mask`` then jitter every shot's x, y, w, h by up to ``amplitude`` px."""
    shots = fracture(mask, bounds)
    params = shots.as_array()
    rng = np.random.default_rng(seed)
    params[:, :4] += rng.integers(-amplitude, amplitude + 1, size=params[:, :4].shape)
    params[:, 2:4] = np.maximum(params[:, 2:4], 1.0)
    return ShotSet.from_array(params, shots.grid_size)


@dataclass(frozen=True)
class ToyCase:
    name: str
    mode: str
    target: np.ndarray
    init: ShotSet
    ebl: EblParams
    bounds: ShotBounds
    cfg: OptConfig
    ol: OlParams | None = None


def toy_case(name: str, seed: int = 0) -> ToyCase:
    ebl, bounds = EblParams(), ShotBounds()
    base = OptConfig(seed=seed)
    if name == "rectangle":
        t = rectangle_target()
        return ToyCase(name, "mdp", t, perturbed_init(t, bounds, seed), ebl, bounds,
                       replace(base, epochs=200))
    if name == "l_shape":
        t = l_shape_target()
        return ToyCase(name, "mdp", t, perturbed_init(t, bounds, seed), ebl, bounds,
                       replace(base, epochs=200))
    if name == "cross":
        t = cross_target()
        return ToyCase(name, "ilt", t, perturbed_init(magnify_4x(t), bounds, seed), ebl,
                       bounds, replace(base, epochs=300, mode="ilt", lr=ILT_LR), OlParams())
    raise KeyError(f"unknown toy case {name!r}")


TOY_NAMES = ("rectangle", "l_shape", "cross")
