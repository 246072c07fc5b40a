"""Differentiable optical stage for MDP-based ILT.

Stand-in imaging: the developed mask is reduced 4x to wafer scale, blurred
by a unit-mass Gaussian (periodic boundary), and printed through a logistic
resist at three dose corners realized as threshold shifts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.fft
from scipy.ndimage import gaussian_filter
from scipy.special import expit

from .model import OlParams

CORNER_SHIFTS = {"inner": 1.0, "nominal": 0.0, "outer": -1.0}


@dataclass(frozen=True)
class CornerSet:
    inner: np.ndarray
    nominal: np.ndarray
    outer: np.ndarray

    def as_dict(self) -> dict[str, np.ndarray]:
        return {"inner": self.inner, "nominal": self.nominal, "outer": self.outer}


@dataclass(frozen=True)
class OpticalState:
    """Forward intermediates kept for the backward pass."""

    reduced: np.ndarray
    aerial: np.ndarray
    corners: CornerSet


def cdr_retarget(target: np.ndarray, sigma_cdr: float) -> np.ndarray:
    """Round corners of a binary target: Gaussian blur then threshold at 0.5.

    ``sigma_cdr`` uses the ``exp(-r**2 / sigma**2)`` convention; 0 is the identity.
    """
    target = np.asarray(target, dtype=np.float64)
    if sigma_cdr < 0:
        raise ValueError("sigma_cdr must be nonnegative")
    if sigma_cdr == 0:
        return target.copy()
    blurred = gaussian_filter(target, sigma=sigma_cdr / math.sqrt(2.0), mode="constant",
                              truncate=6.0)
    return (blurred > 0.5).astype(np.float64)


def magnify_4x(wafer_target: np.ndarray, factor: int = 4) -> np.ndarray:
    """Replicate each pixel into a ``factor`` x ``factor`` block."""
    block = np.ones((factor, factor))
    return np.kron(np.asarray(wafer_target, dtype=np.float64), block)


def reduce_4x(mask_level: np.ndarray, factor: int = 4) -> np.ndarray:
    """Block average; both sides must be divisible by ``factor``."""
    a = np.asarray(mask_level, dtype=np.float64)
    rows, cols = a.shape
    if rows % factor or cols % factor:
        raise ValueError(f"field shape {a.shape} is not divisible by {factor}")
    return a.reshape(rows // factor, factor, cols // factor, factor).mean(axis=(1, 3))


def reduce_4x_adjoint(upstream: np.ndarray, factor: int = 4) -> np.ndarray:
    """Spread each wafer-pixel gradient uniformly over its source block."""
    return magnify_4x(upstream, factor) / factor**2


class OpticalModel:
    """Aerial blur and corner prints on a fixed ``wafer_grid``."""

    def __init__(self, ol: OlParams, wafer_grid: int, workers: int | None = None):
        self.ol = ol
        self.wafer_grid = int(wafer_grid)
        self.workers = workers
        n = self.wafer_grid
        off = np.arange(n, dtype=np.float64)
        off = np.minimum(off, n - off)
        kernel = np.exp(-(off[:, None] ** 2 + off[None, :] ** 2) / ol.sigma_o**2)
        self.kernel = kernel / kernel.sum()
        self._spectrum = scipy.fft.rfft2(self.kernel, workers=workers)

    def blur(self, field: np.ndarray, adjoint: bool = False) -> np.ndarray:
        n = self.wafer_grid
        spec = scipy.fft.rfft2(field, workers=self.workers)
        spec *= np.conj(self._spectrum) if adjoint else self._spectrum
        return scipy.fft.irfft2(spec, s=(n, n), workers=self.workers)

    def thresholds(self) -> dict[str, float]:
        ol = self.ol
        return {c: ol.i_th * (1.0 + s * ol.dose_delta) for c, s in CORNER_SHIFTS.items()}

    def forward(self, z_e_mask: np.ndarray) -> OpticalState:
        """Mask-level developed pattern -> corner prints at wafer scale."""
        reduced = reduce_4x(z_e_mask, self.ol.reduction)
        if reduced.shape != (self.wafer_grid, self.wafer_grid):
            raise ValueError(f"mask grid {np.shape(z_e_mask)} does not reduce to wafer grid "
                             f"{self.wafer_grid}")
        aerial = self.blur(reduced)
        return OpticalState(reduced, aerial, self.print_aerial(aerial))

    def print_aerial(self, aerial: np.ndarray) -> CornerSet:
        th = self.thresholds()
        theta = self.ol.theta_p
        return CornerSet(**{c: expit(theta * (aerial - t)) for c, t in th.items()})

    def backward(self, upstream: dict[str, np.ndarray], state: OpticalState) -> np.ndarray:
        """dL/dZ_e at mask level from per-corner dL/dZ_p (missing corners are zero)."""
        theta = self.ol.theta_p
        d_aerial = np.zeros_like(state.aerial)
        for name, z in state.corners.as_dict().items():
            g = upstream.get(name)
            if g is not None:
                d_aerial += g * theta * z * (1.0 - z)
        return reduce_4x_adjoint(self.blur(d_aerial, adjoint=True), self.ol.reduction)


def print_corners(z_e_reduced: np.ndarray, ol: OlParams) -> CornerSet:
    """Corner prints of a wafer-scale developed pattern."""
    model = OpticalModel(ol, np.shape(z_e_reduced)[0])
    return model.print_aerial(model.blur(np.asarray(z_e_reduced, dtype=np.float64)))


def backprop_print(upstream: dict[str, np.ndarray], state: OpticalState,
                   ol: OlParams) -> np.ndarray:
    return OpticalModel(ol, state.aerial.shape[0]).backward(upstream, state)
