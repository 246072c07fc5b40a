"""Domain types shared by every stage: shots, bounds and model constants.

Raster fields are plain ``numpy`` float arrays of shape ``(M, M)`` indexed
``field[row, col]`` where the row is the y pixel and the column is the x pixel.
Pixel ``(i, j)`` samples the continuous field at ``(i + 0.5, j + 0.5)``.
"""

from __future__ import annotations

import math
from dataclasses import astuple, dataclass, field
from typing import Iterable, Sequence

import numpy as np

# Column order of the (N, 6) shot parameter arrays used throughout.
SHOT_FIELDS = ("x", "y", "w", "h", "d", "q")
X, Y, W, H, D, Q = range(6)


class ValidationError(ValueError):
    """A configuration value violates a model invariant."""


@dataclass(frozen=True)
class Shot:
    x: float
    y: float
    w: float
    h: float
    d: float = 1.0
    q: float = 1.0

    def as_tuple(self) -> tuple[float, ...]:
        return astuple(self)


@dataclass(frozen=True)
class ShotSet:
    """Ordered shots on an ``grid_size`` x ``grid_size`` pixel grid.

    The index of a shot in ``shots`` is its identity for gradients and traces.
    """

    shots: tuple[Shot, ...]
    grid_size: int

    def __post_init__(self):
        object.__setattr__(self, "shots", tuple(self.shots))

    def __len__(self) -> int:
        return len(self.shots)

    def __iter__(self):
        return iter(self.shots)

    def __getitem__(self, k: int) -> Shot:
        return self.shots[k]

    def as_array(self) -> np.ndarray:
        """Return an ``(N, 6)`` float64 array with columns ``SHOT_FIELDS``."""
        if not self.shots:
            return np.zeros((0, 6))
        return np.array([s.as_tuple() for s in self.shots], dtype=np.float64)

    @classmethod
    def from_array(cls, params: np.ndarray, grid_size: int) -> "ShotSet":
        params = np.asarray(params, dtype=np.float64).reshape(-1, 6)
        return cls(tuple(Shot(*map(float, row)) for row in params), int(grid_size))

    @classmethod
    def from_tuples(cls, rows: Iterable[Sequence[float]], grid_size: int) -> "ShotSet":
        return cls(tuple(Shot(*map(float, r)) for r in rows), int(grid_size))


@dataclass(frozen=True)
class ShotBounds:
    w_min: int = 1
    w_max: int = 64
    h_min: int = 1
    h_max: int = 64
    d_min: float = 0.5
    d_max: float = 2.0

    def validate(self) -> "ShotBounds":
        if self.w_min < 1:
            raise ValidationError("w_min must be at least 1")
        if self.w_max < self.w_min:
            raise ValidationError("w_max must be >= w_min")
        if self.h_min < 1:
            raise ValidationError("h_min must be at least 1")
        if self.h_max < self.h_min:
            raise ValidationError("h_max must be >= h_min")
        if not self.d_min >= 0:
            raise ValidationError("d_min must be nonnegative")
        if not self.d_max >= self.d_min:
            raise ValidationError("d_max must be >= d_min")
        return self


@dataclass(frozen=True)
class EblParams:
    """Double-Gaussian e-beam model.

    Lengths are in pixels. Gaussians follow the ``exp(-r**2 / sigma**2)``
    convention, so ``sigma`` is sqrt(2) times the standard deviation.
    """

    sigma_f: float = 3.0
    sigma_b: float = 30.0
    eta: float = 0.8
    theta_z: float = 50.0
    e_th: float = 0.5

    @property
    def w_f(self) -> float:
        return 1.0 / (1.0 + self.eta)

    @property
    def w_b(self) -> float:
        return self.eta / (1.0 + self.eta)

    def components(self) -> tuple[tuple[float, float], ...]:
        """(weight, sigma) pairs of the forward and backward scattering terms."""
        return ((self.w_f, self.sigma_f), (self.w_b, self.sigma_b))

    def validate(self) -> "EblParams":
        for name in ("sigma_f", "sigma_b", "eta", "theta_z", "e_th"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(f"{name} must be finite")
        if self.sigma_f <= 0:
            raise ValidationError("sigma_f must be positive")
        if self.sigma_b <= 0:
            raise ValidationError("sigma_b must be positive")
        if self.sigma_b <= self.sigma_f:
            raise ValidationError("sigma_b must exceed sigma_f")
        if self.eta < 0:
            raise ValidationError("eta must be nonnegative")
        if self.theta_z <= 0:
            raise ValidationError("theta_z must be positive")
        return self


@dataclass(frozen=True)
class OlParams:
    """Optical stage stand-in: Gaussian aerial blur and sigmoid print."""

    sigma_o: float = 2.0
    theta_p: float = 50.0
    i_th: float = 0.5
    dose_delta: float = 0.05
    reduction: int = 4

    def validate(self) -> "OlParams":
        if not (math.isfinite(self.sigma_o) and self.sigma_o > 0):
            raise ValidationError("sigma_o must be positive")
        if not (math.isfinite(self.theta_p) and self.theta_p > 0):
            raise ValidationError("theta_p must be positive")
        if not 0 <= self.dose_delta < 1:
            raise ValidationError("dose_delta must lie in [0, 1)")
        if self.reduction != 4:
            raise ValidationError("reduction must be 4")
        if not (self.i_th * (1 - self.dose_delta) > 0 and self.i_th * (1 + self.dose_delta) > 0):
            raise ValidationError("corner thresholds i_th*(1 +/- dose_delta) must be positive")
        return self


@dataclass(frozen=True)
class LossWeights:
    alpha: float = 1.0
    beta: float = 1.0
    gamma: float = 1e-2
    delta: float = 1e-6
    epsilon: float = 1e-3

    def validate(self) -> "LossWeights":
        for name in ("alpha", "beta", "gamma", "delta", "epsilon"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValidationError(f"{name} must be finite")
            if v < 0:
                raise ValidationError(f"{name} must be nonnegative")
        return self


@dataclass(frozen=True)
class ModelConfig:
    ebl: EblParams = field(default_factory=EblParams)
    bounds: ShotBounds = field(default_factory=ShotBounds)
    grid: int = 512


def validate_params(ebl: EblParams, bounds: ShotBounds, grid: int) -> ModelConfig:
    """Check all model invariants; raise ``ValidationError`` naming the first violation."""
    ebl.validate()
    bounds.validate()
    if int(grid) != grid or grid < 1:
        raise ValidationError("grid must be a positive integer")
    return ModelConfig(ebl=ebl, bounds=bounds, grid=int(grid))


def check_field(values: np.ndarray, name: str = "field") -> np.ndarray:
    """Return ``values`` as a finite 2-D float64 array or raise ``ValueError``."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def same_shape(a: np.ndarray, b: np.ndarray, what: str = "fields") -> None:
    if np.shape(a) != np.shape(b):
        raise ValueError(f"dimension mismatch between {what}: {np.shape(a)} vs {np.shape(b)}")


def as_params(shots, grid: int | None = None) -> tuple[np.ndarray, int]:
    """Normalize a ``ShotSet`` or an ``(N, 6)`` array to ``(params, grid)``."""
    if isinstance(shots, ShotSet):
        return shots.as_array(), shots.grid_size if grid is None else int(grid)
    if grid is None:
        raise ValueError("grid size is required when shots are given as an array")
    return np.asarray(shots, dtype=np.float64).reshape(-1, 6), int(grid)


def pixel_centers(n: int) -> np.ndarray:
    return np.arange(n, dtype=np.float64) + 0.5
