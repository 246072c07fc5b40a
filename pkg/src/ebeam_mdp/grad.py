"""Analytic shot-parameter gradients and straight-through projection.

Shot parameters travel as ``(N, 6)`` arrays with columns ``x, y, w, h, d, q``;
gradients use the same layout.
"""

from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

from .exact import axis_windows, shot_profiles, total_energy
from .model import D, H, Q, W, X, Y, EblParams, Shot, ShotBounds, ShotSet, as_params, pixel_centers
from .special import delta_g, g_sigma


def energy_grad_fields(shot: Shot, ebl: EblParams, grid: int) -> dict[str, np.ndarray]:
    """Dense dE/d(param) fields of one shot, keyed by parameter name.

    The q derivative uses the continuous relaxation, i.e. the shot's energy
    without the q factor.
    """
    c = pixel_centers(grid)
    p = shot_profiles(shot, ebl, grid)
    dq = shot.d * shot.q
    out = {k: np.zeros((grid, grid)) for k in ("x", "y", "w", "h", "d", "q")}
    for weight, sigma, fx, fy in ((ebl.w_f, ebl.sigma_f, p.fx_f, p.fy_f),
                                  (ebl.w_b, ebl.sigma_b, p.fx_b, p.fy_b)):
        out["x"] += weight * dq * np.outer(fy, delta_g(c, shot.x, shot.w, sigma))
        out["w"] += weight * dq * np.outer(fy, g_sigma(c, shot.x + shot.w, sigma))
        out["y"] += weight * dq * np.outer(delta_g(c, shot.y, shot.h, sigma), fx)
        out["h"] += weight * dq * np.outer(g_sigma(c, shot.y + shot.h, sigma), fx)
        window = weight * np.outer(fy, fx)
        out["d"] += shot.q * window
        out["q"] += shot.d * window
    return out


def separable_vjp(upstream: np.ndarray, params: np.ndarray,
                  components: Sequence[tuple[float, float]], grid: int) -> np.ndarray:
    """Contract ``upstream`` against dF/d(param) for a sum of separable windows.

    ``F = sum_k d_k q_k sum_c weight_c * Wy_c(y; y_k, h_k) * Wx_c(x; x_k, w_k)``
    with erf windows of range ``sigma_c``. Returns ``(N, 6)``.
    """
    params = np.asarray(params, dtype=np.float64).reshape(-1, 6)
    grads = np.zeros_like(params)
    if len(params) == 0:
        return grads
    u = np.asarray(upstream, dtype=np.float64)
    c = pixel_centers(grid)
    x, y, w, h, d, q = params.T
    for weight, sigma in components:
        fx, fy = axis_windows(params, sigma, grid)
        ux = fx @ u.T  # (N, rows): sum over columns of U weighted by the x window
        uy = fy @ u    # (N, cols)
        gx_right = g_sigma(c[None, :], (x + w)[:, None], sigma)
        gy_right = g_sigma(c[None, :], (y + h)[:, None], sigma)
        dgx = gx_right - g_sigma(c[None, :], x[:, None], sigma)
        dgy = gy_right - g_sigma(c[None, :], y[:, None], sigma)
        base = np.einsum("kj,kj->k", fy, ux)
        scale = weight * d * q
        grads[:, X] += scale * np.einsum("ki,ki->k", uy, dgx)
        grads[:, W] += scale * np.einsum("ki,ki->k", uy, gx_right)
        grads[:, Y] += scale * np.einsum("kj,kj->k", ux, dgy)
        grads[:, H] += scale * np.einsum("kj,kj->k", ux, gy_right)
        grads[:, D] += weight * q * base
        grads[:, Q] += weight * d * base
    return grads


def adjoint_accumulate(upstream: np.ndarray, shots, ebl: EblParams,
                       grid: int | None = None) -> np.ndarray:
    """Shot gradients ``sum_xy upstream * dE/d(param)`` for the exact model."""
    params, grid = as_params(shots, grid)
    if np.shape(upstream) != (grid, grid):
        raise ValueError(f"upstream shape {np.shape(upstream)} does not match grid {grid}")
    return separable_vjp(upstream, params, ebl.components(), grid)


def backprop_resist(upstream: np.ndarray, z_e: np.ndarray, ebl: EblParams) -> np.ndarray:
    """dL/dE from dL/dZ_e through the logistic resist."""
    z_e = np.asarray(z_e, dtype=np.float64)
    return np.asarray(upstream) * ebl.theta_z * z_e * (1.0 - z_e)


class Projection(NamedTuple):
    """Projected shots plus a mask of which entries were changed by clamping.

    Rounding, clamping and binarization all pass gradients straight through,
    so ``clamped`` is diagnostic only.
    """

    shots: ShotSet
    clamped: np.ndarray


def round_half_up(v: np.ndarray) -> np.ndarray:
    return np.floor(np.asarray(v, dtype=np.float64) + 0.5)


def project_params(params: np.ndarray, bounds: ShotBounds, grid: int) -> tuple[np.ndarray, np.ndarray]:
    """Array form of ``ste_project``; returns ``(projected, clamped)``."""
    params = np.asarray(params, dtype=np.float64).reshape(-1, 6)
    out = np.empty_like(params)
    out[:, X] = round_half_up(params[:, X])
    out[:, Y] = round_half_up(params[:, Y])
    out[:, W] = round_half_up(params[:, W])
    out[:, H] = round_half_up(params[:, H])
    lo = np.array([0, 0, bounds.w_min, bounds.h_min, bounds.d_min, 0.0])
    hi = np.array([grid - 1, grid - 1, bounds.w_max, bounds.h_max, bounds.d_max, 1.0])
    out[:, D] = params[:, D]
    out[:, Q] = params[:, Q]
    clipped = np.clip(out, lo, hi)
    clamped = clipped != out
    clipped[:, Q] = (clipped[:, Q] >= 0.5).astype(np.float64)
    return clipped, clamped


def ste_project(shots: ShotSet, bounds: ShotBounds, grid: int | None = None) -> Projection:
    """Round, clamp and binarize shots into the feasible set.

    Positions and sizes round half up and clamp; dose only clamps; the active
    flag clamps to [0, 1] then binarizes at 0.5.
    """
    params, grid = as_params(shots, grid)
    projected, clamped = project_params(params, bounds, grid)
    return Projection(ShotSet.from_array(projected, grid), clamped)


def ste_backward(grad: np.ndarray, projection: Projection | None = None) -> np.ndarray:
    """Gradient w.r.t. raw parameters: the identity under full straight-through."""
    return np.asarray(grad)


class ExactModel:
    """Exact forward model with the same interface as ``fast.FastModel``."""

    def __init__(self, ebl: EblParams, grid: int):
        self.ebl = ebl
        self.grid = int(grid)

    def energy(self, params) -> np.ndarray:
        return total_energy(params, self.ebl, self.grid)

    def vjp(self, upstream: np.ndarray, params) -> np.ndarray:
        return adjoint_accumulate(upstream, params, self.ebl, self.grid)
