"""Composite objective terms. Each returns ``(value, gradient)``.

Shot-space terms take an ``(N, 6)`` parameter array and return an ``(N, 6)``
gradient. They use the ``q`` values as given: the optimizer passes projected
(binarized) shots, and gradient checks pass the continuous relaxation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import D, H, Q, W, X, Y, LossWeights, same_shape

TRACE_HEADER = ("epoch", "total", "l2", "pvb", "sparsity", "dose", "overlap", "lr")


@dataclass(frozen=True)
class LossReport:
    total: float
    l2: float
    sparsity: float
    dose: float
    overlap: float
    pvb: Optional[float] = None

    def csv_row(self, epoch: int, lr: float) -> list[str]:
        pvb = "" if self.pvb is None else repr(self.pvb)
        return [str(epoch), repr(self.total), repr(self.l2), pvb, repr(self.sparsity),
                repr(self.dose), repr(self.overlap), repr(lr)]


def l2_loss(predicted: np.ndarray, target: np.ndarray) -> tuple[float, np.ndarray]:
    """Squared Euclidean distance and its gradient w.r.t. ``predicted``."""
    same_shape(predicted, target, "prediction and target")
    diff = np.asarray(predicted, dtype=np.float64) - target
    return float(np.sum(diff * diff)), 2.0 * diff


def sparsity_loss(params: np.ndarray) -> tuple[float, np.ndarray]:
    params = np.asarray(params, dtype=np.float64).reshape(-1, 6)
    grad = np.zeros_like(params)
    grad[:, Q] = 1.0
    return float(params[:, Q].sum()), grad


def dose_loss(params: np.ndarray) -> tuple[float, np.ndarray]:
    """Total exposed dose ``sum w h d q``."""
    params = np.asarray(params, dtype=np.float64).reshape(-1, 6)
    w, h, d, q = params[:, W], params[:, H], params[:, D], params[:, Q]
    grad = np.zeros_like(params)
    grad[:, W] = h * d * q
    grad[:, H] = w * d * q
    grad[:, D] = w * h * q
    grad[:, Q] = w * h * d
    return float(np.sum(w * h * d * q)), grad


def _interval_overlap(lo: np.ndarray, size: np.ndarray):
    """Pairwise overlap lengths and d(length)/d(lo_k), d(length)/d(size_k).

    Ties between equal edges split the subgradient evenly; the overlap is
    treated as locally constant where it is clipped at zero.
    """
    hi = lo + size
    right_first = (hi[:, None] < hi[None, :]) + 0.5 * (hi[:, None] == hi[None, :])
    left_last = (lo[:, None] > lo[None, :]) + 0.5 * (lo[:, None] == lo[None, :])
    raw = np.minimum(hi[:, None], hi[None, :]) - np.maximum(lo[:, None], lo[None, :])
    positive = raw > 0
    length = np.where(positive, raw, 0.0)
    d_lo = np.where(positive, right_first - left_last, 0.0)
    d_size = np.where(positive, right_first, 0.0)
    return length, d_lo, d_size


def overlap_area(params: np.ndarray) -> np.ndarray:
    """Pairwise rectangle intersection areas, shape ``(N, N)``, zero diagonal."""
    params = np.asarray(params, dtype=np.float64).reshape(-1, 6)
    lx, _, _ = _interval_overlap(params[:, X], params[:, W])
    ly, _, _ = _interval_overlap(params[:, Y], params[:, H])
    area = lx * ly
    np.fill_diagonal(area, 0.0)
    return area


def overlap_loss(params: np.ndarray) -> tuple[float, np.ndarray]:
    """``sum_{k<p} area(k, p) q_k q_p``."""
    params = np.asarray(params, dtype=np.float64).reshape(-1, 6)
    grad = np.zeros_like(params)
    if len(params) < 2:
        return 0.0, grad
    q = params[:, Q]
    lx, dx_lo, dx_size = _interval_overlap(params[:, X], params[:, W])
    ly, dy_lo, dy_size = _interval_overlap(params[:, Y], params[:, H])
    qq = np.outer(q, q)
    np.fill_diagonal(qq, 0.0)
    area = lx * ly
    value = 0.5 * float(np.sum(area * qq))
    grad[:, X] = np.sum(dx_lo * ly * qq, axis=1)
    grad[:, W] = np.sum(dx_size * ly * qq, axis=1)
    grad[:, Y] = np.sum(dy_lo * lx * qq, axis=1)
    grad[:, H] = np.sum(dy_size * lx * qq, axis=1)
    off = area.copy()
    np.fill_diagonal(off, 0.0)
    grad[:, Q] = off @ q
    return value, grad


def pvb_loss(inner: np.ndarray, nominal: np.ndarray, outer: np.ndarray):
    """Squared outer/inner corner print difference.

    Returns ``(value, (g_inner, g_nominal, g_outer))``.
    """
    same_shape(inner, outer, "corner prints")
    same_shape(inner, nominal, "corner prints")
    diff = np.asarray(outer, dtype=np.float64) - inner
    return float(np.sum(diff * diff)), (-2.0 * diff, np.zeros_like(diff), 2.0 * diff)


def compose(weights: LossWeights, l2: float, sparsity: float, dose: float, overlap: float,
            pvb: Optional[float] = None) -> LossReport:
    """Weighted total; ``pvb`` (and so ``beta``) only counts when given."""
    total = (weights.alpha * l2 + weights.gamma * sparsity + weights.delta * dose
             + weights.epsilon * overlap)
    if pvb is not None:
        total += weights.beta * pvb
    return LossReport(total=float(total), l2=float(l2), sparsity=float(sparsity),
                      dose=float(dose), overlap=float(overlap),
                      pvb=None if pvb is None else float(pvb))
