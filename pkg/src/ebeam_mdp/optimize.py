"""Projected gradient descent over shot parameters (MDP and MDP-based ILT).

Each epoch projects the shots onto the feasible set, simulates, evaluates the
composite loss, and takes one plain gradient step. Gradients pass straight
through the projection. The learning rate halves from the midpoint epoch on,
and the best projected shot set seen so far is kept.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .exact import resist_develop
from .fast import DEFAULT_SIGMA_PRIME, FastModel
from .grad import ExactModel, backprop_resist, project_params
from .losses import LossReport, compose, dose_loss, l2_loss, overlap_loss, pvb_loss, sparsity_loss
from .model import EblParams, LossWeights, OlParams, ShotBounds, ShotSet, ValidationError
from .optical import OpticalModel, OpticalState, cdr_retarget


class NumericalError(RuntimeError):
    """A loss component became non-finite."""

    def __init__(self, epoch: int, component: str):
        super().__init__(f"non-finite {component} loss at epoch {epoch}")
        self.epoch = epoch
        self.component = component


@dataclass(frozen=True)
class OptConfig:
    epochs: int = 200
    lr: float = 0.02
    mode: str = "mdp"
    weights: LossWeights = field(default_factory=LossWeights)
    update_from: str = "projected"
    seed: int = 0
    forward: str = "fast"
    sigma_prime: float = DEFAULT_SIGMA_PRIME
    sigma_cdr: float = 0.0
    # per-parameter multipliers on lr, in x, y, w, h, d, q order; geometry must
    # move >= 0.5 px per step to survive rounding, dose and flag need far less
    lr_scale: tuple[float, ...] = (1.0, 1.0, 1.0, 1.0, 0.005, 0.01)

    def validate(self) -> "OptConfig":
        if int(self.epochs) != self.epochs or self.epochs < 1:
            raise ValidationError("epochs must be a positive integer")
        if not (math.isfinite(self.lr) and self.lr > 0):
            raise ValidationError("lr must be finite and positive")
        if self.mode not in ("mdp", "ilt"):
            raise ValidationError("mode must be 'mdp' or 'ilt'")
        if self.update_from not in ("projected", "raw"):
            raise ValidationError("update_from must be 'projected' or 'raw'")
        if self.forward not in ("fast", "exact"):
            raise ValidationError("forward must be 'fast' or 'exact'")
        if not self.sigma_prime > 0:
            raise ValidationError("sigma_prime must be positive")
        if not self.sigma_cdr >= 0:
            raise ValidationError("sigma_cdr must be nonnegative")
        if len(self.lr_scale) != 6 or not all(math.isfinite(s) and s >= 0 for s in self.lr_scale):
            raise ValidationError("lr_scale must hold 6 finite nonnegative values")
        self.weights.validate()
        return self


@dataclass
class OptTrace:
    reports: list[LossReport] = field(default_factory=list)
    lrs: list[float] = field(default_factory=list)
    best_losses: list[float] = field(default_factory=list)
    best_epoch: int = 0
    best_loss: float = math.inf
    best_shots: ShotSet | None = None

    def csv_rows(self) -> list[list[str]]:
        return [r.csv_row(t, lr) for t, (r, lr) in enumerate(zip(self.reports, self.lrs), start=1)]


def lr_schedule(epoch: int, cfg: OptConfig) -> float:
    """``lr`` before epoch ``epochs // 2`` and ``lr / 2`` from it on."""
    half = cfg.epochs // 2
    return cfg.lr / 2 if half >= 1 and epoch >= half else cfg.lr


def make_forward(ebl: EblParams, grid: int, cfg: OptConfig, workers: int | None = None):
    if cfg.forward == "exact":
        return ExactModel(ebl, grid)
    return FastModel(ebl, grid, cfg.sigma_prime, workers=workers)


def _shot_terms(proj: np.ndarray, w: LossWeights):
    ls, gs = sparsity_loss(proj)
    ld, gd = dose_loss(proj)
    lo, go = overlap_loss(proj)
    return (ls, ld, lo), w.gamma * gs + w.delta * gd + w.epsilon * go


def _check_finite(epoch: int, report: LossReport) -> None:
    for name in ("l2", "pvb", "sparsity", "dose", "overlap", "total"):
        v = getattr(report, name)
        if v is not None and not math.isfinite(v):
            raise NumericalError(epoch, name)


def run_descent(init: ShotSet, bounds: ShotBounds, cfg: OptConfig,
                evaluate: Callable[[np.ndarray], tuple[LossReport, np.ndarray]]
                ) -> tuple[ShotSet, OptTrace]:
    """The shared epoch loop. ``evaluate(projected)`` returns the report and gradient."""
    cfg.validate()
    bounds.validate()
    if len(init) == 0:
        raise ValueError("initial shot set is empty")
    grid = init.grid_size
    params = init.as_array()
    scale = np.asarray(cfg.lr_scale, dtype=np.float64)
    trace = OptTrace()
    for epoch in range(1, cfg.epochs + 1):
        proj, _ = project_params(params, bounds, grid)
        report, grad = evaluate(proj)
        _check_finite(epoch, report)
        if not np.all(np.isfinite(grad)):
            raise NumericalError(epoch, "gradient")
        lr = lr_schedule(epoch, cfg)
        trace.reports.append(report)
        trace.lrs.append(lr)
        if report.total < trace.best_loss:
            trace.best_loss = report.total
            trace.best_epoch = epoch
            trace.best_shots = ShotSet.from_array(proj, grid)
        trace.best_losses.append(trace.best_loss)
        base = proj if cfg.update_from == "projected" else params
        params = base - lr * scale * grad
    return trace.best_shots, trace


@dataclass
class MdpProblem:
    """Forward and backward pass of the EBL + resist chain for one mask target."""

    ebl: EblParams
    target: np.ndarray
    weights: LossWeights
    forward: object

    @classmethod
    def build(cls, target: np.ndarray, grid: int, ebl: EblParams, cfg: OptConfig,
              workers: int | None = None) -> "MdpProblem":
        target = np.asarray(target, dtype=np.float64)
        if target.shape != (grid, grid):
            raise ValueError(f"target shape {target.shape} does not match grid {grid}")
        ebl.validate()
        return cls(ebl, target, cfg.weights, make_forward(ebl, grid, cfg, workers))

    def simulate(self, proj: np.ndarray) -> np.ndarray:
        return resist_develop(self.forward.energy(proj), self.ebl)

    def evaluate(self, proj: np.ndarray) -> tuple[LossReport, np.ndarray]:
        w = self.weights
        z_e = self.simulate(proj)
        l2, g_z = l2_loss(z_e, self.target)
        (ls, ld, lo), grad = _shot_terms(proj, w)
        report = compose(w, l2, ls, ld, lo)
        grad = grad + self.forward.vjp(backprop_resist(w.alpha * g_z, z_e, self.ebl), proj)
        return report, grad


def mdp_optimize(init: ShotSet, target: np.ndarray, ebl: EblParams, bounds: ShotBounds,
                 cfg: OptConfig, workers: int | None = None) -> tuple[ShotSet, OptTrace]:
    """Fit shots so the developed resist pattern matches a mask-level target."""
    problem = MdpProblem.build(target, init.grid_size, ebl, cfg, workers)
    return run_descent(init, bounds, cfg, problem.evaluate)


@dataclass
class IltProblem:
    """Forward and backward pass of the EBL + optical chain for one target."""

    ebl: EblParams
    ol: OlParams
    wafer_target: np.ndarray
    descent_target: np.ndarray
    weights: LossWeights
    forward: object
    optical: OpticalModel

    @classmethod
    def build(cls, wafer_target: np.ndarray, mask_grid: int, ebl: EblParams, ol: OlParams,
              cfg: OptConfig, workers: int | None = None) -> "IltProblem":
        wafer_target = np.asarray(wafer_target, dtype=np.float64)
        n = wafer_target.shape[0]
        if wafer_target.shape != (n, n) or n * ol.reduction != mask_grid:
            raise ValueError(f"wafer target {wafer_target.shape} x{ol.reduction} does not "
                             f"match mask grid {mask_grid}")
        ebl.validate()
        ol.validate()
        return cls(ebl, ol, wafer_target, cdr_retarget(wafer_target, cfg.sigma_cdr),
                   cfg.weights, make_forward(ebl, mask_grid, cfg, workers),
                   OpticalModel(ol, n, workers))

    def simulate(self, proj: np.ndarray) -> tuple[np.ndarray, OpticalState]:
        z_e = resist_develop(self.forward.energy(proj), self.ebl)
        return z_e, self.optical.forward(z_e)

    def evaluate(self, proj: np.ndarray) -> tuple[LossReport, np.ndarray]:
        """Report L2 against the original target; descend on the retargeted one."""
        w = self.weights
        z_e, state = self.simulate(proj)
        corners = state.corners
        l2_eval, _ = l2_loss(corners.nominal, self.wafer_target)
        _, g_nom = l2_loss(corners.nominal, self.descent_target)
        pvb, (g_in, _, g_out) = pvb_loss(corners.inner, corners.nominal, corners.outer)
        (ls, ld, lo), grad = _shot_terms(proj, w)
        report = compose(w, l2_eval, ls, ld, lo, pvb=pvb)
        upstream = {"nominal": w.alpha * g_nom, "inner": w.beta * g_in, "outer": w.beta * g_out}
        d_ze = self.optical.backward(upstream, state)
        grad = grad + self.forward.vjp(backprop_resist(d_ze, z_e, self.ebl), proj)
        return report, grad


def ilt_optimize(init: ShotSet, wafer_target: np.ndarray, ebl: EblParams, ol: OlParams,
                 bounds: ShotBounds, cfg: OptConfig,
                 workers: int | None = None) -> tuple[ShotSet, OptTrace]:
    """Fit shots so the printed wafer pattern matches ``wafer_target``."""
    problem = IltProblem.build(wafer_target, init.grid_size, ebl, ol, cfg, workers)
    return run_descent(init, bounds, cfg, problem.evaluate)
