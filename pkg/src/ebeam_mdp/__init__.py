"""Differentiable VSB e-beam lithography simulation and shot-level optimization."""

from .exact import resist_develop, shot_energy, total_energy
from .fast import FastModel, build_dose_map, fast_energy
from .fracture import FractureError, fracture, rasterize
from .grad import ExactModel, adjoint_accumulate, ste_backward, ste_project
from .model import (EblParams, LossWeights, OlParams, Shot, ShotBounds, ShotSet,
                    ValidationError)
from .optimize import NumericalError, OptConfig, ilt_optimize, mdp_optimize

__version__ = "0.1.0"

__all__ = [
    "EblParams", "ExactModel", "FastModel", "FractureError", "LossWeights", "NumericalError",
    "OlParams", "OptConfig", "Shot", "ShotBounds", "ShotSet", "ValidationError",
    "adjoint_accumulate", "build_dose_map", "fast_energy", "fracture", "ilt_optimize",
    "mdp_optimize", "rasterize", "resist_develop", "shot_energy", "ste_backward",
    "ste_project", "total_energy",
]
