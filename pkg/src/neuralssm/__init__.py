"""Stability-constrained neural state-space models for bilinear system identification."""

from .constraints import BoundSpec, bound_slacks
from .estimator import NeuralSSMRegressor
from .models import (
    ModelSpec,
    TrainedModel,
    init_params,
    load_checkpoint,
    pf_transition,
    rollout,
    save_checkpoint,
    ssm_step,
    truth_model,
)
from .numerics import SeededRng, eigenvalues, spectral_radius
from .plant import (
    Dataset,
    PlantSystem,
    SignalSet,
    build_default_plant,
    generate_signals,
    load_signals_csv,
    make_dataset,
    simulate_truth,
)
from .training import TrainConfig, TrainRecord, adamw_step, make_windows, nstep_loss, sweep, train

__version__ = "0.1.0"

__all__ = [
    "BoundSpec",
    "Dataset",
    "ModelSpec",
    "NeuralSSMRegressor",
    "PlantSystem",
    "SeededRng",
    "SignalSet",
    "TrainConfig",
    "TrainRecord",
    "TrainedModel",
    "adamw_step",
    "bound_slacks",
    "build_default_plant",
    "eigenvalues",
    "generate_signals",
    "init_params",
    "load_checkpoint",
    "load_signals_csv",
    "make_dataset",
    "make_windows",
    "nstep_loss",
    "pf_transition",
    "rollout",
    "save_checkpoint",
    "simulate_truth",
    "spectral_radius",
    "ssm_step",
    "sweep",
    "train",
    "truth_model",
]
