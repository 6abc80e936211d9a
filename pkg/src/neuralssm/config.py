"""Run configuration: strict JSON parsing and scale presets.

Unknown keys are rejected at every level so typos in sweep definitions fail
loudly instead of silently running the wrong experiment.  The ``scale``
preset (``desk`` or ``paper``) fixes epochs, restarts, and the learning-rate
grid unless the config overrides them explicitly.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .constraints import U_NOMINAL, BoundSpec
from .errors import ConfigError
from .models import ModelSpec, VARIANTS
from .plant import DELTA_T_MAX, M_DOT_MAX
from .training import TrainConfig

SCALES = ("desk", "paper")

# epochs, restarts, lr grid per scale preset
_SCALE_SETTINGS = {
    "desk": (2000, 3, (0.003, 0.01, 0.03)),
    "paper": (15000, 30, (0.001, 0.003, 0.01, 0.03)),
}


def _take(d: dict, context: str, allowed: set[str]) -> None:
    unknown = set(d) - allowed
    if unknown:
        raise ConfigError(f"{context}: unknown keys {sorted(unknown)} (allowed: {sorted(allowed)})")


@dataclass
class RunConfig:
    seed: int = 0
    out_dir: str = "out"
    run_id: str | None = None
    scale: str = "desk"
    jobs: int = field(default_factory=lambda: max(1, os.cpu_count() or 1))
    dataset_source: str = "synthetic"  # "synthetic" | "csv"
    dataset_path: str | None = None
    weeks: int = 4
    m_dot_max: float = M_DOT_MAX
    delta_t_max: float = DELTA_T_MAX
    signal_noise: bool = True
    bounds: BoundSpec = field(default_factory=BoundSpec)
    variants: tuple[str, ...] = ("black", "gray", "white")
    constrained: tuple[bool, ...] = (False, True)
    horizons: tuple[int, ...] = (8, 16, 32, 64, 128)
    lr_grid: tuple[float, ...] | None = None  # None: use the scale preset
    restarts: int | None = None
    epochs: int | None = None
    weight_decay: float = 0.01
    stride: int = 1
    eval_every: int = 100
    precision: str = "float32"

    def __post_init__(self):
        if self.scale not in SCALES:
            raise ConfigError(f"scale must be one of {SCALES}, got {self.scale!r}")
        if self.dataset_source not in ("synthetic", "csv"):
            raise ConfigError("dataset source must be 'synthetic' or 'csv'")
        if self.dataset_source == "csv" and not self.dataset_path:
            raise ConfigError("dataset source 'csv' requires a path")
        for v in self.variants:
            if v not in VARIANTS:
                raise ConfigError(f"unknown variant {v!r}; expected one of {VARIANTS}")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        if not self.horizons:
            raise ConfigError("at least one horizon required")

    @property
    def resolved_run_id(self) -> str:
        return self.run_id or f"run-{self.scale}-seed{self.seed}"

    def resolved(self) -> tuple[int, int, tuple[float, ...]]:
        """(epochs, restarts, lr_grid) after applying the scale preset."""
        epochs, restarts, grid = _SCALE_SETTINGS[self.scale]
        return (
            self.epochs if self.epochs is not None else epochs,
            self.restarts if self.restarts is not None else restarts,
            tuple(self.lr_grid) if self.lr_grid is not None else grid,
        )

    def train_config(self) -> TrainConfig:
        epochs, restarts, grid = self.resolved()
        return TrainConfig(
            epochs=epochs,
            restarts=restarts,
            lr_grid=grid,
            weight_decay=self.weight_decay,
            seed=self.seed,
            bounds=self.bounds,
            eval_every=self.eval_every,
            stride=self.stride,
            precision=self.precision,
        )

    def specs(self) -> list[ModelSpec]:
        """Model specs: the (variant, constrained) product; the S-RNN never
        takes the constrained flag."""
        out = []
        for v in self.variants:
            for c in self.constrained:
                if v == "srnn":
                    continue
                out.append(ModelSpec(variant=v, constrained=c))
        if "srnn" in self.variants:
            out.append(ModelSpec(variant="srnn", transition="raw"))
        if not out:
            raise ConfigError("empty model spec list")
        return out

    def out_root(self) -> Path:
        return Path(self.out_dir) / self.resolved_run_id


def _parse_bounds(doc: dict) -> BoundSpec:
    _take(doc, "bounds", {"x_lower", "x_upper", "u_lower", "u_upper", "lambda", "mu", "schedule"})
    lam = float(doc.get("lambda", 1.0))
    mu = float(doc.get("mu", 1.0))
    if "schedule" in doc:
        conflicting = {"x_lower", "x_upper", "u_lower", "u_upper"} & set(doc)
        if conflicting:
            raise ConfigError(f"bounds: schedule excludes constant keys {sorted(conflicting)}")
        from .constraints import load_bounds_csv

        return load_bounds_csv(doc["schedule"], lam=lam, mu=mu)

    def per_state(value, default):
        if value is None:
            return default
        arr = np.asarray(value, dtype=np.float64)
        if arr.ndim == 0:
            return np.full(4, float(arr))
        return arr

    return BoundSpec(
        x_lower=per_state(doc.get("x_lower"), np.zeros(4)),
        x_upper=per_state(doc.get("x_upper"), np.full(4, 40.0)),
        u_lower=float(doc.get("u_lower", -U_NOMINAL)),
        u_upper=float(doc.get("u_upper", U_NOMINAL)),
        lam=lam,
        mu=mu,
    )


def parse_config(doc: dict) -> RunConfig:
    """Build a RunConfig from a parsed JSON document (strict)."""
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a JSON object")
    _take(doc, "config", {"seed", "out_dir", "run_id", "scale", "jobs", "dataset", "plant", "bounds", "train"})
    kwargs: dict = {}
    for key in ("seed", "out_dir", "run_id", "scale", "jobs"):
        if key in doc:
            kwargs[key] = doc[key]

    ds = doc.get("dataset", {})
    _take(ds, "dataset", {"source", "path", "weeks"})
    if "source" in ds:
        kwargs["dataset_source"] = ds["source"]
    if "path" in ds:
        kwargs["dataset_path"] = ds["path"]
    if "weeks" in ds:
        kwargs["weeks"] = int(ds["weeks"])

    pl = doc.get("plant", {})
    _take(pl, "plant", {"m_dot_max", "delta_t_max", "noise"})
    if "m_dot_max" in pl:
        kwargs["m_dot_max"] = float(pl["m_dot_max"])
    if "delta_t_max" in pl:
        kwargs["delta_t_max"] = float(pl["delta_t_max"])
    if "noise" in pl:
        kwargs["signal_noise"] = bool(pl["noise"])

    if "bounds" in doc:
        kwargs["bounds"] = _parse_bounds(doc["bounds"])

    tr = doc.get("train", {})
    _take(
        tr,
        "train",
        {
            "variants",
            "constrained",
            "horizons",
            "lr_grid",
            "restarts",
            "epochs",
            "weight_decay",
            "stride",
            "eval_every",
            "precision",
        },
    )
    if "variants" in tr:
        kwargs["variants"] = tuple(tr["variants"])
    if "constrained" in tr:
        kwargs["constrained"] = tuple(bool(c) for c in tr["constrained"])
    if "horizons" in tr:
        kwargs["horizons"] = tuple(int(n) for n in tr["horizons"])
    if "lr_grid" in tr:
        kwargs["lr_grid"] = tuple(float(x) for x in tr["lr_grid"])
    for key in ("restarts", "epochs"):
        if key in tr:
            kwargs[key] = int(tr[key])
    for key in ("weight_decay", "stride", "eval_every", "precision"):
        if key in tr:
            kwargs[key] = tr[key]
    try:
        return RunConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    return parse_config(doc)
