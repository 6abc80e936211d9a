"""scikit-learn style estimator facade over the identification pipeline.

``NeuralSSMRegressor`` fits a stability-constrained neural state-space model
to a sequence of exogenous signals and an observed room temperature, then
predicts open-loop temperature trajectories.  It follows the sklearn
estimator contract (``get_params``/``set_params``/``fit``/``predict``/
``score``) so it composes with model selection utilities; the heavy lifting
lives in :mod:`neuralssm.training`.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.exceptions import NotFittedError

from .constraints import U_NOMINAL, BoundSpec
from .errors import DataError
from .models import ModelSpec, init_params, rollout
from .numerics import SeededRng
from .plant import OBSERVED_INDEX, Partition, SignalSet, STATE_DIM
from .training import TrainConfig, train_model

SIGNAL_COLUMNS = 5  # a, b, d1, d2, d3


def _check_signals(X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != SIGNAL_COLUMNS:
        raise DataError(f"X must be (T, {SIGNAL_COLUMNS}) with columns a,b,d1,d2,d3, got {X.shape}")
    if not np.all(np.isfinite(X)):
        raise DataError("X contains non-finite entries")
    if np.any(X[:, 0] < 0):
        raise DataError("mass flow column a must be nonnegative")
    return X


def _signal_set(X: np.ndarray) -> SignalSet:
    return SignalSet(X[:, 0], X[:, 1], X[:, 2:5])


def _full_states(y, T: int) -> np.ndarray:
    """Accept (T+1, 4) full states or a (T+1,) observed sequence.

    With only the observed temperature available, latent initial states are
    approximated by that temperature (thermal quasi-equilibrium).
    """
    y = np.asarray(y, dtype=np.float64)
    if y.ndim == 1:
        if y.shape[0] != T + 1:
            raise DataError(f"y must hold T+1={T + 1} samples (x0 plus one per signal row)")
        return np.repeat(y.reshape(-1, 1), STATE_DIM, axis=1)
    if y.shape == (T + 1, STATE_DIM):
        return y.copy()
    raise DataError(f"y must be ({T + 1},) or ({T + 1}, {STATE_DIM}), got {y.shape}")


class NeuralSSMRegressor(BaseEstimator, RegressorMixin):
    """Identify a bilinear-input thermal model and predict its observed state.

    Parameters mirror the training configuration: ``variant`` picks how much
    of the heat-flow equation is learned (black/gray/white/srnn),
    ``constrained`` switches the slack penalties on, and ``horizon`` is the
    N-step training objective.  ``fit`` expects ``X`` with columns
    ``a, b, d1, d2, d3`` (mass flow, delta-T, disturbances) and ``y`` with
    T+1 temperature samples (or a (T+1, 4) full state history).
    """

    def __init__(
        self,
        variant: str = "gray",
        constrained: bool = True,
        horizon: int = 32,
        learning_rate: float = 0.01,
        epochs: int = 500,
        weight_decay: float = 0.01,
        hidden_units: int = 8,
        seed: int = 0,
        x_lower: float = 0.0,
        x_upper: float = 40.0,
        u_lower: float = -U_NOMINAL,
        u_upper: float = U_NOMINAL,
        lam: float = 1.0,
        mu: float = 1.0,
        val_fraction: float = 0.25,
    ):
        self.variant = variant
        self.constrained = constrained
        self.horizon = horizon
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.weight_decay = weight_decay
        self.hidden_units = hidden_units
        self.seed = seed
        self.x_lower = x_lower
        self.x_upper = x_upper
        self.u_lower = u_lower
        self.u_upper = u_upper
        self.lam = lam
        self.mu = mu
        self.val_fraction = val_fraction

    def _bounds(self) -> BoundSpec:
        return BoundSpec(
            x_lower=np.full(STATE_DIM, float(self.x_lower)),
            x_upper=np.full(STATE_DIM, float(self.x_upper)),
            u_lower=float(self.u_lower),
            u_upper=float(self.u_upper),
            lam=float(self.lam),
            mu=float(self.mu),
        )

    def fit(self, X, y):
        X = _check_signals(X)
        T = X.shape[0]
        full = _full_states(y, T)
        if not 0.0 < self.val_fraction < 0.9:
            raise DataError("val_fraction must be in (0, 0.9)")
        cut = max(self.horizon + 1, int(T * (1.0 - self.val_fraction)))
        if cut + self.horizon > T:
            raise DataError(
                f"sequence too short: need at least horizon+1 steps on each side "
                f"of the split, got T={T} with horizon={self.horizon}"
            )
        sig = _signal_set(X)
        train_part = Partition("fit", 0, full[0], full[1 : cut + 1], sig.window(0, cut))
        val_part = Partition("holdout", cut, full[cut], full[cut + 1 :], sig.window(cut, T))

        spec = ModelSpec(
            variant=self.variant,
            constrained=bool(self.constrained),
            hidden_units=int(self.hidden_units),
            transition="raw" if self.variant == "srnn" else "pf",
        )
        config = TrainConfig(
            horizon=int(self.horizon),
            epochs=int(self.epochs),
            learning_rate=float(self.learning_rate),
            weight_decay=float(self.weight_decay),
            seed=int(self.seed),
            bounds=self._bounds(),
        )
        model0 = init_params(spec, SeededRng(config.seed))
        record = train_model(model0, config, train_part, val_part)
        if record.failed:
            raise DataError(f"training failed: {record.fail_reason}")
        self.model_ = record.model
        self.record_ = record
        self.n_features_in_ = SIGNAL_COLUMNS
        return self

    def _require_fitted(self):
        if not hasattr(self, "model_"):
            raise NotFittedError("call fit before predict")

    def predict(self, X, x0=None) -> np.ndarray:
        """Open-loop observed-state prediction for each signal row."""
        self._require_fitted()
        X = _check_signals(X)
        if x0 is None:
            raise ValueError("predict requires the initial state x0 (scalar or 4-vector)")
        x0 = np.asarray(x0, dtype=np.float64).ravel()
        if x0.shape == (1,):
            x0 = np.repeat(x0, STATE_DIM)
        res = rollout(self.model_, x0, _signal_set(X), X.shape[0])
        return res.states[1:, OBSERVED_INDEX - 1, 0]

    def simulate(self, X, x0) -> np.ndarray:
        """Full-state open-loop trajectory, (T+1, 4) including x0."""
        self._require_fitted()
        X = _check_signals(X)
        x0 = np.asarray(x0, dtype=np.float64).ravel()
        res = rollout(self.model_, x0, _signal_set(X), X.shape[0])
        return res.states[:, :, 0]

    def score(self, X, y, x0=None) -> float:
        """R^2 of the open-loop prediction against observed samples y[1:]."""
        self._require_fitted()
        y = np.asarray(y, dtype=np.float64)
        obs = y if y.ndim == 1 else y[:, OBSERVED_INDEX - 1]
        start = obs[0] if x0 is None else x0
        pred = self.predict(X, x0=start if np.ndim(start) else [start])
        target = obs[1:]
        ss_res = float(np.sum((target - pred) ** 2))
        ss_tot = float(np.sum((target - np.mean(target)) ** 2))
        return 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
