"""ReLU-slack encoding of inequality constraints on states and algebraic inputs.

A violation of ``lower <= v <= upper`` is measured by two nonnegative slacks,
``s_lower = relu(lower - v)`` and ``s_upper = relu(v - upper)``; their sum is
the joint violation magnitude.  Slacks are zero exactly when the value is
inside the band, and at most one side is active at a time.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from .errors import DataError
from .numerics import as_matrix

STATE_DIM = 4

# Physical ceiling for the heat-flow input: full mass flow times the specific
# heat of water times the peak emission temperature difference.
U_NOMINAL = 0.2 * 4184.0 * 10.0


@dataclass
class BoundSpec:
    """Lower/upper bands for states (degC) and algebraic input, plus weights.

    State bounds are per-state vectors of shape (4,), or (T, 4) arrays for
    per-step schedules.  Input bounds are scalars or length-T sequences in
    physical heat-flow units.  ``lam`` weights state slacks in the loss,
    ``mu`` weights input slacks.
    """

    x_lower: np.ndarray = field(default_factory=lambda: np.zeros(STATE_DIM))
    x_upper: np.ndarray = field(default_factory=lambda: np.full(STATE_DIM, 40.0))
    u_lower: float | np.ndarray = -U_NOMINAL
    u_upper: float | np.ndarray = U_NOMINAL
    lam: float = 1.0
    mu: float = 1.0

    def __post_init__(self):
        self.x_lower = np.asarray(self.x_lower, dtype=np.float64)
        self.x_upper = np.asarray(self.x_upper, dtype=np.float64)
        if self.x_lower.shape != self.x_upper.shape:
            raise DataError(
                f"state bound shapes differ: {self.x_lower.shape} vs {self.x_upper.shape}"
            )
        if np.any(self.x_lower > self.x_upper):
            raise DataError("state bounds inverted: lower > upper somewhere")
        u_lo = np.asarray(self.u_lower, dtype=np.float64)
        u_hi = np.asarray(self.u_upper, dtype=np.float64)
        if np.any(u_lo > u_hi):
            raise DataError("input bounds inverted: lower > upper somewhere")
        if self.lam < 0 or self.mu < 0:
            raise DataError("penalty weights must be nonnegative")

    def state_band(self, steps: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
        """Bounds as (4, 1) columns, or (4, W) when per-step schedules apply.

        ``steps`` gives the absolute step index of each window at the current
        rollout depth; it is only consulted for scheduled (2-D) bounds.
        """
        lo, hi = self.x_lower, self.x_upper
        if lo.ndim == 1:
            return lo.reshape(-1, 1), hi.reshape(-1, 1)
        if steps is None:
            raise DataError("per-step state bounds require step indices")
        idx = np.clip(steps, 0, lo.shape[0] - 1)
        return lo[idx].T, hi[idx].T

    def input_band(self, steps: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
        """Input bounds as 1x1 scalars or (1, W) rows for scheduled bounds."""
        lo = np.asarray(self.u_lower, dtype=np.float64)
        hi = np.asarray(self.u_upper, dtype=np.float64)
        if lo.ndim == 0:
            return lo.reshape(1, 1), hi.reshape(1, 1)
        if steps is None:
            raise DataError("per-step input bounds require step indices")
        idx = np.clip(steps, 0, lo.shape[0] - 1)
        return lo[idx].reshape(1, -1), hi[idx].reshape(1, -1)


def bound_slacks(v, lower, upper):
    """Slacks of ``lower <= v <= upper``; returns ``(s_lower, s_upper)``.

    Accepts either a plain array (returns arrays) or a TapeValue (records the
    slack computation on the value's tape so it is differentiable).  Bounds
    are broadcast against ``v`` column-wise, i.e. (n, 1) bounds apply to every
    column of an (n, W) batch.
    """
    lo = as_matrix(lower)
    hi = as_matrix(upper)
    if np.any(lo > np.broadcast_to(hi, np.broadcast_shapes(lo.shape, hi.shape))):
        raise DataError("bound inversion: lower > upper")
    if isinstance(v, ad.TapeValue):
        tape = v.tape
        s_lower = ad.relu(ad.subtract(tape.constant(lo), v))
        s_upper = ad.relu(ad.subtract(v, tape.constant(hi)))
        return s_lower, s_upper
    arr = as_matrix(v)
    return np.maximum(lo - arr, 0.0), np.maximum(arr - hi, 0.0)


def violation_magnitude(values: np.ndarray, lower, upper) -> np.ndarray:
    """Joint slack ``s_lower + s_upper`` for plain arrays."""
    s_lo, s_hi = bound_slacks(values, lower, upper)
    return s_lo + s_hi


SCHEDULE_HEADER = (
    [f"x{i}_lower" for i in range(1, STATE_DIM + 1)]
    + [f"x{i}_upper" for i in range(1, STATE_DIM + 1)]
    + ["u_lower", "u_upper"]
)


def load_bounds_csv(path, lam: float = 1.0, mu: float = 1.0) -> BoundSpec:
    """Per-step bound schedule: one row per step, columns ``x1_lower..x4_lower,
    x1_upper..x4_upper, u_lower, u_upper``."""
    import csv

    with open(path, "r", encoding="ascii", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if [c.strip() for c in header] != SCHEDULE_HEADER:
            raise DataError(f"{path}: expected header {','.join(SCHEDULE_HEADER)}")
        rows = []
        for lineno, fields in enumerate(reader, start=2):
            if not fields:
                continue
            if len(fields) != len(SCHEDULE_HEADER):
                raise DataError(f"{path}: line {lineno}: expected {len(SCHEDULE_HEADER)} fields")
            try:
                rows.append([float(tok) for tok in fields])
            except ValueError:
                raise DataError(f"{path}: line {lineno}: non-numeric field") from None
    if not rows:
        raise DataError(f"{path}: no data rows")
    arr = np.array(rows)
    return BoundSpec(
        x_lower=arr[:, 0:4],
        x_upper=arr[:, 4:8],
        u_lower=arr[:, 8],
        u_upper=arr[:, 9],
        lam=lam,
        mu=mu,
    )
