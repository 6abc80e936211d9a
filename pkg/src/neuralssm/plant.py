"""Ground-truth thermal plant, signal synthesis, and dataset assembly.

The plant is a four-state linear system driven by a bilinear heat-flow input
and three disturbances:

    x[k+1] = A x[k] + B u[k] + E d[k]
    u[k]   = a[k] * H * b[k] + h

States are wall, ceiling, floor, and room temperature (degC); the room
(state 4) is the only observed variable.  One step is 300 s, so a day is 288
steps and a week is 2016.  All shipped constants are artifact defaults chosen
to keep four weeks of simulation inside a sane temperature envelope while
matching the published spectrum of A exactly.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import DataError, DivergenceError, ShapeError
from .numerics import SeededRng, format_float

STATE_DIM = 4
OBSERVED_INDEX = 4  # 1-based: room temperature
DAY_STEPS = 288
WEEK_STEPS = 2016
SAMPLE_SECONDS = 300

C_P = 4184.0  # specific heat of water, J/(kg K)
M_DOT_MAX = 0.2  # kg/s
DELTA_T_MAX = 10.0  # K
X0_DEFAULT = 20.0  # degC on every state


@dataclass(frozen=True)
class PlantSystem:
    """Ground-truth parameters; immutable after construction."""

    A: np.ndarray
    B: np.ndarray
    E: np.ndarray
    H: float
    h: float
    sample_seconds: int = SAMPLE_SECONDS

    def __post_init__(self):
        if self.A.shape != (STATE_DIM, STATE_DIM):
            raise ShapeError(f"A must be {STATE_DIM}x{STATE_DIM}")
        if self.B.shape != (STATE_DIM, 1) or self.E.shape != (STATE_DIM, 3):
            raise ShapeError("B must be 4x1 and E must be 4x3")
        if np.any(self.A < 0):
            raise DataError("plant transition matrix must be elementwise nonnegative")


@dataclass
class SignalSet:
    """Exogenous sequences: mass flow a (kg/s), emission delta-T b (K), and
    disturbances d (ambient degC, solar W/m^2, internal gains W)."""

    a_seq: np.ndarray
    b_seq: np.ndarray
    d_seq: np.ndarray

    def __post_init__(self):
        self.a_seq = np.asarray(self.a_seq, dtype=np.float64).ravel()
        self.b_seq = np.asarray(self.b_seq, dtype=np.float64).ravel()
        self.d_seq = np.asarray(self.d_seq, dtype=np.float64)
        if self.d_seq.ndim != 2 or self.d_seq.shape[1] != 3:
            raise ShapeError(f"d_seq must be (T, 3), got {self.d_seq.shape}")
        n = len(self.a_seq)
        if len(self.b_seq) != n or self.d_seq.shape[0] != n:
            raise ShapeError("signal sequences must have equal length")
        if np.any(self.a_seq < 0):
            raise DataError("mass flow must be nonnegative")

    def __len__(self) -> int:
        return len(self.a_seq)

    def window(self, start: int, stop: int) -> "SignalSet":
        return SignalSet(self.a_seq[start:stop], self.b_seq[start:stop], self.d_seq[start:stop])


@dataclass
class Partition:
    """One contiguous week: initial state, the T successor states, and the
    signals that produced them.  ``states[t]`` is the state after applying
    ``signals`` step t to the previous state (``x0`` for t = 0)."""

    name: str
    start: int
    x0: np.ndarray
    states: np.ndarray
    signals: SignalSet

    @property
    def steps(self) -> int:
        return self.states.shape[0]

    def full_states(self) -> np.ndarray:
        """(T+1, 4) array of states including the initial one."""
        return np.vstack([self.x0.reshape(1, -1), self.states])

    def observed(self) -> np.ndarray:
        """(T,) observed-state targets (room temperature)."""
        return self.states[:, OBSERVED_INDEX - 1]


@dataclass
class Dataset:
    train: Partition
    val: Partition
    test: Partition
    observed_index: int = OBSERVED_INDEX

    def partitions(self) -> tuple[Partition, Partition, Partition]:
        return (self.train, self.val, self.test)


def build_default_plant() -> PlantSystem:
    """Default ground truth.

    A is lower triangular so its spectrum is exactly the diagonal
    (1.0, 0.99, 0.98, 0.25): wall, ceiling, floor, room.  The room row picks
    up heat from the other masses, with the floor the weakest link.  B routes
    the radiator input to the room; E couples ambient to wall/ceiling/room,
    solar to wall/room, and internal gains to the room only.
    """
    A = np.array(
        [
            [1.00, 0.0, 0.0, 0.0],
            [0.0, 0.99, 0.0, 0.0],
            [0.0, 0.0, 0.98, 0.0],
            [0.02, 0.02, 0.005, 0.25],
        ]
    )
    B = np.array([[0.0], [0.0], [0.0], [8.0e-4]])
    E = np.array(
        [
            [1.0e-4, 2.0e-6, 0.0],
            [0.02, 0.0, 0.0],
            [0.0, 0.0, 0.0],
            [0.85, 6.0e-3, 1.4e-2],
        ]
    )
    return PlantSystem(A=A, B=B, E=E, H=C_P, h=0.0)


def generate_signals(
    T: int,
    rng: SeededRng,
    noise: bool = True,
    m_dot_max: float = M_DOT_MAX,
    delta_t_max: float = DELTA_T_MAX,
) -> SignalSet:
    """Day-periodic control signals plus synthetic weather disturbances.

    Mass flow is a raised sine, delta-T a cosine, both with a one-day period.
    Disturbances are day-period shapes with a slow weekly drift and additive
    seeded noise: ambient around 10 degC with amplitude 8, solar a
    nonnegative half-wave peaking at 600, internal gains a flattened day
    profile peaking at 300.
    """
    if T <= 0:
        raise ValueError("signal length must be positive")
    k = np.arange(T)
    day = 2.0 * np.pi * k / DAY_STEPS
    week = 2.0 * np.pi * k / (7 * DAY_STEPS)

    a_seq = m_dot_max * (1.0 + np.sin(day)) / 2.0
    b_seq = delta_t_max * np.cos(day)

    # Phases put the ambient trough where the heat input peaks and the solar
    # peak around midday of the synthetic day, so the room stays in a sane band.
    ambient = 10.0 + 8.0 * np.sin(day - 2.09) + 2.5 * np.sin(week + 0.3)
    solar = 600.0 * np.maximum(0.0, np.sin(day - 2.0))
    gains = 300.0 * np.clip(2.0 * np.maximum(0.0, np.sin(day - 1.9)), 0.0, 1.0)
    if noise:
        ambient = ambient + rng.normal(0.4, T).ravel()
        solar = np.maximum(0.0, solar + rng.normal(15.0, T).ravel() * (solar > 0))
        gains = np.maximum(0.0, gains + rng.normal(10.0, T).ravel() * (gains > 0))
    return SignalSet(a_seq, b_seq, np.column_stack([ambient, solar, gains]))


def bilinear_input(a: float, H: float, b: float, h: float) -> float:
    """Heat flow u = a*H*b + h."""
    return a * H * b + h


def simulate_truth(plant: PlantSystem, x0, signals: SignalSet) -> np.ndarray:
    """Roll the plant forward; returns (T+1, 4) states including x0."""
    x0 = np.asarray(x0, dtype=np.float64).ravel()
    if x0.shape != (STATE_DIM,):
        raise ShapeError(f"x0 must have {STATE_DIM} entries")
    T = len(signals)
    out = np.empty((T + 1, STATE_DIM))
    out[0] = x0
    x = x0.reshape(-1, 1)
    A, B, E = plant.A, plant.B, plant.E
    d = signals.d_seq
    for k in range(T):
        u = bilinear_input(signals.a_seq[k], plant.H, signals.b_seq[k], plant.h)
        x = A @ x + B * u + E @ d[k].reshape(-1, 1)
        if not np.all(np.isfinite(x)) or np.any(np.abs(x) > 1e9):
            raise DivergenceError(f"plant state diverged at step {k + 1}", step=k + 1)
        out[k + 1] = x.ravel()
    return out


def make_dataset(
    plant: PlantSystem,
    rng: SeededRng,
    weeks: int = 4,
    signals: SignalSet | None = None,
    **signal_kwargs,
) -> Dataset:
    """Simulate ``weeks`` weeks from 20 degC everywhere; weeks 2-4 become the
    train/validation/test partitions (week 1 is a warm-up and is discarded).

    ``signals`` substitutes externally supplied sequences (e.g. real weather
    loaded from CSV) for the synthetic ones; extra keyword arguments are
    passed to :func:`generate_signals`.
    """
    if weeks < 4:
        raise ValueError("need at least 4 weeks: warm-up plus three partitions")
    T_total = weeks * WEEK_STEPS
    if signals is None:
        signals = generate_signals(T_total, rng.split(0), **signal_kwargs)
    elif len(signals) < T_total:
        raise DataError(f"supplied signals cover {len(signals)} steps; need {T_total}")
    else:
        signals = signals.window(0, T_total)
    states = simulate_truth(plant, np.full(STATE_DIM, X0_DEFAULT), signals)

    def carve(name: str, week: int) -> Partition:
        start = week * WEEK_STEPS
        return Partition(
            name=name,
            start=start,
            x0=states[start].copy(),
            states=states[start + 1 : start + WEEK_STEPS + 1].copy(),
            signals=signals.window(start, start + WEEK_STEPS),
        )

    return Dataset(train=carve("train", 1), val=carve("val", 2), test=carve("test", 3))


SIGNAL_HEADER = ["a", "b", "d1", "d2", "d3"]


def write_signals_csv(path, signals: SignalSet) -> None:
    with open(path, "w", encoding="ascii", newline="") as fh:
        fh.write(",".join(SIGNAL_HEADER) + "\n")
        for i in range(len(signals)):
            row = [signals.a_seq[i], signals.b_seq[i], *signals.d_seq[i]]
            fh.write(",".join(format_float(v) for v in row) + "\n")


def load_signals_csv(path) -> SignalSet:
    """Parse a signals CSV with header ``a,b,d1,d2,d3``; validates as it reads."""
    with open(path, "r", encoding="ascii", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if [c.strip() for c in header] != SIGNAL_HEADER:
            raise DataError(f"{path}: expected header {','.join(SIGNAL_HEADER)}, got {header}")
        rows = []
        for lineno, fields in enumerate(reader, start=2):
            if not fields:
                continue
            if len(fields) != 5:
                raise DataError(f"{path}: line {lineno}: expected 5 fields, got {len(fields)}")
            try:
                rows.append([float(tok) for tok in fields])
            except ValueError:
                raise DataError(f"{path}: line {lineno}: non-numeric field") from None
    if not rows:
        raise DataError(f"{path}: no data rows")
    arr = np.array(rows)
    if np.any(arr[:, 0] < 0):
        bad = int(np.argmax(arr[:, 0] < 0)) + 2
        raise DataError(f"{path}: line {bad}: negative mass flow")
    return SignalSet(arr[:, 0], arr[:, 1], arr[:, 2:5])


DATASET_HEADER = ["x1", "x2", "x3", "x4", "a", "b", "d1", "d2", "d3"]


def write_partition_csv(path, part: Partition) -> None:
    """One row per step: the state at step t alongside the signals applied at t."""
    full = part.full_states()
    sig = part.signals
    with open(path, "w", encoding="ascii", newline="") as fh:
        fh.write(",".join(DATASET_HEADER) + "\n")
        for t in range(part.steps):
            row = [*full[t], sig.a_seq[t], sig.b_seq[t], *sig.d_seq[t]]
            fh.write(",".join(format_float(v) for v in row) + "\n")
