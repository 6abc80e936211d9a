"""Neural state-space model variants and their rollout machinery.

A model advances ``x[k+1] = A_eff x[k] + B u'[k] + E d'[k]`` where ``u'`` and
``d'`` are the algebraic input and disturbances in normalized units.  The
transition matrix is either the stability-enforcing Perron-Frobenius
composition of two free matrices (ODE variants) or a free matrix (S-RNN and
exact truth embeddings).

Variants differ in how much of the bilinear heat-flow equation they know:

* ``white``  - u = a*H*b + h with fixed constants,
* ``gray``   - same form, H and h learnable (H through a nominal-scale gain),
* ``black``  - two-layer ReLU MLP on (a, b),
* ``srnn``   - bias-free ReLU network with a skip path, free transition.

Normalization: the algebraic input is divided by ``spec.u_ref`` and
disturbances by ``spec.d_scale`` before entering the linear dynamics, so
learnable couplings live at order one regardless of the physical scales.
For black/srnn the network output is already treated as normalized
(``u_ref = 1``).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from .autodiff import Tape, TapeValue
from .constraints import U_NOMINAL, BoundSpec, bound_slacks
from .errors import ConfigError, DivergenceError, NumericError, ShapeError
from .numerics import SeededRng, as_matrix
from .plant import PlantSystem, SignalSet

VARIANTS = ("black", "gray", "white", "srnn")
STATE_DIM = 4
DAMPING_SPAN = 0.1  # rows of the PF transition sum to within this of one
D_SCALE_DEFAULT = (20.0, 600.0, 300.0)
H_NOMINAL_DEFAULT = 4000.0  # engineering guess for the bilinear gain


@dataclass(frozen=True)
class ModelSpec:
    """Variant selector plus the architectural constants of one model."""

    variant: str = "gray"
    constrained: bool = False
    hidden_units: int = 8
    state_dim: int = STATE_DIM
    n_a: int = 1
    n_b: int = 1
    n_d: int = 3
    n_u: int = 1
    transition: str = "pf"  # "pf" | "raw"
    u_ref: float | None = None
    d_scale: tuple[float, float, float] = D_SCALE_DEFAULT
    h_nominal: float = H_NOMINAL_DEFAULT
    H_fixed: float = 4184.0  # c_p of water
    h_fixed: float = 0.0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        if self.transition not in ("pf", "raw"):
            raise ConfigError(f"transition must be 'pf' or 'raw', got {self.transition!r}")
        if self.variant == "srnn":
            if self.transition != "raw":
                raise ConfigError("the S-RNN variant never uses the PF parameterization")
            if self.constrained:
                raise ConfigError("the S-RNN variant carries no inequality penalties")
        if self.u_ref is None:
            ref = U_NOMINAL if self.variant in ("white", "gray") else 1.0
            object.__setattr__(self, "u_ref", ref)
        if self.u_ref <= 0:
            raise ConfigError("u_ref must be positive")

    @property
    def key(self) -> str:
        return f"{'c' if self.constrained else ''}{self.variant}"

    @property
    def u_physical_scale(self) -> float:
        """Factor turning the model-internal u into physical heat flow.

        White/gray terms are physical already (their normalization by
        ``u_ref`` is undone); black/srnn network outputs are read as
        fractions of the nominal heat flow.
        """
        return self.u_ref if self.variant in ("white", "gray") else U_NOMINAL

    def to_dict(self) -> dict:
        return {
            "variant": self.variant,
            "constrained": self.constrained,
            "hidden_units": self.hidden_units,
            "state_dim": self.state_dim,
            "n_a": self.n_a,
            "n_b": self.n_b,
            "n_d": self.n_d,
            "n_u": self.n_u,
            "transition": self.transition,
            "u_ref": self.u_ref,
            "d_scale": list(self.d_scale),
            "h_nominal": self.h_nominal,
            "H_fixed": self.H_fixed,
            "h_fixed": self.h_fixed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelSpec":
        d = dict(d)
        d["d_scale"] = tuple(d.get("d_scale", D_SCALE_DEFAULT))
        return cls(**d)


def param_shapes(spec: ModelSpec) -> dict[str, tuple[int, int]]:
    n, hid = spec.state_dim, spec.hidden_units
    shapes: dict[str, tuple[int, int]] = {}
    if spec.transition == "pf":
        shapes["A_raw"] = (n, n)
        shapes["M_raw"] = (n, n)
    else:
        shapes["A"] = (n, n)
    shapes["B"] = (n, spec.n_u)
    shapes["E"] = (n, spec.n_d)
    if spec.variant == "gray":
        shapes["gain"] = (1, 1)
        shapes["offset"] = (1, 1)
    elif spec.variant == "black":
        shapes["W1"] = (hid, 2)
        shapes["c1"] = (hid, 1)
        shapes["W2"] = (1, hid)
        shapes["c2"] = (1, 1)
    elif spec.variant == "srnn":
        shapes["W1"] = (hid, 2)
        shapes["W2"] = (1, hid)
        shapes["W3"] = (1, 2)
    return shapes


@dataclass
class TrainedModel:
    """A spec plus concrete parameter values (possibly partially frozen)."""

    spec: ModelSpec
    params: dict[str, np.ndarray]
    frozen: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self):
        expected = param_shapes(self.spec)
        if set(self.params) != set(expected):
            raise ConfigError(
                f"parameter set {sorted(self.params)} does not match "
                f"variant {self.spec.variant!r} (expected {sorted(expected)})"
            )
        for name, shape in expected.items():
            arr = as_matrix(self.params[name], name)
            if arr.shape != shape:
                raise ShapeError(f"parameter {name} must have shape {shape}, got {arr.shape}")
            self.params[name] = arr

    def trainable_names(self) -> list[str]:
        return [k for k in sorted(self.params) if k not in self.frozen]

    def copy(self) -> "TrainedModel":
        return TrainedModel(self.spec, {k: v.copy() for k, v in self.params.items()}, self.frozen)

    def transition(self) -> np.ndarray:
        """The effective state transition matrix."""
        if self.spec.transition == "pf":
            return pf_transition(self.params["A_raw"], self.params["M_raw"])
        return self.params["A"]

    def bilinear_coefficients(self) -> tuple[float, float]:
        """Effective (H, h) of the algebraic term; gray/white only."""
        if self.spec.variant == "white":
            return self.spec.H_fixed, self.spec.h_fixed
        if self.spec.variant == "gray":
            return float(self.spec.h_nominal * self.params["gain"][0, 0]), float(
                self.params["offset"][0, 0]
            )
        raise ConfigError(f"variant {self.spec.variant!r} has no bilinear coefficients")


def init_params(spec: ModelSpec, rng: SeededRng) -> TrainedModel:
    """Random initialization: uniform(-1, 1) for the PF factors, fan-in scaled
    uniform for couplings and network weights, positive nominal-scale gain for
    the gray-box heat capacity."""
    params: dict[str, np.ndarray] = {}
    for name, shape in param_shapes(spec).items():
        if name in ("A_raw", "M_raw"):
            params[name] = rng.uniform(-1.0, 1.0, shape)
        elif name == "gain":
            params[name] = rng.uniform(0.0, 2.0, shape)
        elif name == "offset":
            params[name] = np.zeros(shape)
        else:
            if name == "c1":
                fan_in = 2  # bias of the (a, b) -> hidden layer
            elif name == "c2":
                fan_in = spec.hidden_units
            else:
                fan_in = shape[1]
            s = 1.0 / np.sqrt(fan_in)
            params[name] = rng.uniform(-s, s, shape)
    return TrainedModel(spec, params)


def truth_model(plant: PlantSystem, constrained: bool = False) -> TrainedModel:
    """The plant embedded exactly as a white-box model.

    Uses the raw transition mode and unit normalization so the model's step
    arithmetic matches the simulator's; every parameter is frozen.
    """
    spec = ModelSpec(
        variant="white",
        constrained=constrained,
        transition="raw",
        u_ref=1.0,
        d_scale=(1.0, 1.0, 1.0),
        H_fixed=plant.H,
        h_fixed=plant.h,
    )
    params = {"A": plant.A.copy(), "B": plant.B.copy(), "E": plant.E.copy()}
    return TrainedModel(spec, params, frozenset(params))


def truth_frozen_gray(plant: PlantSystem, rng: SeededRng, h_nominal: float = H_NOMINAL_DEFAULT) -> TrainedModel:
    """Gray-box model with the dynamics matrices frozen at the plant truth and
    only the bilinear coefficients left to learn."""
    spec = ModelSpec(
        variant="gray",
        transition="raw",
        u_ref=1.0,
        d_scale=(1.0, 1.0, 1.0),
        h_nominal=h_nominal,
    )
    params = {
        "A": plant.A.copy(),
        "B": plant.B.copy(),
        "E": plant.E.copy(),
        "gain": rng.uniform(0.0, 2.0, (1, 1)),
        "offset": np.zeros((1, 1)),
    }
    return TrainedModel(spec, params, frozenset({"A", "B", "E"}))


# --- Perron-Frobenius transition -------------------------------------------


def pf_transition(a_raw, m_raw):
    """Stable transition matrix from two unconstrained square matrices.

    Row-softmax of ``a_raw`` gives a row-stochastic nonnegative matrix; it is
    damped elementwise by ``M = 1 - 0.1*sigmoid(m_raw)``, so every row sum
    lands in [0.9, 1.0) and the dominant eigenvalue stays strictly below one.
    Accepts arrays (returns an array) or TapeValues (records on the tape).
    """
    if isinstance(a_raw, TapeValue):
        tape = a_raw.tape
        soft = ad.row_softmax(a_raw)
        ones = tape.constant(np.ones(m_raw.shape))
        damping = ad.subtract(ones, ad.scale(ad.sigmoid(m_raw), DAMPING_SPAN))
        return ad.hadamard(soft, damping)
    a = as_matrix(a_raw)
    m = as_matrix(m_raw)
    shifted = a - a.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    soft = e / e.sum(axis=1, keepdims=True)
    damping = 1.0 - DAMPING_SPAN / (1.0 + np.exp(-np.clip(m, -500, 500)))
    return soft * damping


# --- Algebraic input term ---------------------------------------------------


def algebraic_term(spec: ModelSpec, params: dict[str, np.ndarray], a, b):
    """The variant's algebraic input u for scalar or (1, W) row inputs.

    white: u = a*H*b + h with the spec's fixed constants.
    gray:  u = a*(h_nominal*gain)*b + offset.
    black: u = W2 @ relu(W1 @ [a; b] + c1) + c2.
    srnn:  u = relu(W2 @ relu(W1 @ [a; b]) + W3 @ [a; b]).
    """
    a_row = np.atleast_2d(np.asarray(a, dtype=np.float64))
    b_row = np.atleast_2d(np.asarray(b, dtype=np.float64))
    scalar = np.isscalar(a) or np.asarray(a).ndim == 0
    if spec.variant == "white":
        u = a_row * spec.H_fixed * b_row + spec.h_fixed
    elif spec.variant == "gray":
        _require_theta(spec, params, ("gain", "offset"))
        H_eff = spec.h_nominal * params["gain"][0, 0]
        u = a_row * H_eff * b_row + params["offset"][0, 0]
    elif spec.variant == "black":
        _require_theta(spec, params, ("W1", "c1", "W2", "c2"))
        z = np.vstack([a_row, b_row])
        hidden = np.maximum(params["W1"] @ z + params["c1"], 0.0)
        u = params["W2"] @ hidden + params["c2"]
    else:  # srnn
        _require_theta(spec, params, ("W1", "W2", "W3"))
        z = np.vstack([a_row, b_row])
        h1 = np.maximum(params["W1"] @ z, 0.0)
        u = np.maximum(params["W2"] @ h1 + params["W3"] @ z, 0.0)
    return float(u[0, 0]) if scalar else u


def _require_theta(spec: ModelSpec, params: dict, names: tuple[str, ...]) -> None:
    missing = [n for n in names if n not in params]
    if missing:
        raise ConfigError(f"variant {spec.variant!r} requires parameters {missing}")


def _algebraic_term_tape(
    tape: Tape, spec: ModelSpec, leaves: dict[str, TapeValue], a_row: np.ndarray, b_row: np.ndarray
) -> TapeValue | np.ndarray:
    """Tape version of ``algebraic_term`` for (1, W) signal rows.

    Returns a plain array for the white-box (no learnable inputs), otherwise
    a TapeValue.
    """
    if spec.variant == "white":
        return a_row * spec.H_fixed * b_row + spec.h_fixed
    if spec.variant == "gray":
        ab = tape.constant(spec.h_nominal * a_row * b_row)
        return ad.add(ad.matmul(leaves["gain"], ab), leaves["offset"])
    z = tape.constant(np.vstack([a_row, b_row]))
    if spec.variant == "black":
        hidden = ad.relu(ad.add(ad.matmul(leaves["W1"], z), leaves["c1"]))
        return ad.add(ad.matmul(leaves["W2"], hidden), leaves["c2"])
    h1 = ad.relu(ad.matmul(leaves["W1"], z))
    return ad.relu(ad.add(ad.matmul(leaves["W2"], h1), ad.matmul(leaves["W3"], z)))


# --- Stepping and rollouts --------------------------------------------------


def ssm_step(params: dict[str, np.ndarray], spec: ModelSpec, x, a, b, d):
    """One model step; returns (x_next (4,) or (4, W), u as from algebraic_term)."""
    x_col = np.asarray(x, dtype=np.float64)
    squeeze = x_col.ndim == 1
    x_col = x_col.reshape(spec.state_dim, -1)
    d_col = np.asarray(d, dtype=np.float64).reshape(spec.n_d, -1)
    u = algebraic_term(spec, params, a, b)
    u_row = np.atleast_2d(u) / spec.u_ref
    A_eff = pf_transition(params["A_raw"], params["M_raw"]) if spec.transition == "pf" else params["A"]
    d_scaled = d_col / np.asarray(spec.d_scale).reshape(-1, 1)
    x_next = A_eff @ x_col + params["B"] @ u_row + params["E"] @ d_scaled
    if not np.all(np.isfinite(x_next)):
        raise NumericError("model step produced non-finite state")
    return (x_next.ravel() if squeeze else x_next), u


@dataclass
class RolloutResult:
    """Batched rollout output; trailing axis is the window (batch) dimension.

    ``states`` has N+1 entries including the initial state.  ``u_seq`` holds
    the physical-scale heat-flow estimate.  Slacks are ReLU violation
    magnitudes (states in degC, input in normalized units); identically zero
    for unconstrained specs.
    """

    states: np.ndarray  # (N+1, 4, W)
    u_seq: np.ndarray  # (N, W)
    slack_x: np.ndarray  # (N, 4, W)
    slack_u: np.ndarray  # (N, W)

    @property
    def horizon(self) -> int:
        return self.u_seq.shape[0]


def rollout(
    model: TrainedModel,
    x0,
    signals: SignalSet,
    N: int,
    bounds: BoundSpec | None = None,
    start_step: int = 0,
) -> RolloutResult:
    """Roll one trajectory of N steps from x0 under the given signals.

    Slacks are computed against ``bounds`` when the spec is constrained (and
    bounds are provided); otherwise they are zeros.
    """
    if len(signals) < start_step + N:
        raise ShapeError(f"need {start_step + N} signal steps, have {len(signals)}")
    x0b = np.asarray(x0, dtype=np.float64).reshape(-1, 1)
    sl = signals
    a = sl.a_seq[start_step : start_step + N].reshape(N, 1)
    b = sl.b_seq[start_step : start_step + N].reshape(N, 1)
    d = sl.d_seq[start_step : start_step + N].reshape(N, 3, 1)
    starts = np.array([start_step])
    return rollout_batch(model, x0b, a, b, d, bounds=bounds, window_starts=starts)


def rollout_batch(
    model: TrainedModel,
    x0: np.ndarray,
    a: np.ndarray,
    b: np.ndarray,
    d: np.ndarray,
    bounds: BoundSpec | None = None,
    window_starts: np.ndarray | None = None,
) -> RolloutResult:
    """Vectorized rollout over W windows (x0: (4, W); a, b: (N, W); d: (N, 3, W))."""
    spec = model.spec
    params = model.params
    N, W = a.shape
    A_eff = model.transition()
    B, E = params["B"], params["E"]
    d_div = np.asarray(spec.d_scale).reshape(1, 3, 1)
    d_scaled = d / d_div

    track = spec.constrained and bounds is not None
    u_band_div = spec.u_physical_scale  # physical bounds -> u_scaled units
    states = np.empty((N + 1, spec.state_dim, W))
    u_seq = np.empty((N, W))
    slack_x = np.zeros((N, spec.state_dim, W))
    slack_u = np.zeros((N, W))
    states[0] = x0
    x = x0
    for k in range(N):
        u = algebraic_term(spec, params, a[k].reshape(1, -1), b[k].reshape(1, -1))
        u_scaled = u / spec.u_ref
        x = A_eff @ x + B @ u_scaled + E @ d_scaled[k]
        if not np.all(np.isfinite(x)) or np.any(np.abs(x) > 1e9):
            raise DivergenceError(f"rollout diverged at step {k + 1}", step=k + 1)
        states[k + 1] = x
        u_seq[k] = u_scaled[0] * spec.u_physical_scale
        if track:
            steps = None if window_starts is None else window_starts + k
            lo, hi = bounds.state_band(None if steps is None else steps + 1)
            s_lo, s_hi = bound_slacks(x, lo, hi)
            slack_x[k] = s_lo + s_hi
            u_lo, u_hi = bounds.input_band(steps)
            su_lo, su_hi = bound_slacks(u_scaled, u_lo / u_band_div, u_hi / u_band_div)
            slack_u[k] = (su_lo + su_hi)[0]
    return RolloutResult(states=states, u_seq=u_seq, slack_x=slack_x, slack_u=slack_u)


@dataclass
class TapeRollout:
    """Rollout recorded on a tape: per-step TapeValues ready for a loss.

    Slacks are stacked over steps: ``slack_x`` is one (4N, W) value (states
    of step k occupy rows 4k..4k+3), ``slack_u`` one (N, W) value; both are
    None for unconstrained rollouts.
    """

    states: list  # N+1 TapeValues/arrays of shape (4, W)
    u_scaled: list  # N entries, (1, W)
    slack_x: TapeValue | None
    slack_u: TapeValue | None


def rollout_tape(
    tape: Tape,
    leaves: dict[str, TapeValue],
    spec: ModelSpec,
    x0: np.ndarray,
    a: np.ndarray,
    b: np.ndarray,
    d: np.ndarray,
    bounds: BoundSpec | None = None,
    window_starts: np.ndarray | None = None,
) -> TapeRollout:
    """Differentiable batched rollout with shared weights across steps.

    Per-step signal constants are precomputed in the tape's dtype up front so
    the loop only appends nodes; the algebraic term is specialized per
    variant (the white-box input has no learnable pieces and enters as a
    constant).
    """
    N, W = a.shape
    dt = tape.dtype
    if spec.transition == "pf":
        A_eff = pf_transition(leaves["A_raw"], leaves["M_raw"])
    else:
        A_eff = leaves["A"]
    B, E = leaves["B"], leaves["E"]
    d_scaled = (d / np.asarray(spec.d_scale).reshape(1, 3, 1)).astype(dt)
    track = spec.constrained and bounds is not None
    inv_ref = 1.0 / spec.u_ref

    variant = spec.variant
    if variant == "white":
        u_all = ((a * spec.H_fixed * b + spec.h_fixed) * inv_ref).astype(dt)
    elif variant == "gray":
        ab_all = (spec.h_nominal * inv_ref * a * b).astype(dt)
        offset_scaled = ad.scale(leaves["offset"], inv_ref)
    else:
        z_all = np.stack([a, b], axis=1).astype(dt)  # (N, 2, W)

    x = tape.constant(x0.astype(dt))
    states = [x]
    u_list: list[TapeValue] = []
    isfinite = np.isfinite
    for k in range(N):
        if variant == "white":
            u_scaled = tape.constant(u_all[k].reshape(1, -1))
        elif variant == "gray":
            u_scaled = ad.add(ad.matmul(leaves["gain"], tape.constant(ab_all[k].reshape(1, -1))), offset_scaled)
        elif variant == "black":
            z = tape.constant(z_all[k])
            hidden = ad.relu(ad.add(ad.matmul(leaves["W1"], z), leaves["c1"]))
            u_scaled = ad.add(ad.matmul(leaves["W2"], hidden), leaves["c2"])
        else:  # srnn
            z = tape.constant(z_all[k])
            h1 = ad.relu(ad.matmul(leaves["W1"], z))
            u_scaled = ad.relu(ad.add(ad.matmul(leaves["W2"], h1), ad.matmul(leaves["W3"], z)))
        x = ad.add(ad.add(ad.matmul(A_eff, x), ad.matmul(B, u_scaled)), ad.matmul(E, tape.constant(d_scaled[k])))
        if not isfinite(x.value).all():
            raise DivergenceError(f"rollout diverged at step {k + 1}", step=k + 1)
        states.append(x)
        u_list.append(u_scaled)

    slack_x = slack_u = None
    if track:
        x_lo, x_hi, u_lo_s, u_hi_s = _stacked_bands(spec, bounds, N, window_starts)
        z_states = ad.concat_rows(*states[1:]) if N > 1 else states[1]
        s_lo = ad.relu(ad.subtract(tape.constant(x_lo), z_states))
        s_hi = ad.relu(ad.subtract(z_states, tape.constant(x_hi)))
        slack_x = ad.add(s_lo, s_hi)
        z_u = ad.concat_rows(*u_list) if N > 1 else u_list[0]
        su_lo = ad.relu(ad.subtract(tape.constant(u_lo_s), z_u))
        su_hi = ad.relu(ad.subtract(z_u, tape.constant(u_hi_s)))
        slack_u = ad.add(su_lo, su_hi)
    return TapeRollout(states=states, u_scaled=u_list, slack_x=slack_x, slack_u=slack_u)


def _stacked_bands(
    spec: ModelSpec, bounds: BoundSpec, N: int, window_starts: np.ndarray | None
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Bounds tiled over the step-stacked layout of a tape rollout.

    Returns state bands of shape (4N, 1) or (4N, W) and input bands of shape
    (N, 1) or (N, W), the latter brought into the model's internal u scale.
    """
    x_lo_rows, x_hi_rows, u_lo_rows, u_hi_rows = [], [], [], []
    for k in range(N):
        steps = None if window_starts is None else window_starts + k
        lo, hi = bounds.state_band(None if steps is None else steps + 1)
        x_lo_rows.append(lo)
        x_hi_rows.append(hi)
        u_lo, u_hi = bounds.input_band(steps)
        u_lo_rows.append(u_lo.reshape(1, -1))
        u_hi_rows.append(u_hi.reshape(1, -1))
    return (
        np.vstack(x_lo_rows),
        np.vstack(x_hi_rows),
        np.vstack(u_lo_rows) / spec.u_physical_scale,
        np.vstack(u_hi_rows) / spec.u_physical_scale,
    )


# --- Checkpoint serialization ------------------------------------------------

CHECKPOINT_FORMAT = "neuralssm-checkpoint-v1"


def save_checkpoint(model: TrainedModel, path, meta: dict | None = None) -> None:
    """Write the model as JSON; floats round-trip bit-exactly."""
    doc = {
        "format": CHECKPOINT_FORMAT,
        "spec": model.spec.to_dict(),
        "frozen": sorted(model.frozen),
        "params": {
            name: {"shape": list(arr.shape), "data": arr.tolist()}
            for name, arr in sorted(model.params.items())
        },
        "meta": meta or {},
    }
    with open(path, "w", encoding="ascii") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_checkpoint(path) -> tuple[TrainedModel, dict]:
    with open(path, "r", encoding="ascii") as fh:
        doc = json.load(fh)
    if doc.get("format") != CHECKPOINT_FORMAT:
        raise ConfigError(f"{path}: not a {CHECKPOINT_FORMAT} document")
    spec = ModelSpec.from_dict(doc["spec"])
    params = {}
    for name, entry in doc["params"].items():
        arr = np.array(entry["data"], dtype=np.float64)
        if list(arr.shape) != entry["shape"]:
            raise ConfigError(f"{path}: parameter {name} shape mismatch")
        params[name] = arr
    model = TrainedModel(spec, params, frozenset(doc.get("frozen", [])))
    return model, doc.get("meta", {})
