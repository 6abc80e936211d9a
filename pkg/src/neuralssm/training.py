"""N-step windowed training: loss assembly, AdamW, and the restart sweep.

Training is full batch: every stride-1 window of the training partition
contributes to each gradient step.  Windows are batched along a trailing
axis so one tape pass covers the whole epoch.  Model selection keeps the
parameters with the best validation N-step MSE, re-evaluated every
``eval_every`` epochs (early selection, not early stopping).
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import autodiff as ad
from .autodiff import Tape
from .constraints import BoundSpec
from .errors import DivergenceError, NumericError
from .models import (
    ModelSpec,
    TrainedModel,
    init_params,
    rollout_batch,
    rollout_tape,
    save_checkpoint,
    load_checkpoint,
)
from .numerics import SeededRng, format_float
from .plant import Dataset, Partition, OBSERVED_INDEX


@dataclass
class TrainConfig:
    """Hyperparameters for one training run plus the sweep-level grids."""

    horizon: int = 32
    epochs: int = 2000
    learning_rate: float = 0.01
    lr_grid: tuple[float, ...] = (0.003, 0.01, 0.03)
    restarts: int = 3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    weight_decay: float = 0.01
    seed: int = 0
    bounds: BoundSpec = field(default_factory=BoundSpec)
    eval_every: int = 100
    stride: int = 1
    precision: str = "float32"  # tape dtype during training; metrics stay float64

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be at least 1")
        for lr in (self.learning_rate, *self.lr_grid):
            if not 0.0 < lr < 1.0:
                raise ValueError(f"learning rate {lr} outside (0, 1)")
        if self.epochs < 0 or self.restarts < 1:
            raise ValueError("epochs must be >= 0 and restarts >= 1")
        if self.precision not in ("float32", "float64"):
            raise ValueError("precision must be float32 or float64")


def desk_preset(**overrides) -> TrainConfig:
    """Laptop-scale defaults: 2000 epochs, 3 restarts, 3-point LR grid."""
    return TrainConfig(**overrides)


def paper_preset(**overrides) -> TrainConfig:
    """Full protocol scale: 15000 epochs, 30 restarts."""
    base = dict(epochs=15000, restarts=30, lr_grid=(0.001, 0.003, 0.01, 0.03))
    base.update(overrides)
    return TrainConfig(**base)


PRESETS = {"desk": desk_preset, "paper": paper_preset}


@dataclass
class WindowBatch:
    """All stride-s windows of a partition, stacked along a trailing axis."""

    x0: np.ndarray  # (4, W)
    targets: np.ndarray  # (N, W) observed-state targets
    a: np.ndarray  # (N, W)
    b: np.ndarray  # (N, W)
    d: np.ndarray  # (N, 3, W)
    starts: np.ndarray  # (W,) absolute step of each window's x0

    @property
    def count(self) -> int:
        return self.x0.shape[1]


def make_windows(part: Partition, N: int, stride: int = 1) -> WindowBatch:
    """Overlapping windows: T - N + 1 of them at stride 1.

    Window s starts from the state at step s and is scored against the
    observed state at steps s+1 .. s+N.
    """
    T = part.steps
    if N > T:
        raise ValueError(f"horizon {N} exceeds partition length {T}")
    full = part.full_states()  # (T+1, 4)
    starts = np.arange(0, T - N + 1, stride)
    steps = starts[:, None] + np.arange(N)[None, :]  # (W, N)
    sig = part.signals
    return WindowBatch(
        x0=full[starts].T.copy(),
        targets=full[steps + 1, OBSERVED_INDEX - 1].T.copy(),
        a=sig.a_seq[steps].T.copy(),
        b=sig.b_seq[steps].T.copy(),
        d=np.ascontiguousarray(sig.d_seq[steps].transpose(1, 2, 0)),
        starts=starts,
    )


def nstep_loss(result, targets: np.ndarray, lam: float, mu: float) -> float:
    """Multi-objective N-step MSE for an evaluated rollout (plain arrays).

    Mean over windows of (1/N) sum_k of the observed squared error plus
    weighted squared state and input slacks.
    """
    N, W = targets.shape
    err = result.states[1:, OBSERVED_INDEX - 1, :] - targets
    total = float(np.sum(err * err))
    if lam:
        total += lam * float(np.sum(result.slack_x * result.slack_x))
    if mu:
        total += mu * float(np.sum(result.slack_u * result.slack_u))
    return total / (N * W)


def _nstep_loss_tape(tape: Tape, ro, targets: np.ndarray, lam: float, mu: float):
    """Tape twin of :func:`nstep_loss` over a recorded rollout.

    Per-step errors and slacks are stacked with one concat each so the whole
    objective reduces through three sum-of-squares nodes.
    """
    N, W = targets.shape
    obs = OBSERVED_INDEX - 1
    targets = targets.astype(tape.dtype, copy=False)
    errs = []
    for k in range(N):
        pred = ad.slice_rows(ro.states[k + 1], obs, obs + 1)
        errs.append(ad.subtract(pred, tape.constant(targets[k].reshape(1, -1))))
    total = ad.sum_of_squares(ad.concat_rows(*errs) if N > 1 else errs[0])
    if ro.slack_x is not None and lam:
        total = ad.add(total, ad.scale(ad.sum_of_squares(ro.slack_x), lam))
    if ro.slack_u is not None and mu:
        total = ad.add(total, ad.scale(ad.sum_of_squares(ro.slack_u), mu))
    return ad.scale(total, 1.0 / (N * W))


# --- AdamW -------------------------------------------------------------------


@dataclass
class OptimizerState:
    m: dict[str, np.ndarray]
    v: dict[str, np.ndarray]
    t: int = 0

    @classmethod
    def for_params(cls, params: dict[str, np.ndarray], names) -> "OptimizerState":
        return cls(
            m={k: np.zeros_like(params[k]) for k in names},
            v={k: np.zeros_like(params[k]) for k in names},
        )


def adamw_step(
    params: dict[str, np.ndarray],
    grads: dict[str, np.ndarray],
    state: OptimizerState,
    lr: float,
    weight_decay: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> dict[str, np.ndarray]:
    """One decoupled-weight-decay Adam update, in place; returns ``params``."""
    state.t += 1
    t = state.t
    bc1 = 1.0 - beta1**t
    bc2 = 1.0 - beta2**t
    for name, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise NumericError(f"non-finite gradient for parameter {name!r}")
        m = state.m[name]
        v = state.v[name]
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * (g * g)
        m_hat = m / bc1
        v_hat = v / bc2
        params[name] -= lr * (m_hat / (np.sqrt(v_hat) + eps) + weight_decay * params[name])
    return params


# --- Training loop -----------------------------------------------------------


@dataclass
class TrainRecord:
    """Outcome of one training run; ``model`` holds the best-validation weights."""

    model: TrainedModel
    loss_trace: list[float]
    val_trace: list[tuple[int, float]]
    best_val_mse: float
    wall_clock: float
    failed: bool = False
    fail_reason: str = ""


def _val_mse(model: TrainedModel, batch: WindowBatch) -> float:
    res = rollout_batch(model, batch.x0, batch.a, batch.b, batch.d)
    err = res.states[1:, OBSERVED_INDEX - 1, :] - batch.targets
    return float(np.mean(err * err))


def train_model(
    model: TrainedModel,
    config: TrainConfig,
    train_part: Partition,
    val_part: Partition,
) -> TrainRecord:
    """Full-batch AdamW on the N-step loss, starting from ``model``."""
    t0 = time.perf_counter()
    spec = model.spec
    bounds = config.bounds
    N = config.horizon
    batch = make_windows(train_part, N, config.stride)
    val_batch = make_windows(val_part, N, config.stride)
    work = model.copy()
    trainable = work.trainable_names()
    opt = OptimizerState.for_params(work.params, trainable)

    best = work.copy()
    losses: list[float] = []
    val_trace: list[tuple[int, float]] = []
    try:
        best_val = _val_mse(work, val_batch)
    except (DivergenceError, NumericError) as exc:
        return TrainRecord(
            model=best, loss_trace=losses, val_trace=val_trace, best_val_mse=np.inf,
            wall_clock=time.perf_counter() - t0, failed=True, fail_reason=f"epoch 1: {exc}",
        )
    val_trace.append((0, best_val))

    def finish(failed: bool = False, reason: str = "") -> TrainRecord:
        return TrainRecord(
            model=best,
            loss_trace=losses,
            val_trace=val_trace,
            best_val_mse=best_val,
            wall_clock=time.perf_counter() - t0,
            failed=failed,
            fail_reason=reason,
        )

    tape_dtype = np.dtype(config.precision)
    for epoch in range(1, config.epochs + 1):
        tape = Tape(dtype=tape_dtype)
        leaves = {}
        for name, arr in work.params.items():
            leaves[name] = tape.leaf(arr, name) if name in trainable else tape.constant(arr)
        try:
            ro = rollout_tape(
                tape, leaves, spec, batch.x0, batch.a, batch.b, batch.d,
                bounds=bounds if spec.constrained else None,
                window_starts=batch.starts,
            )
            loss_tv = _nstep_loss_tape(tape, ro, batch.targets, bounds.lam, bounds.mu)
            loss = float(loss_tv.value[0, 0])
            if not np.isfinite(loss):
                return finish(failed=True, reason=f"loss non-finite at epoch {epoch}")
            losses.append(loss)
            grads = tape.backward(loss_tv)
            gmap = {name: grads[leaves[name].idx] for name in trainable}
            adamw_step(
                work.params, gmap, opt, config.learning_rate, config.weight_decay,
                config.beta1, config.beta2, config.eps,
            )
        except (DivergenceError, NumericError) as exc:
            return finish(failed=True, reason=f"epoch {epoch}: {exc}")
        if epoch % config.eval_every == 0 or epoch == config.epochs:
            vm = _val_mse(work, val_batch)
            val_trace.append((epoch, vm))
            if vm < best_val:
                best_val = vm
                best = work.copy()
    return finish()


def train(spec: ModelSpec, config: TrainConfig, dataset: Dataset) -> TrainRecord:
    """Initialize from the config seed and train on the dataset's partitions."""
    model = init_params(spec, SeededRng(config.seed))
    return train_model(model, config, dataset.train, dataset.val)


# --- Sweep -------------------------------------------------------------------


@dataclass(frozen=True)
class CellKey:
    variant: str
    constrained: bool
    N: int
    lr: float
    restart: int

    def name(self) -> str:
        c = "c" if self.constrained else "u"
        return f"{self.variant}-{c}-N{self.N}-lr{format_float(self.lr)}-r{self.restart}"

    def split_path(self) -> tuple[int, ...]:
        # The constrained flag is deliberately absent: the constrained and
        # unconstrained twins of a cell share their initialization so their
        # trajectories are comparable under identical seeds.
        from .models import VARIANTS

        return (
            VARIANTS.index(self.variant),
            self.N,
            int(round(self.lr * 1e6)),
            self.restart,
        )


@dataclass
class CellResult:
    key: CellKey
    nstep_mse_val: float
    nstep_mse_test: float
    openloop_mse_test: float
    failed: bool
    model: TrainedModel | None = None


def _run_cell(args) -> CellResult:
    spec_dict, key, config, dataset, checkpoint_path = args
    from .analysis import nstep_mse_eval, open_loop_mse

    spec = ModelSpec.from_dict(spec_dict)
    if checkpoint_path is not None and checkpoint_path.exists():
        model, meta = load_checkpoint(checkpoint_path)
        return CellResult(
            key=key,
            nstep_mse_val=meta["nstep_mse_val"],
            nstep_mse_test=meta["nstep_mse_test"],
            openloop_mse_test=meta["openloop_mse_test"],
            failed=meta.get("failed", False),
            model=model,
        )
    rng = SeededRng(config.seed).split(*key.split_path())
    model0 = init_params(spec, rng)
    cfg = replace(config, horizon=key.N, learning_rate=key.lr)
    record = train_model(model0, cfg, dataset.train, dataset.val)
    if record.failed:
        result = CellResult(key, np.inf, np.inf, np.inf, True, record.model)
    else:
        result = CellResult(
            key=key,
            nstep_mse_val=record.best_val_mse,
            nstep_mse_test=nstep_mse_eval(record.model, dataset.test, key.N),
            openloop_mse_test=open_loop_mse(record.model, dataset.test),
            failed=False,
            model=record.model,
        )
    if checkpoint_path is not None:
        meta = {
            "cell": key.name(),
            "nstep_mse_val": result.nstep_mse_val,
            "nstep_mse_test": result.nstep_mse_test,
            "openloop_mse_test": result.openloop_mse_test,
            "failed": result.failed,
        }
        save_checkpoint(result.model, checkpoint_path, meta=meta)
    return result


def sweep(
    specs: list[ModelSpec],
    horizons,
    lr_grid,
    restarts: int,
    dataset: Dataset,
    config: TrainConfig,
    checkpoint_dir=None,
    jobs: int = 1,
    log=None,
) -> list[CellResult]:
    """Train the Cartesian product (spec, N, lr, restart); failures are
    recorded as infinite metrics rather than aborting the sweep.

    Each cell draws its initialization from an RNG split keyed by the cell's
    own identity, so any cell is reproducible in isolation.  With
    ``checkpoint_dir`` set, completed cells are skipped on re-run.
    """
    tasks = []
    for spec in specs:
        for N in horizons:
            for lr in lr_grid:
                for r in range(restarts):
                    key = CellKey(spec.variant, spec.constrained, int(N), float(lr), r)
                    path = None
                    if checkpoint_dir is not None:
                        path = checkpoint_dir / f"{key.name()}.json"
                    tasks.append((spec.to_dict(), key, config, dataset, path))

    results: list[CellResult] = []
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for res in pool.map(_run_cell, tasks):
                results.append(res)
                if log:
                    log(_cell_line(res))
    else:
        for t in tasks:
            res = _run_cell(t)
            results.append(res)
            if log:
                log(_cell_line(res))
    results.sort(key=lambda r: (r.key.variant, r.key.constrained, r.key.N, r.key.lr, r.key.restart))
    return results


def _cell_line(res: CellResult) -> str:
    status = "failed" if res.failed else f"val={res.nstep_mse_val:.4g} open={res.openloop_mse_test:.4g}"
    return f"[cell] {res.key.name()}: {status}"


def best_by_variant(results: list[CellResult]) -> list[CellResult]:
    """Minimum-validation cell for each (variant, constrained, N) group."""
    groups: dict[tuple, CellResult] = {}
    for res in results:
        gk = (res.key.variant, res.key.constrained, res.key.N)
        cur = groups.get(gk)
        if cur is None or res.nstep_mse_val < cur.nstep_mse_val:
            groups[gk] = res
    return [groups[k] for k in sorted(groups)]


RESULTS_HEADER = [
    "variant",
    "constrained",
    "N",
    "lr",
    "restart",
    "nstep_mse_val",
    "nstep_mse_test",
    "openloop_mse_test",
]


def write_results_csv(path, results: list[CellResult]) -> None:
    with open(path, "w", encoding="ascii", newline="") as fh:
        fh.write(",".join(RESULTS_HEADER) + "\n")
        for r in results:
            row = [
                r.key.variant,
                str(int(r.key.constrained)),
                str(r.key.N),
                format_float(r.key.lr),
                str(r.key.restart),
                format_float(r.nstep_mse_val),
                format_float(r.nstep_mse_test),
                format_float(r.openloop_mse_test),
            ]
            fh.write(",".join(row) + "\n")
