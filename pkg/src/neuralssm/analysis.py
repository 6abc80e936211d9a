"""Evaluation metrics, eigenvalue reporting, and artifact exports.

Everything here is read-only over trained models and datasets.  Figures are
written as self-contained SVG documents (fixed 800x400 viewport, one polyline
per series) so no plotting dependency is needed; tables and matrices are CSV.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .constraints import U_NOMINAL, BoundSpec, violation_magnitude
from .errors import DivergenceError, NumericError
from .models import TrainedModel, rollout, rollout_batch
from .numerics import eigenvalues, format_float, write_matrix_csv
from .plant import OBSERVED_INDEX, Partition, PlantSystem
from .training import CellResult, best_by_variant, make_windows


def open_loop_mse(model: TrainedModel, part: Partition) -> float:
    """Observed-state MSE of one full-partition rollout from the partition x0.

    Divergent rollouts report infinity instead of raising.
    """
    try:
        res = rollout(model, part.x0, part.signals, part.steps)
    except (DivergenceError, NumericError):
        return float("inf")
    pred = res.states[1:, OBSERVED_INDEX - 1, 0]
    err = part.observed() - pred
    return float(np.mean(err * err))


def nstep_mse_eval(model: TrainedModel, part: Partition, N: int) -> float:
    """Mean observed-state MSE over all stride-1 windows; slacks excluded."""
    batch = make_windows(part, N)
    try:
        res = rollout_batch(model, batch.x0, batch.a, batch.b, batch.d)
    except (DivergenceError, NumericError):
        return float("inf")
    err = res.states[1:, OBSERVED_INDEX - 1, :] - batch.targets
    return float(np.mean(err * err))


@dataclass
class SlackSummary:
    mean_slack_x: float
    max_slack_x: float
    mean_slack_u: float
    max_slack_u: float

    @property
    def mean_joint(self) -> float:
        # States contribute 4 entries per step, the input one.
        return (4.0 * self.mean_slack_x + self.mean_slack_u) / 5.0


def rollout_violations(model: TrainedModel, part: Partition, bounds: BoundSpec) -> SlackSummary:
    """Bound violations of a full test rollout, recomputed from trajectories.

    Works for unconstrained models too: this measures how far the rollout
    strays outside the band, regardless of whether slacks were penalized
    during training.  Input violations are in normalized heat-flow units;
    a divergent rollout reports infinite violations.
    """
    try:
        res = rollout(model, part.x0, part.signals, part.steps)
    except (DivergenceError, NumericError):
        inf = float("inf")
        return SlackSummary(inf, inf, inf, inf)
    states = res.states[1:, :, 0]  # (T, 4)
    lo, hi = bounds.state_band(np.arange(1, part.steps + 1))
    sx = violation_magnitude(states.T, lo, hi)
    u_lo, u_hi = bounds.input_band(np.arange(part.steps))
    su = violation_magnitude(res.u_seq.reshape(1, -1) / U_NOMINAL, u_lo / U_NOMINAL, u_hi / U_NOMINAL)
    return SlackSummary(
        mean_slack_x=float(np.mean(sx)),
        max_slack_x=float(np.max(sx)),
        mean_slack_u=float(np.mean(su)),
        max_slack_u=float(np.max(su)),
    )


# --- Eigenvalue reporting -----------------------------------------------------


@dataclass
class EigenRow:
    label: str
    values: list[complex]
    distance: float  # Euclidean distance of the sorted spectrum to the truth's


@dataclass
class EigenReport:
    rows: list[EigenRow]

    def by_label(self, label: str) -> EigenRow:
        for row in self.rows:
            if row.label == label:
                return row
        raise KeyError(label)


def spectrum_distance(a: list[complex], b: list[complex]) -> float:
    """Euclidean distance between equally sorted spectra, as points in C."""
    if len(a) != len(b):
        raise ValueError("spectra must have equal length")
    return math.sqrt(sum(abs(x - y) ** 2 for x, y in zip(a, b)))


def eigen_report(models: list[tuple[str, TrainedModel]], plant: PlantSystem) -> EigenReport:
    """Spectra of each model's effective transition matrix next to the truth."""
    truth = eigenvalues(plant.A)
    rows = [EigenRow("True", truth, 0.0)]
    for label, model in models:
        vals = eigenvalues(model.transition())
        rows.append(EigenRow(label, vals, spectrum_distance(vals, truth)))
    return EigenReport(rows)


def format_complex(z: complex) -> str:
    if z.imag == 0.0:
        return format_float(z.real)
    sign = "+" if z.imag >= 0 else "-"
    return f"{format_float(z.real)}{sign}{format_float(abs(z.imag))}i"


def write_eigen_csv(path, report: EigenReport) -> None:
    n = len(report.rows[0].values)
    header = ["label"] + [f"lambda{i + 1}" for i in range(n)] + ["distance_to_true"]
    with open(path, "w", encoding="ascii", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in report.rows:
            cells = [row.label] + [format_complex(v) for v in row.values] + [format_float(row.distance)]
            fh.write(",".join(cells) + "\n")


# --- SVG line plots -----------------------------------------------------------

SVG_WIDTH = 800
SVG_HEIGHT = 400
_MARGIN = {"left": 60, "right": 150, "top": 30, "bottom": 40}
_PALETTE = (
    "#1f77b4",
    "#d62728",
    "#2ca02c",
    "#9467bd",
    "#ff7f0e",
    "#8c564b",
    "#17becf",
    "#7f7f7f",
)


def svg_line_plot(path, series: list[tuple[str, np.ndarray, np.ndarray]], title: str, y_label: str = "") -> None:
    """Minimal self-contained SVG: one polyline per (label, x, y) series."""
    xs_all = np.concatenate([np.asarray(x, dtype=float) for _, x, _ in series])
    ys_all = np.concatenate([np.asarray(y, dtype=float) for _, _, y in series])
    finite = np.isfinite(ys_all)
    x_min, x_max = float(xs_all.min()), float(xs_all.max())
    y_min = float(ys_all[finite].min()) if finite.any() else 0.0
    y_max = float(ys_all[finite].max()) if finite.any() else 1.0
    if x_max == x_min:
        x_max = x_min + 1.0
    if y_max == y_min:
        y_max = y_min + 1.0
    plot_w = SVG_WIDTH - _MARGIN["left"] - _MARGIN["right"]
    plot_h = SVG_HEIGHT - _MARGIN["top"] - _MARGIN["bottom"]

    def px(x: float) -> float:
        return _MARGIN["left"] + (x - x_min) / (x_max - x_min) * plot_w

    def py(y: float) -> float:
        return _MARGIN["top"] + plot_h - (y - y_min) / (y_max - y_min) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_WIDTH}" height="{SVG_HEIGHT}" '
        f'viewBox="0 0 {SVG_WIDTH} {SVG_HEIGHT}">',
        f'<rect width="{SVG_WIDTH}" height="{SVG_HEIGHT}" fill="white"/>',
        f'<text x="{SVG_WIDTH // 2}" y="20" text-anchor="middle" font-size="14">{title}</text>',
        f'<line x1="{_MARGIN["left"]}" y1="{_MARGIN["top"]}" x2="{_MARGIN["left"]}" '
        f'y2="{_MARGIN["top"] + plot_h}" stroke="black"/>',
        f'<line x1="{_MARGIN["left"]}" y1="{_MARGIN["top"] + plot_h}" '
        f'x2="{_MARGIN["left"] + plot_w}" y2="{_MARGIN["top"] + plot_h}" stroke="black"/>',
        f'<text x="{_MARGIN["left"] - 6}" y="{_MARGIN["top"] + 10}" text-anchor="end" '
        f'font-size="11">{y_max:.4g}</text>',
        f'<text x="{_MARGIN["left"] - 6}" y="{_MARGIN["top"] + plot_h}" text-anchor="end" '
        f'font-size="11">{y_min:.4g}</text>',
        f'<text x="{_MARGIN["left"]}" y="{SVG_HEIGHT - 10}" font-size="11">{x_min:.4g}</text>',
        f'<text x="{_MARGIN["left"] + plot_w}" y="{SVG_HEIGHT - 10}" text-anchor="end" '
        f'font-size="11">{x_max:.4g}</text>',
    ]
    if y_label:
        parts.append(
            f'<text x="14" y="{_MARGIN["top"] + plot_h // 2}" font-size="11" '
            f'transform="rotate(-90 14 {_MARGIN["top"] + plot_h // 2})" text-anchor="middle">{y_label}</text>'
        )
    for i, (label, xs, ys) in enumerate(series):
        color = _PALETTE[i % len(_PALETTE)]
        pts = []
        for x, y in zip(np.asarray(xs, dtype=float), np.asarray(ys, dtype=float)):
            if np.isfinite(y):
                pts.append(f"{px(x):.2f},{py(y):.2f}")
        if pts:
            parts.append(f'<polyline points="{" ".join(pts)}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        ly = _MARGIN["top"] + 14 + 16 * i
        lx = SVG_WIDTH - _MARGIN["right"] + 10
        parts.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 18}" y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{lx + 24}" y="{ly}" font-size="11">{label}</text>')
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n", encoding="ascii")


# --- Report assembly ----------------------------------------------------------

TRACE_HEADER = (
    ["step"]
    + [f"x{i}_true" for i in range(1, 5)]
    + ["u_true"]
    + [f"x{i}_pred" for i in range(1, 5)]
    + ["u_pred"]
)


def write_trace_csv(path, part: Partition, plant: PlantSystem, model: TrainedModel) -> None:
    """True vs predicted open-loop states and heat flow over one partition."""
    res = rollout(model, part.x0, part.signals, part.steps)
    pred = res.states[1:, :, 0]
    u_pred = res.u_seq[:, 0]
    u_true = part.signals.a_seq * plant.H * part.signals.b_seq + plant.h
    true = part.states
    with open(path, "w", encoding="ascii", newline="") as fh:
        fh.write(",".join(TRACE_HEADER) + "\n")
        for t in range(part.steps):
            row = [str(t + 1)]
            row += [format_float(v) for v in true[t]]
            row.append(format_float(u_true[t]))
            row += [format_float(v) for v in pred[t]]
            row.append(format_float(u_pred[t]))
            fh.write(",".join(row) + "\n")


@dataclass
class EvalReport:
    best: list[CellResult]  # best cell per (variant, constrained, N)
    champions: dict[str, CellResult]  # best open-loop cell per variant key
    eigen: EigenReport
    slacks: dict[str, SlackSummary]


def build_report(results: list[CellResult], dataset, plant: PlantSystem, bounds: BoundSpec) -> EvalReport:
    best = best_by_variant(results)
    champions: dict[str, CellResult] = {}
    for res in results:
        if res.model is None or res.failed:
            continue
        key = res.model.spec.key
        cur = champions.get(key)
        if cur is None or res.openloop_mse_test < cur.openloop_mse_test:
            champions[key] = res
    labeled = [(key, champions[key].model) for key in sorted(champions)]
    eigen = eigen_report(labeled, plant)
    slacks = {
        key: rollout_violations(model, dataset.test, bounds) for key, model in labeled
    }
    return EvalReport(best=best, champions=champions, eigen=eigen, slacks=slacks)


def write_best_csv(path, best: list[CellResult]) -> None:
    header = ["variant", "constrained", "N", "lr", "restart", "nstep_mse_test", "openloop_mse_test"]
    with open(path, "w", encoding="ascii", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for r in best:
            fh.write(
                ",".join(
                    [
                        r.key.variant,
                        str(int(r.key.constrained)),
                        str(r.key.N),
                        format_float(r.key.lr),
                        str(r.key.restart),
                        format_float(r.nstep_mse_test),
                        format_float(r.openloop_mse_test),
                    ]
                )
                + "\n"
            )


def write_slack_csv(path, slacks: dict[str, SlackSummary]) -> None:
    header = ["model", "mean_slack_x", "max_slack_x", "mean_slack_u", "max_slack_u", "mean_joint"]
    with open(path, "w", encoding="ascii", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for key in sorted(slacks):
            s = slacks[key]
            fh.write(
                ",".join(
                    [
                        key,
                        format_float(s.mean_slack_x),
                        format_float(s.max_slack_x),
                        format_float(s.mean_slack_u),
                        format_float(s.max_slack_u),
                        format_float(s.mean_joint),
                    ]
                )
                + "\n"
            )


def export_artifacts(report: EvalReport, dataset, plant: PlantSystem, out_dir) -> list[Path]:
    """Write tables, traces, transition-matrix CSVs, and SVG figures.

    Layout: ``tables/*.csv``, ``traces/*.csv``, ``figures/*.svg`` under
    ``out_dir``; returns the list of files written.
    """
    out = Path(out_dir)
    tables = out / "tables"
    traces = out / "traces"
    figures = out / "figures"
    for d in (tables, traces, figures):
        d.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    p = tables / "best_by_variant_N.csv"
    write_best_csv(p, report.best)
    written.append(p)
    p = tables / "eigenvalues.csv"
    write_eigen_csv(p, report.eigen)
    written.append(p)
    p = tables / "slack_summary.csv"
    write_slack_csv(p, report.slacks)
    written.append(p)

    p = tables / "A_true.csv"
    write_matrix_csv(p, plant.A)
    written.append(p)
    for key, res in sorted(report.champions.items()):
        p = tables / f"A_{key}.csv"
        write_matrix_csv(p, res.model.transition())
        written.append(p)

    for key, res in sorted(report.champions.items()):
        for part in dataset.partitions():
            p = traces / f"{key}_{part.name}.csv"
            write_trace_csv(p, part, plant, res.model)
            written.append(p)
        part = dataset.test
        ro = rollout(res.model, part.x0, part.signals, part.steps)
        steps = np.arange(1, part.steps + 1)
        p = figures / f"openloop_{key}_test.svg"
        svg_line_plot(
            p,
            [
                ("true", steps, part.observed()),
                ("predicted", steps, ro.states[1:, OBSERVED_INDEX - 1, 0]),
            ],
            title=f"Open-loop room temperature, {key}, test week",
            y_label="degC",
        )
        written.append(p)

    by_key: dict[str, list[CellResult]] = {}
    for r in report.best:
        label = ("c" if r.key.constrained else "") + r.key.variant
        by_key.setdefault(label, []).append(r)
    if by_key:
        nstep_series = []
        open_series = []
        for label in sorted(by_key):
            cells = sorted(by_key[label], key=lambda c: c.key.N)
            ns = np.array([c.key.N for c in cells], dtype=float)
            nstep_series.append((label, ns, np.array([c.nstep_mse_test for c in cells])))
            open_series.append((label, ns, np.array([c.openloop_mse_test for c in cells])))
        p = figures / "nstep_mse_vs_N.svg"
        svg_line_plot(p, nstep_series, title="Best N-step MSE vs horizon", y_label="MSE")
        written.append(p)
        p = figures / "openloop_mse_vs_N.svg"
        svg_line_plot(p, open_series, title="Best open-loop MSE vs horizon", y_label="MSE")
        written.append(p)
    return written
