"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with ``pytest tests/test_acceptance.py -v -s``.  The training-based
criteria use the desk-scale preset (2000 epochs, 3 restarts) and respect the
stated wall-clock budgets on a single core.
"""

import time

import numpy as np
import pytest

from neuralssm import autodiff as ad
from neuralssm.analysis import (
    eigen_report,
    nstep_mse_eval,
    open_loop_mse,
    rollout_violations,
    write_eigen_csv,
)
from neuralssm.autodiff import finite_difference_check
from neuralssm.constraints import BoundSpec
from neuralssm.models import (
    ModelSpec,
    init_params,
    pf_transition,
    rollout_batch,
    rollout_tape,
    truth_frozen_gray,
    truth_model,
)
from neuralssm.numerics import SeededRng, char_poly_residual, eigenvalues, spectral_radius
from neuralssm.plant import build_default_plant, make_dataset
from neuralssm.training import (
    TrainConfig,
    _nstep_loss_tape,
    make_windows,
    nstep_loss,
    sweep,
    train_model,
)

from test_autodiff import ALL_KINDS, _case


def _report(num: int, ok: bool, detail: str) -> None:
    print(f"\n[criterion {num:02d}] {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, detail


@pytest.fixture(scope="module")
def plant():
    return build_default_plant()


@pytest.fixture(scope="module")
def dataset(plant):
    return make_dataset(plant, SeededRng(0))


@pytest.fixture(scope="module")
def trend_results(dataset):
    """Constrained gray-box cells at N in {8, 128}: desk epochs, 3 restarts."""
    spec = ModelSpec(variant="gray", constrained=True)
    cfg = TrainConfig(seed=0)
    t0 = time.perf_counter()
    results = sweep([spec], (8, 128), (0.01,), 3, dataset, cfg)
    return results, time.perf_counter() - t0


@pytest.fixture(scope="module")
def efficacy_results(dataset):
    """Black-box constrained/unconstrained twins at N=8 under shared seeds."""
    specs = [ModelSpec(variant="black", constrained=True), ModelSpec(variant="black", constrained=False)]
    cfg = TrainConfig(seed=0)
    return sweep(specs, (8,), (0.01,), 3, dataset, cfg)


def test_criterion_01_spectral_stability():
    t0 = time.perf_counter()
    rng = SeededRng(2024)
    violations = 0
    worst_rho = 0.0
    for i in range(1000):
        r = rng.split(i)
        At = pf_transition(r.uniform(-3.0, 3.0, (4, 4)), r.uniform(-3.0, 3.0, (4, 4)))
        rows = At.sum(axis=1)
        rho = spectral_radius(At)
        worst_rho = max(worst_rho, rho)
        if not (np.all(At >= 0.0) and rows.min() >= 0.9 and rows.max() < 1.0 and rho < 1.0):
            violations += 1
    elapsed = time.perf_counter() - t0
    _report(
        1,
        violations == 0 and elapsed < 5.0,
        f"1000 random transitions, 0 expected violations, got {violations}; "
        f"max spectral radius {worst_rho:.6f}; {elapsed:.2f}s (< 5s)",
    )


def test_criterion_02_autodiff_correctness(dataset):
    t0 = time.perf_counter()
    worst_per_kind = {}
    for kind in ALL_KINDS:
        rng = SeededRng(555)
        worst = 0.0
        for i in range(100):
            leaves, f = _case(kind, rng.split(i))
            worst = max(worst, finite_difference_check(f, leaves, eps=1e-5))
        worst_per_kind[kind] = worst
    kinds_ok = all(v < 1e-5 for v in worst_per_kind.values())

    spec = ModelSpec(variant="gray", constrained=True)
    model = init_params(spec, SeededRng(77))
    batch = make_windows(dataset.train, 4)
    sl = slice(0, 3)
    x0, a, b, d = batch.x0[:, sl], batch.a[:, sl], batch.b[:, sl], batch.d[:, :, sl]
    targets = batch.targets[:, sl]
    bounds = BoundSpec()
    names = sorted(model.params)

    def rollout_loss(*tvs):
        leaves = dict(zip(names, tvs))
        ro = rollout_tape(tvs[0].tape, leaves, spec, x0, a, b, d, bounds=bounds,
                          window_starts=batch.starts[sl])
        return _nstep_loss_tape(tvs[0].tape, ro, targets, bounds.lam, bounds.mu)

    rollout_err = finite_difference_check(rollout_loss, [model.params[n] for n in names], eps=1e-5)
    elapsed = time.perf_counter() - t0
    worst_kind = max(worst_per_kind, key=worst_per_kind.get)
    _report(
        2,
        kinds_ok and rollout_err < 1e-4 and elapsed < 30.0,
        f"100 cases/kind, worst {worst_per_kind[worst_kind]:.2e} ({worst_kind}) < 1e-5; "
        f"full 4-step rollout gradient error {rollout_err:.2e} < 1e-4; {elapsed:.1f}s (< 30s)",
    )


def test_criterion_03_eigensolver_oracle():
    rng = SeededRng(331)
    worst = 0.0
    for i in range(500):
        m = rng.split(i).uniform(-2.0, 2.0, (4, 4))
        bound = 1e-6 * (1.0 + float(np.linalg.norm(m)))
        for lam in eigenvalues(m):
            worst = max(worst, char_poly_residual(m, lam) / bound)
    tri_worst = 0.0
    for i in range(100):
        tri = np.tril(rng.split(10_000 + i).uniform(-2.0, 2.0, (4, 4)))
        got = sorted(v.real for v in eigenvalues(tri))
        tri_worst = max(tri_worst, float(np.max(np.abs(np.array(got) - np.sort(np.diag(tri))))))
    _report(
        3,
        worst < 1.0 and tri_worst < 1e-12,
        f"500 matrices: max residual ratio {worst:.2e} (< 1); "
        f"triangular diagonal error {tri_worst:.2e} (< 1e-12)",
    )


def test_criterion_04_ground_truth_spectrum(plant):
    vals = eigenvalues(plant.A)
    err = max(abs(v - t) for v, t in zip(vals, [1.0, 0.99, 0.98, 0.25]))
    _report(4, err < 1e-9, f"plant spectrum {[v.real for v in vals]}, max deviation {err:.2e} (< 1e-9)")


def test_criterion_05_exact_model_sanity(plant, dataset):
    model = truth_model(plant)
    batch = make_windows(dataset.train, 32)
    res = rollout_batch(model, batch.x0, batch.a, batch.b, batch.d)
    train_loss = nstep_loss(res, batch.targets, 1.0, 1.0)
    ol = open_loop_mse(model, dataset.test)
    _report(
        5,
        train_loss < 1e-12 and ol < 1e-12,
        f"truth-embedded white box: 32-step training loss {train_loss:.2e}, "
        f"open-loop MSE {ol:.2e} (both < 1e-12), no training",
    )


def test_criterion_06_gray_box_recovery(plant, dataset):
    t0 = time.perf_counter()
    model = truth_frozen_gray(plant, SeededRng(6).split(0))
    cfg = TrainConfig(horizon=32, epochs=2000, learning_rate=0.01, seed=6)
    record = train_model(model, cfg, dataset.train, dataset.val)
    H_eff, _ = record.model.bilinear_coefficients()
    rel = abs(H_eff - plant.H) / plant.H
    elapsed = time.perf_counter() - t0
    _report(
        6,
        (not record.failed) and rel < 0.05 and elapsed < 120.0,
        f"recovered H={H_eff:.1f} vs true {plant.H:.1f} ({100 * rel:.3f}% error, < 5%); "
        f"{elapsed:.1f}s (< 2min)",
    )


def test_criterion_07_trend_reproduction(trend_results):
    results, elapsed = trend_results
    open_best = {N: min(r.openloop_mse_test for r in results if r.key.N == N) for N in (8, 128)}
    nstep_best = {N: min(r.nstep_mse_test for r in results if r.key.N == N) for N in (8, 128)}
    ok = open_best[128] < open_best[8] and nstep_best[128] > nstep_best[8] and elapsed < 600.0
    _report(
        7,
        ok,
        f"constrained gray box: best open-loop MSE {open_best[8]:.3f} (N=8) -> "
        f"{open_best[128]:.3f} (N=128, must drop); best N-step MSE {nstep_best[8]:.3f} -> "
        f"{nstep_best[128]:.3f} (must rise); 3 restarts/cell, {elapsed:.0f}s (< 600s)",
    )


def test_criterion_08_constraint_efficacy(dataset, efficacy_results, trend_results):
    bounds = BoundSpec()
    con, unc = [], []
    for res in efficacy_results:
        summary = rollout_violations(res.model, dataset.test, bounds)
        (con if res.key.constrained else unc).append(summary.mean_joint)
    mean_con, mean_unc = float(np.mean(con)), float(np.mean(unc))

    dominant = []
    for res in list(efficacy_results) + list(trend_results[0]):
        lam1 = abs(eigenvalues(res.model.transition())[0])
        dominant.append(lam1)
    dom_ok = all(0.9 <= d < 1.0 for d in dominant)
    _report(
        8,
        mean_con <= 0.1 * mean_unc and dom_ok,
        f"mean joint slack: constrained {mean_con:.5f} <= 10% of unconstrained {mean_unc:.5f} "
        f"(shared init seeds, 3 restarts); dominant eigenvalues in [0.9, 1): "
        f"[{min(dominant):.4f}, {max(dominant):.4f}] over {len(dominant)} models",
    )


def test_criterion_09_srnn_contrast(dataset, plant, tmp_path):
    spec = ModelSpec(variant="srnn", transition="raw")
    model = init_params(spec, SeededRng(9))
    cfg = TrainConfig(horizon=8, epochs=150, learning_rate=0.01, seed=9)
    record = train_model(model, cfg, dataset.train, dataset.val)
    trained_ok = not record.failed and record.loss_trace[-1] < record.loss_trace[0]

    rotation = model.copy()
    theta = 0.7
    A = np.zeros((4, 4))
    A[:2, :2] = 0.6 * np.array([[np.cos(theta), np.sin(theta)], [-np.sin(theta), np.cos(theta)]])
    A[2, 2], A[3, 3] = 0.4, 0.2
    rotation.params["A"] = A
    report = eigen_report([("srnn", rotation)], plant)
    vals = report.by_label("srnn").values
    pair_ok = vals[0].imag > 0 and vals[1] == vals[0].conjugate()
    path = tmp_path / "eigen.csv"
    write_eigen_csv(path, report)
    printed = path.read_text().splitlines()[2]
    csv_ok = "+" in printed and "i" in printed
    _report(
        9,
        trained_ok and pair_ok and csv_ok,
        f"S-RNN trained unconstrained (loss {record.loss_trace[0]:.3f} -> {record.loss_trace[-1]:.3f}); "
        f"rotation-like transition reports conjugate pair {vals[0]:.3f} / {vals[1]:.3f} in the eigen table",
    )


def test_criterion_10_determinism(tmp_path):
    import json

    from neuralssm.cli import main

    doc = {
        "seed": 3,
        "scale": "desk",
        "run_id": "det",
        "train": {"variants": ["gray"], "constrained": [True], "horizons": [8], "lr_grid": [0.01]},
    }
    outputs = []
    for run in ("one", "two"):
        out = tmp_path / run
        cfg_path = tmp_path / f"{run}.json"
        doc["out_dir"] = str(out)
        cfg_path.write_text(json.dumps(doc))
        assert main(["simulate", "--config", str(cfg_path)]) == 0
        assert main(["train", "--config", str(cfg_path)]) == 0
        assert main(["report", "--config", str(cfg_path)]) == 0
        root = out / "det"
        outputs.append(
            {
                "results": (root / "tables" / "results.csv").read_bytes(),
                "best": (root / "tables" / "best_by_variant_N.csv").read_bytes(),
                "eigen": (root / "tables" / "eigenvalues.csv").read_bytes(),
                "data": (root / "data" / "train.csv").read_bytes(),
            }
        )
    same = {k: outputs[0][k] == outputs[1][k] for k in outputs[0]}
    _report(
        10,
        all(same.values()),
        f"two desk-preset pipeline runs byte-identical: {same}",
    )
