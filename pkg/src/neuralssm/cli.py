"""Command-line pipeline: simulate | train | report | check.

Each command is deterministic under a fixed config and seed.  Exit codes:
0 success, 1 usage/config problems, 2 data problems, 3 numerical failures.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import analysis, autodiff
from .config import RunConfig, load_config
from .errors import ConfigError, ConvergenceError, DataError, NumericError
from .models import load_checkpoint, pf_transition
from .numerics import SeededRng, char_poly_residual, eigenvalues, format_float, spectral_radius
from .plant import build_default_plant, load_signals_csv, make_dataset, write_partition_csv
from .training import CellKey, CellResult, best_by_variant, sweep, write_results_csv

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> _Parser:
    parser = _Parser(prog="neuralssm", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", type=Path, help="JSON run configuration")
        p.add_argument("--seed", type=int, help="base seed (overrides config)")
        p.add_argument("--jobs", type=int, help="parallel training workers")
        p.add_argument("--scale", choices=("desk", "paper"), help="scale preset")
        p.add_argument("--out", type=Path, help="output directory root")

    p = sub.add_parser("simulate", help="generate the plant dataset and write CSVs")
    common(p)

    p = sub.add_parser("train", help="run the training sweep")
    common(p)
    p.add_argument("--variants", help="comma-separated variants, e.g. gray,white,srnn")
    p.add_argument("--N", dest="horizons", help="comma-separated horizons, e.g. 8,128")
    p.add_argument("--lr", dest="lr_grid", help="comma-separated learning rates")
    p.add_argument("--restarts", type=int, help="restarts per cell")
    p.add_argument("--epochs", type=int, help="epochs per cell")
    p.add_argument("--constrained", choices=("both", "yes", "no"), help="penalty flag filter")

    p = sub.add_parser("report", help="evaluate checkpoints and export tables/figures")
    common(p)

    p = sub.add_parser("check", help="run gradient/spectral self-tests")
    common(p)
    return parser


def _resolve_config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    updates = {}
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.jobs is not None:
        updates["jobs"] = args.jobs
    if args.scale is not None:
        updates["scale"] = args.scale
    if args.out is not None:
        updates["out_dir"] = str(args.out)
    if getattr(args, "variants", None):
        updates["variants"] = tuple(v.strip() for v in args.variants.split(","))
    if getattr(args, "horizons", None):
        updates["horizons"] = tuple(int(n) for n in args.horizons.split(","))
    if getattr(args, "lr_grid", None):
        updates["lr_grid"] = tuple(float(x) for x in args.lr_grid.split(","))
    if getattr(args, "restarts", None) is not None:
        updates["restarts"] = args.restarts
    if getattr(args, "epochs", None) is not None:
        updates["epochs"] = args.epochs
    if getattr(args, "constrained", None):
        flags = {"both": (False, True), "yes": (True,), "no": (False,)}[args.constrained]
        updates["constrained"] = flags
    try:
        return replace(cfg, **updates) if updates else cfg
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _build_dataset(cfg: RunConfig):
    plant = build_default_plant()
    rng = SeededRng(cfg.seed)
    if cfg.dataset_source == "csv":
        signals = load_signals_csv(cfg.dataset_path)
        dataset = make_dataset(plant, rng, weeks=cfg.weeks, signals=signals)
    else:
        dataset = make_dataset(
            plant,
            rng,
            weeks=cfg.weeks,
            noise=cfg.signal_noise,
            m_dot_max=cfg.m_dot_max,
            delta_t_max=cfg.delta_t_max,
        )
    return plant, dataset


def cmd_simulate(cfg: RunConfig) -> int:
    plant, dataset = _build_dataset(cfg)
    data_dir = cfg.out_root() / "data"
    data_dir.mkdir(parents=True, exist_ok=True)
    for part in dataset.partitions():
        write_partition_csv(data_dir / f"{part.name}.csv", part)
    spectrum = eigenvalues(plant.A)
    manifest = {
        "seed": cfg.seed,
        "scale": cfg.scale,
        "observed_index": dataset.observed_index,
        "eigenvalues": [[v.real, v.imag] for v in spectrum],
        "partitions": {p.name: {"rows": p.steps, "start": p.start} for p in dataset.partitions()},
    }
    with open(data_dir / "manifest.json", "w", encoding="ascii") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
        fh.write("\n")
    print(f"wrote {data_dir}/{{train,val,test}}.csv and manifest.json")
    return EXIT_OK


def cmd_train(cfg: RunConfig) -> int:
    _, dataset = _build_dataset(cfg)
    specs = cfg.specs()
    epochs, restarts, lr_grid = cfg.resolved()
    ckpt_dir = cfg.out_root() / "checkpoints"
    ckpt_dir.mkdir(parents=True, exist_ok=True)
    results = sweep(
        specs,
        cfg.horizons,
        lr_grid,
        restarts,
        dataset,
        cfg.train_config(),
        checkpoint_dir=ckpt_dir,
        jobs=cfg.jobs,
        log=print,
    )
    tables = cfg.out_root() / "tables"
    tables.mkdir(parents=True, exist_ok=True)
    write_results_csv(tables / "results.csv", results)
    for res in best_by_variant(results):
        label = ("c" if res.key.constrained else "") + res.key.variant
        print(
            f"best {label} N={res.key.N}: lr={format_float(res.key.lr)} r={res.key.restart} "
            f"val={res.nstep_mse_val:.6g} test={res.nstep_mse_test:.6g} open={res.openloop_mse_test:.6g}"
        )
    if all(r.failed for r in results):
        print("all sweep cells failed", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def _expected_cells(cfg: RunConfig) -> list[CellKey]:
    _, restarts, lr_grid = cfg.resolved()
    keys = []
    for spec in cfg.specs():
        for N in cfg.horizons:
            for lr in lr_grid:
                for r in range(restarts):
                    keys.append(CellKey(spec.variant, spec.constrained, int(N), float(lr), r))
    return keys


def cmd_report(cfg: RunConfig) -> int:
    ckpt_dir = cfg.out_root() / "checkpoints"
    if not ckpt_dir.is_dir() or not any(ckpt_dir.glob("*.json")):
        raise DataError(f"no checkpoints found in {ckpt_dir}")
    expected = _expected_cells(cfg)
    missing = [k.name() for k in expected if not (ckpt_dir / f"{k.name()}.json").exists()]
    if missing:
        raise DataError(f"{ckpt_dir}: missing checkpoints for cells: {', '.join(missing)}")
    plant, dataset = _build_dataset(cfg)
    results = []
    for key in expected:
        model, meta = load_checkpoint(ckpt_dir / f"{key.name()}.json")
        results.append(
            CellResult(
                key=key,
                nstep_mse_val=float(meta["nstep_mse_val"]),
                nstep_mse_test=float(meta["nstep_mse_test"]),
                openloop_mse_test=float(meta["openloop_mse_test"]),
                failed=bool(meta.get("failed", False)),
                model=model,
            )
        )
    report = analysis.build_report(results, dataset, plant, cfg.bounds)
    out = cfg.out_root()
    written = analysis.export_artifacts(report, dataset, plant, out)
    tables = out / "tables"
    write_results_csv(tables / "results.csv", results)
    print(f"wrote {len(written) + 1} artifact files under {out}")
    return EXIT_OK


def cmd_check(cfg: RunConfig) -> int:
    """Quick self-tests of the numerical core; exits 3 on any failure."""
    failures = 0

    def report(name: str, ok: bool, detail: str) -> None:
        nonlocal failures
        failures += 0 if ok else 1
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")

    rng = SeededRng(cfg.seed)
    worst_rho, worst_row = 0.0, (1.0, 0.0)
    ok = True
    for i in range(200):
        r = rng.split(i)
        At = pf_transition(r.uniform(-1, 1, (4, 4)), r.uniform(-1, 1, (4, 4)))
        rows = At.sum(axis=1)
        rho = spectral_radius(At)
        worst_rho = max(worst_rho, rho)
        worst_row = (min(worst_row[0], rows.min()), max(worst_row[1], rows.max()))
        ok = ok and np.all(At > 0) and rows.min() >= 0.9 and rows.max() < 1.0 and rho < 1.0
    report(
        "pf-stability",
        ok,
        f"200 samples, max spectral radius {worst_rho:.6f}, row sums in "
        f"[{worst_row[0]:.6f}, {worst_row[1]:.6f}]",
    )

    worst = 0.0
    r = rng.split(1000)
    for kind_case in range(12):
        a0 = r.uniform(0.2, 1.5, (3, 3))
        b0 = r.uniform(0.2, 1.5, (3, 3))

        def f(x, y):
            z = x.tape.record("hadamard", autodiff.sigmoid(x), autodiff.relu(y))
            return autodiff.sum_of_squares(autodiff.row_softmax(z))

        worst = max(worst, autodiff.finite_difference_check(f, [a0, b0], eps=1e-5))
    report("gradient-fd", worst < 1e-4, f"max relative error {worst:.2e}")

    worst = 0.0
    tri_ok = True
    for i in range(50):
        r = rng.split(2000 + i)
        m = r.uniform(-2, 2, (4, 4))
        norm = float(np.linalg.norm(m))
        for lam in eigenvalues(m):
            worst = max(worst, char_poly_residual(m, lam) / (1.0 + norm))
        tri = np.tril(m)
        vals = sorted(v.real for v in eigenvalues(tri))
        tri_ok = tri_ok and np.allclose(vals, sorted(np.diag(tri)), atol=1e-12)
    report("eigensolver", worst < 1e-6 and tri_ok, f"max det residual {worst:.2e}; triangular exact: {tri_ok}")

    plant = build_default_plant()
    spectrum = [v.real for v in eigenvalues(plant.A)]
    ok = np.allclose(spectrum, [1.0, 0.99, 0.98, 0.25], atol=1e-9)
    report("plant-spectrum", ok, f"{spectrum}")

    return EXIT_OK if failures == 0 else EXIT_NUMERIC


COMMANDS = {
    "simulate": cmd_simulate,
    "train": cmd_train,
    "report": cmd_report,
    "check": cmd_check,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _resolve_config(args)
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericError, ConvergenceError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    raise SystemExit(main())
