import numpy as np
import pytest

from neuralssm.constraints import BoundSpec
from neuralssm.errors import NumericError
from neuralssm.models import ModelSpec, RolloutResult, init_params, rollout_batch, truth_model
from neuralssm.numerics import SeededRng
from neuralssm.plant import Partition, SignalSet, WEEK_STEPS
from neuralssm.training import (
    CellKey,
    OptimizerState,
    TrainConfig,
    _run_cell,
    adamw_step,
    best_by_variant,
    desk_preset,
    make_windows,
    nstep_loss,
    paper_preset,
    sweep,
    train,
    train_model,
    write_results_csv,
)


def ramp_partition(T: int = 12) -> Partition:
    """Tiny synthetic partition whose observed state equals the step index."""
    states = np.tile(np.arange(1.0, T + 1.0).reshape(-1, 1), (1, 4))
    sig = SignalSet(np.full(T, 0.1), np.ones(T), np.zeros((T, 3)))
    return Partition("ramp", 0, np.zeros(4), states, sig)


class TestMakeWindows:
    def test_window_count_full_week(self, dataset):
        batch = make_windows(dataset.train, 128)
        assert batch.count == WEEK_STEPS - 128 + 1 == 1889

    def test_single_window_when_horizon_equals_length(self):
        part = ramp_partition(10)
        batch = make_windows(part, 10)
        assert batch.count == 1

    def test_target_alignment(self):
        part = ramp_partition(6)
        batch = make_windows(part, 2)
        # window k starts at state k and is scored on states k+1, k+2
        assert np.array_equal(batch.x0[0], [0.0, 1.0, 2.0, 3.0, 4.0])
        assert np.array_equal(batch.targets[:, 0], [1.0, 2.0])
        assert np.array_equal(batch.targets[:, 3], [4.0, 5.0])

    def test_horizon_longer_than_partition_rejected(self):
        with pytest.raises(ValueError):
            make_windows(ramp_partition(5), 6)

    def test_stride(self):
        batch = make_windows(ramp_partition(11), 2, stride=3)
        assert np.array_equal(batch.starts, [0, 3, 6, 9])


class TestNstepLoss:
    def make_result(self, pred_obs: np.ndarray, slack_x=None, slack_u=None) -> RolloutResult:
        N, W = pred_obs.shape
        states = np.zeros((N + 1, 4, W))
        states[1:, 3, :] = pred_obs
        return RolloutResult(
            states=states,
            u_seq=np.zeros((N, W)),
            slack_x=np.zeros((N, 4, W)) if slack_x is None else slack_x,
            slack_u=np.zeros((N, W)) if slack_u is None else slack_u,
        )

    def test_perfect_prediction_zero(self):
        pred = np.array([[1.0], [2.0]])
        res = self.make_result(pred)
        assert nstep_loss(res, pred, 1.0, 1.0) == 0.0

    def test_single_step_squared_error(self):
        res = self.make_result(np.array([[2.0]]))
        assert nstep_loss(res, np.array([[0.0]]), 0.0, 0.0) == pytest.approx(4.0)

    def test_slack_only_term(self):
        slack_x = np.zeros((1, 4, 1))
        slack_x[0, 0, 0] = 1.0
        res = self.make_result(np.array([[0.0]]), slack_x=slack_x)
        assert nstep_loss(res, np.array([[0.0]]), 0.5, 0.0) == pytest.approx(0.5)

    def test_window_order_invariance(self, dataset):
        model = init_params(ModelSpec(variant="gray", constrained=True), SeededRng(3))
        batch = make_windows(dataset.train, 4)
        sl = np.arange(12)
        res = rollout_batch(model, batch.x0[:, sl], batch.a[:, sl], batch.b[:, sl], batch.d[:, :, sl],
                            bounds=BoundSpec(), window_starts=batch.starts[sl])
        loss = nstep_loss(res, batch.targets[:, sl], 1.0, 1.0)
        perm = np.array([7, 2, 9, 0, 4, 11, 1, 3, 10, 6, 5, 8])
        res_p = rollout_batch(model, batch.x0[:, perm], batch.a[:, perm], batch.b[:, perm], batch.d[:, :, perm],
                              bounds=BoundSpec(), window_starts=batch.starts[perm])
        loss_p = nstep_loss(res_p, batch.targets[:, perm], 1.0, 1.0)
        assert loss == pytest.approx(loss_p, rel=1e-12)


class TestAdamW:
    def test_first_step_hand_oracle(self):
        # one scalar parameter, g = 1, lr = 0.01, wd = 0:
        # m = 0.1, v = 0.001, m_hat = 1, v_hat = 1 -> step = lr / (1 + eps)
        params = {"w": np.array([[1.0]])}
        state = OptimizerState.for_params(params, ["w"])
        adamw_step(params, {"w": np.array([[1.0]])}, state, lr=0.01, weight_decay=0.0)
        assert params["w"][0, 0] == pytest.approx(1.0 - 0.01 / (1.0 + 1e-8), abs=1e-12)

    def test_pure_decay(self):
        params = {"w": np.array([[2.0]])}
        state = OptimizerState.for_params(params, ["w"])
        adamw_step(params, {"w": np.array([[0.0]])}, state, lr=0.1, weight_decay=0.01)
        assert params["w"][0, 0] == pytest.approx(2.0 * (1.0 - 0.001))

    def test_elementwise_independence(self):
        params = {"w": np.array([[1.0, 1.0]]), "v": np.array([[1.0]])}
        state = OptimizerState.for_params(params, ["w", "v"])
        grads = {"w": np.array([[0.5, 0.5]]), "v": np.array([[0.5]])}
        adamw_step(params, grads, state, lr=0.02, weight_decay=0.004)
        assert params["w"][0, 0] == params["w"][0, 1] == params["v"][0, 0]

    def test_step_counter(self):
        params = {"w": np.ones((1, 1))}
        state = OptimizerState.for_params(params, ["w"])
        for expected in (1, 2, 3):
            adamw_step(params, {"w": np.ones((1, 1))}, state, 0.01, 0.0)
            assert state.t == expected

    def test_non_finite_gradient_rejected(self):
        params = {"w": np.ones((1, 1))}
        state = OptimizerState.for_params(params, ["w"])
        with pytest.raises(NumericError, match="w"):
            adamw_step(params, {"w": np.array([[np.nan]])}, state, 0.01, 0.0)

    def test_zero_learning_rate_is_identity(self):
        params = {"w": np.array([[1.5, -0.5]])}
        state = OptimizerState.for_params(params, ["w"])
        for _ in range(3):
            adamw_step(params, {"w": np.array([[2.0, -3.0]])}, state, lr=0.0, weight_decay=0.01)
        assert np.array_equal(params["w"], [[1.5, -0.5]])


class TestTrainConfig:
    def test_presets(self):
        desk = desk_preset()
        paper = paper_preset()
        assert (desk.epochs, desk.restarts) == (2000, 3)
        assert (paper.epochs, paper.restarts) == (15000, 30)
        assert min(paper.lr_grid) >= 0.001 and max(paper.lr_grid) <= 0.03

    def test_learning_rate_validated(self):
        with pytest.raises(ValueError):
            TrainConfig(learning_rate=1.5)

    def test_horizon_validated(self):
        with pytest.raises(ValueError):
            TrainConfig(horizon=0)


class TestTrainModel:
    def test_zero_epochs_returns_init(self, small_dataset):
        spec = ModelSpec(variant="gray")
        model = init_params(spec, SeededRng(4))
        cfg = TrainConfig(horizon=8, epochs=0)
        rec = train_model(model, cfg, small_dataset.train, small_dataset.val)
        assert rec.loss_trace == []
        for k in model.params:
            assert np.array_equal(rec.model.params[k], model.params[k])

    def test_zero_learning_rate_keeps_params(self, small_dataset):
        spec = ModelSpec(variant="gray")
        model = init_params(spec, SeededRng(4))
        cfg = TrainConfig(horizon=8, epochs=5, learning_rate=1e-12, weight_decay=0.0, eval_every=5)
        rec = train_model(model, cfg, small_dataset.train, small_dataset.val)
        # effectively zero step: parameters move by at most lr per entry
        for k in model.params:
            assert np.allclose(rec.model.params[k], model.params[k], atol=1e-10)

    def test_loss_decreases_on_average(self, small_dataset):
        spec = ModelSpec(variant="gray", constrained=True)
        model = init_params(spec, SeededRng(5))
        cfg = TrainConfig(horizon=8, epochs=60, eval_every=20)
        rec = train_model(model, cfg, small_dataset.train, small_dataset.val)
        assert rec.loss_trace[-1] < rec.loss_trace[0]
        assert not rec.failed

    def test_best_val_is_minimum_of_trace(self, small_dataset):
        spec = ModelSpec(variant="gray")
        model = init_params(spec, SeededRng(6))
        cfg = TrainConfig(horizon=8, epochs=40, eval_every=10)
        rec = train_model(model, cfg, small_dataset.train, small_dataset.val)
        assert rec.best_val_mse == pytest.approx(min(v for _, v in rec.val_trace))

    def test_nan_parameters_fail_gracefully(self, small_dataset):
        spec = ModelSpec(variant="gray")
        model = init_params(spec, SeededRng(7))
        model.params["B"][0, 0] = np.nan
        cfg = TrainConfig(horizon=8, epochs=3)
        rec = train_model(model, cfg, small_dataset.train, small_dataset.val)
        assert rec.failed
        assert "epoch 1" in rec.fail_reason

    def test_white_truth_has_negligible_loss(self, plant, dataset):
        model = truth_model(plant)
        batch = make_windows(dataset.train, 8)
        res = rollout_batch(model, batch.x0, batch.a, batch.b, batch.d)
        assert nstep_loss(res, batch.targets, 1.0, 1.0) < 1e-12

    def test_train_entry_point(self, small_dataset):
        rec = train(ModelSpec(variant="gray"), TrainConfig(horizon=8, epochs=2, seed=9), small_dataset)
        assert len(rec.loss_trace) == 2


class TestSweep:
    def test_thirty_pairs_contract(self):
        # 6 (variant, constrained) pairs x 5 horizons = 30 groups
        specs = [
            ModelSpec(variant=v, constrained=c) for v in ("black", "gray", "white") for c in (False, True)
        ]
        keys = [(s.variant, s.constrained, N) for s in specs for N in (8, 16, 32, 64, 128)]
        assert len(keys) == 30

    def test_sweep_runs_and_sorts(self, small_dataset):
        specs = [ModelSpec(variant="gray"), ModelSpec(variant="white")]
        cfg = TrainConfig(epochs=2, seed=0)
        res = sweep(specs, (4, 8), (0.01,), 1, small_dataset, cfg)
        assert len(res) == 4
        assert [r.key.variant for r in res] == ["gray", "gray", "white", "white"]
        assert all(np.isfinite(r.nstep_mse_val) for r in res)

    def test_restart_reproducible_in_isolation(self, small_dataset):
        spec = ModelSpec(variant="gray")
        cfg = TrainConfig(epochs=3, seed=12)
        full = sweep([spec], (4,), (0.01,), 2, small_dataset, cfg)
        target = next(r for r in full if r.key.restart == 1)
        alone = _run_cell((spec.to_dict(), CellKey("gray", False, 4, 0.01, 1), cfg, small_dataset, None))
        assert alone.nstep_mse_val == target.nstep_mse_val
        for k in target.model.params:
            assert np.array_equal(alone.model.params[k], target.model.params[k])

    def test_best_by_variant_minimum(self, small_dataset):
        spec = ModelSpec(variant="gray")
        cfg = TrainConfig(epochs=2, seed=1)
        res = sweep([spec], (4,), (0.01, 0.03), 2, small_dataset, cfg)
        best = best_by_variant(res)
        assert len(best) == 1
        assert best[0].nstep_mse_val == min(r.nstep_mse_val for r in res)

    def test_checkpoint_resume_skips_completed(self, small_dataset, tmp_path):
        spec = ModelSpec(variant="gray")
        cfg = TrainConfig(epochs=2, seed=3)
        first = sweep([spec], (4,), (0.01,), 1, small_dataset, cfg, checkpoint_dir=tmp_path)
        files = list(tmp_path.glob("*.json"))
        assert len(files) == 1
        stamp = files[0].read_bytes()
        second = sweep([spec], (4,), (0.01,), 1, small_dataset, cfg, checkpoint_dir=tmp_path)
        assert files[0].read_bytes() == stamp
        assert second[0].nstep_mse_val == first[0].nstep_mse_val

    def test_constrained_twins_share_initialization(self):
        key_c = CellKey("gray", True, 8, 0.01, 0)
        key_u = CellKey("gray", False, 8, 0.01, 0)
        assert key_c.split_path() == key_u.split_path()
        assert key_c.name() != key_u.name()

    def test_parallel_jobs_match_serial(self, small_dataset, tmp_path):
        spec = ModelSpec(variant="white")
        cfg = TrainConfig(epochs=2, seed=5)
        serial = sweep([spec], (4,), (0.01,), 2, small_dataset, cfg)
        parallel = sweep([spec], (4,), (0.01,), 2, small_dataset, cfg, jobs=2)
        for a, b in zip(serial, parallel):
            assert a.key == b.key
            assert a.nstep_mse_val == b.nstep_mse_val

    def test_results_csv_layout(self, small_dataset, tmp_path):
        spec = ModelSpec(variant="gray")
        cfg = TrainConfig(epochs=1, seed=2)
        res = sweep([spec], (4,), (0.01,), 1, small_dataset, cfg)
        path = tmp_path / "results.csv"
        write_results_csv(path, res)
        lines = path.read_text().splitlines()
        assert lines[0] == "variant,constrained,N,lr,restart,nstep_mse_val,nstep_mse_test,openloop_mse_test"
        assert lines[1].startswith("gray,0,4,0.01,0,")
