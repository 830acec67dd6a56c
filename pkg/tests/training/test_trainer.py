import logging
import numpy as np
import pytest
from motion.synth import synth_dataset
from motion.windows import WindowDataset
from network.model import init_model
from training.config import TrainConfig, horizon_grid
from training import trainer
from training.trainer import (
    baseline_mpjpe, batch_loss_and_grad, converged, evaluate, evaluate_by_source, fit_input_scale,
    shard_bounds, smoothed_losses, train,
)
from utils.errors import (
    ConfigError, DivergenceError, EmptyDatasetError, MotionShapeError, NumericalError,
)


@pytest.fixture
def windows(small_config):
    seqs = synth_dataset(joints=small_config.joints, frames=60, count=3, seed=11)
    return WindowDataset.from_sequences(seqs, small_config.lookback, small_config.horizon, stride=2)


def test_zero_steps_returns_initial_model(small_config, windows):
    result = train(small_config, TrainConfig(total_steps=0), windows)
    init = init_model(small_config)
    for (name, a), (_, b) in zip(init.named_tensors(), result.params.named_tensors()):
        np.testing.assert_array_equal(a, b, err_msg=name)
    assert result.history == []


def test_training_is_deterministic(small_config, tiny_train_config, windows):
    a = train(small_config, tiny_train_config, windows, validation=windows)
    b = train(small_config, tiny_train_config, windows, validation=windows)
    for (name, x), (_, y) in zip(a.params.named_tensors(), b.params.named_tensors()):
        np.testing.assert_array_equal(x, y, err_msg=name)
    np.testing.assert_array_equal(a.losses, b.losses)


def test_history_and_evaluations(small_config, tiny_train_config, windows):
    result = train(small_config, tiny_train_config, windows, validation=windows)
    frame = result.history_frame()
    assert list(frame.columns) == ['step', 'loss', 'lr']
    assert frame['step'].tolist() == [1, 2, 3, 4, 5]
    assert frame['lr'].tolist() == [3e-4, 3e-4, 3e-4, 1e-5, 1e-5]
    assert np.all(np.isfinite(frame['loss']))
    # every eval_interval steps and after the last step
    assert [record.step for record in result.evaluations] == [2, 4, 5]
    assert list(result.evaluations[-1].mpjpe) == horizon_grid(small_config.horizon)
    assert result.state.step == 5


def test_training_changes_output_projection(small_config, tiny_train_config, windows):
    result = train(small_config, tiny_train_config, windows)
    assert np.any(result.params.w2.weight)


def test_rejects_empty_training_set(small_config, tiny_train_config):
    seqs = synth_dataset(joints=small_config.joints, frames=10, count=2)
    empty = WindowDataset.from_sequences(seqs, small_config.lookback, small_config.horizon)
    assert len(empty) == 0
    with pytest.raises(EmptyDatasetError):
        train(small_config, tiny_train_config, empty)


def test_rejects_wrong_joint_count(small_config, tiny_train_config):
    seqs = synth_dataset(joints=3, frames=40, count=2)
    data = WindowDataset.from_sequences(seqs, small_config.lookback, small_config.horizon)
    with pytest.raises(MotionShapeError):
        train(small_config, tiny_train_config, data)


def test_empty_validation_is_skipped(small_config, tiny_train_config, windows, caplog):
    empty = WindowDataset.from_sequences([], small_config.lookback, small_config.horizon,
                                         feature_dim=small_config.feature_dim)
    with caplog.at_level(logging.WARNING):
        result = train(small_config, tiny_train_config, windows, validation=empty)
    assert result.evaluations == []
    assert 'empty' in caplog.text


def test_rejects_bad_horizons(small_config, windows):
    cfg = TrainConfig(total_steps=1, horizons=[small_config.horizon + 1])
    with pytest.raises(ConfigError):
        train(small_config, cfg, windows)


def test_threaded_gradients_match_single_thread(small_config, tiny_train_config, windows):
    single = train(small_config, tiny_train_config, windows)
    threaded = train(small_config, tiny_train_config.with_overrides(threads=3), windows)
    for (name, x), (_, y) in zip(single.params.named_tensors(), threaded.params.named_tensors()):
        np.testing.assert_allclose(x, y, rtol=1e-9, atol=1e-12, err_msg=name)


def test_sharded_batch_gradient_matches_whole_batch(small_config, windows):
    from concurrent.futures import ThreadPoolExecutor

    params = init_model(small_config)
    histories, targets = windows.batch(np.arange(7))
    whole_loss, whole = batch_loss_and_grad(params, histories, targets)
    with ThreadPoolExecutor(max_workers=3) as executor:
        shard_loss, sharded = batch_loss_and_grad(params, histories, targets, executor, 3)
    assert shard_loss == pytest.approx(whole_loss, rel=1e-12)
    for (name, x), (_, y) in zip(whole.named_tensors(), sharded.named_tensors()):
        np.testing.assert_allclose(x, y, rtol=1e-10, atol=1e-14, err_msg=name)


def test_shard_bounds():
    assert shard_bounds(7, 3) == [(0, 2), (2, 5), (5, 7)]
    assert shard_bounds(2, 4) == [(0, 1), (1, 2)]
    assert shard_bounds(5, 1) == [(0, 5)]


def test_baseline_equals_untrained_model(small_config, windows):
    horizons = horizon_grid(small_config.horizon)
    assert evaluate(init_model(small_config), windows, horizons) == baseline_mpjpe(windows, horizons)


def test_evaluate_rejects_empty_dataset(small_config):
    empty = WindowDataset.from_sequences([], small_config.lookback, small_config.horizon,
                                         feature_dim=small_config.feature_dim)
    with pytest.raises(EmptyDatasetError):
        baseline_mpjpe(empty, [1])


def test_smoothed_losses():
    smoothed = smoothed_losses([4.0, 2.0, 0.0, 2.0], window=2)
    np.testing.assert_allclose(smoothed, [4.0, 3.0, 1.0, 1.0])
    with pytest.raises(ValueError):
        smoothed_losses([1.0], window=0)


def test_converged():
    assert converged(np.linspace(10.0, 1.0, 200), window=10)
    assert not converged(np.linspace(1.0, 10.0, 200), window=10)
    assert not converged([1.0])


# -- input scale ------------------------------------------------------------

def test_fit_input_scale_is_rms_offset_from_last_pose():
    histories = np.zeros((2, 3, 3))
    histories[0, 0] = [3.0, 0.0, 0.0]
    histories[1, 1] = [0.0, -4.0, 0.0]
    data = WindowDataset(histories, np.zeros((2, 1, 3)), ['a', 'b'], [0, 0])
    assert fit_input_scale(data) == pytest.approx(np.sqrt(25.0 / 18.0))


def test_fit_input_scale_on_static_data_is_one(small_config):
    seqs = synth_dataset(joints=small_config.joints, frames=30, count=2, mode='const')
    data = WindowDataset.from_sequences(seqs, small_config.lookback, small_config.horizon)
    assert fit_input_scale(data) == 1.0


def test_train_fits_input_scale(small_config, tiny_train_config, windows):
    result = train(small_config, tiny_train_config, windows)
    assert small_config.input_scale is None
    assert result.params.config.input_scale == pytest.approx(fit_input_scale(windows))
    assert result.params.config.input_scale > 10.0


def test_train_keeps_explicit_input_scale(small_config, tiny_train_config, windows):
    config = small_config.with_overrides(input_scale=42.0)
    assert train(config, tiny_train_config, windows).params.config.input_scale == 42.0
    given = init_model(small_config)
    assert train(small_config, tiny_train_config, windows, params=given).params.config.input_scale is None


# -- divergence -------------------------------------------------------------

def test_overflowing_forward_pass_reports_step(small_config, windows):
    config = small_config.with_overrides(squash_input=False, degree=9)
    cfg = TrainConfig(batch_size=4, total_steps=20, decay_step=20, eval_interval=100,
                      lr_init=1e40, lr_final=1e40)
    with pytest.raises(DivergenceError) as info:
        train(config, cfg, windows)
    assert info.value.step is not None and 2 <= info.value.step <= 20
    assert f'step {info.value.step}' in str(info.value)
    assert isinstance(info.value.__cause__, NumericalError)


def test_non_finite_loss_reports_step(small_config, tiny_train_config, windows, monkeypatch):
    def nan_loss(params, histories, targets, executor=None, shards=1):
        return float('nan'), params.zeros_like()

    monkeypatch.setattr(trainer, 'batch_loss_and_grad', nan_loss)
    with pytest.raises(DivergenceError, match='loss became nan') as info:
        train(small_config, tiny_train_config, windows)
    assert info.value.step == 1


# -- per-source evaluation --------------------------------------------------

def test_evaluate_by_source(small_config, windows):
    horizons = horizon_grid(small_config.horizon)
    params = init_model(small_config)
    table = evaluate_by_source(params, windows, horizons)

    assert table['source'].tolist() == ['seq_000', 'seq_001', 'seq_002']
    assert table['windows'].sum() == len(windows)
    assert table.columns.tolist() == (['source', 'windows'] + [f'mpjpe@{h}' for h in horizons]
                                      + [f'baseline@{h}' for h in horizons])
    for h in horizons:
        np.testing.assert_array_equal(table[f'mpjpe@{h}'], table[f'baseline@{h}'])
        weighted = np.sum(table[f'mpjpe@{h}'] * table['windows']) / len(windows)
        assert weighted == pytest.approx(evaluate(params, windows, [h])[h], rel=1e-12)


def test_evaluate_by_source_rejects_empty_dataset(small_config):
    empty = WindowDataset.from_sequences([], small_config.lookback, small_config.horizon,
                                         feature_dim=small_config.feature_dim)
    with pytest.raises(EmptyDatasetError):
        evaluate_by_source(init_model(small_config), empty, [1])
