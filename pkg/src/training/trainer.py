"""
Minibatch training loop, evaluation and the zero-velocity reference numbers
"""
import logging
from concurrent.futures import Executor, ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple
import numpy as np
import pandas as pd
from tqdm import tqdm
from motion.windows import WindowDataset, zero_velocity_baseline
from network.config import ModelConfig
from network.model import ModelParams, forward, init_model, loss_and_grad, per_sample_mpjpe
from training.config import TrainConfig
from training.optimizer import TrainState, adam_step, lr_at
from utils.errors import (
    DivergenceError, EmptyDatasetError, MotionShapeError, NumericalError, ShapeMismatchError,
)
from utils.log import show_progress

DEFAULT_SMOOTHING_WINDOW = 100
EVAL_CHUNK = 256  # windows per forward pass during evaluation

logger = logging.getLogger(__name__)


@dataclass
class HistoryRow:
    step: int
    loss: float
    lr: float


@dataclass
class EvalRecord:
    step: int
    mpjpe: Dict[int, float]


@dataclass
class TrainResult:
    params: ModelParams
    history: List[HistoryRow] = field(default_factory=list)
    evaluations: List[EvalRecord] = field(default_factory=list)
    state: Optional[TrainState] = None

    @property
    def losses(self) -> np.ndarray:
        return np.array([row.loss for row in self.history], dtype=np.float64)

    def history_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {'step': [row.step for row in self.history],
             'loss': [row.loss for row in self.history],
             'lr': [row.lr for row in self.history]},
            columns=['step', 'loss', 'lr'],
        )


def smoothed_losses(losses: Sequence[float], window: int = DEFAULT_SMOOTHING_WINDOW) -> np.ndarray:
    """Trailing moving average; the first entries average over what is available"""
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    series = pd.Series(np.asarray(losses, dtype=np.float64))
    return series.rolling(window, min_periods=1).mean().to_numpy()


def converged(losses: Sequence[float], window: int = DEFAULT_SMOOTHING_WINDOW) -> bool:
    """Smoothed loss at the end is below the smoothed loss at 10 % of training"""
    smoothed = smoothed_losses(losses, window)
    if len(smoothed) < 2:
        return False
    early = smoothed[max(0, len(smoothed) // 10 - 1)]
    return bool(smoothed[-1] < early)


# -- evaluation -------------------------------------------------------------

def _per_sample_errors(predict_fn: Callable[[np.ndarray], np.ndarray], dataset: WindowDataset,
                       horizons: Sequence[int]) -> Dict[int, np.ndarray]:
    errors = {h: [] for h in horizons}
    for lo in range(0, len(dataset), EVAL_CHUNK):
        histories = dataset.histories[lo:lo + EVAL_CHUNK]
        targets = dataset.targets[lo:lo + EVAL_CHUNK]
        preds = predict_fn(histories)
        for h in horizons:
            if not 1 <= h <= targets.shape[1]:
                raise IndexError(f"horizon {h} outside 1..{targets.shape[1]}")
            errors[h].append(per_sample_mpjpe(preds, targets, h))
    return {h: np.concatenate(chunks) for h, chunks in errors.items()}


def _dataset_mpjpe(predict_fn, dataset: WindowDataset, horizons: Sequence[int]) -> Dict[int, float]:
    if len(dataset) == 0:
        raise EmptyDatasetError("cannot evaluate on an empty dataset")
    return {h: float(np.mean(e)) for h, e in _per_sample_errors(predict_fn, dataset, horizons).items()}


def evaluate(params: ModelParams, dataset: WindowDataset, horizons: Sequence[int]) -> Dict[int, float]:
    """Mean MPJPE (mm) over all windows at each horizon (1-based frame index)"""
    return _dataset_mpjpe(lambda x: forward(params, x), dataset, horizons)


def baseline_mpjpe(dataset: WindowDataset, horizons: Sequence[int]) -> Dict[int, float]:
    """Zero-velocity reference on exactly the same windows and reduction as evaluate()"""
    horizon = dataset.targets.shape[1]
    return _dataset_mpjpe(lambda x: zero_velocity_baseline(x, horizon), dataset, horizons)


def evaluate_by_source(params: ModelParams, dataset: WindowDataset,
                       horizons: Sequence[int]) -> pd.DataFrame:
    """
    Mean MPJPE per source sequence next to the zero-velocity baseline.
    Columns: source, windows, mpjpe@h..., baseline@h...; sources in first-seen order.
    """
    if len(dataset) == 0:
        raise EmptyDatasetError("cannot evaluate on an empty dataset")
    horizon = dataset.targets.shape[1]
    model_errors = _per_sample_errors(lambda x: forward(params, x), dataset, horizons)
    baseline_errors = _per_sample_errors(lambda x: zero_velocity_baseline(x, horizon), dataset, horizons)

    frame = pd.DataFrame({'source': dataset.sources})
    for h in horizons:
        frame[f'mpjpe@{h}'] = model_errors[h]
    for h in horizons:
        frame[f'baseline@{h}'] = baseline_errors[h]
    grouped = frame.groupby('source', sort=False)
    table = grouped.mean()
    table.insert(0, 'windows', grouped.size())
    return table.reset_index()


def fit_input_scale(dataset: WindowDataset) -> float:
    """RMS offset (mm) of history frames from their window's last pose; 1.0 for static data"""
    if len(dataset) == 0:
        raise EmptyDatasetError("cannot fit an input scale on an empty dataset")
    offsets = dataset.histories - dataset.histories[:, -1:, :]
    scale = float(np.sqrt(np.mean(offsets * offsets)))
    return scale if scale > 0 else 1.0


# -- gradients --------------------------------------------------------------

def shard_bounds(size: int, shards: int) -> List[Tuple[int, int]]:
    """Contiguous, ordered, non-empty index ranges covering [0, size)"""
    edges = np.linspace(0, size, min(shards, size) + 1).round().astype(int)
    return [(int(lo), int(hi)) for lo, hi in zip(edges[:-1], edges[1:]) if hi > lo]


def batch_loss_and_grad(params: ModelParams, histories: np.ndarray, targets: np.ndarray,
                        executor: Optional[Executor] = None,
                        shards: int = 1) -> Tuple[float, ModelParams]:
    """
    Mean loss and gradient over a batch. With an executor the batch is split into
    contiguous shards whose sums are reduced in shard order.
    """
    size = histories.shape[0]
    bounds = shard_bounds(size, shards if executor is not None else 1)

    def work(bound):
        lo, hi = bound
        return loss_and_grad(params, histories[lo:hi], targets[lo:hi], reduction='sum')

    if executor is None or len(bounds) == 1:
        results = [work(b) for b in bounds]
    else:
        results = list(executor.map(work, bounds))

    total, grads = results[0]
    if len(results) > 1:
        tensors = {name: value.copy() for name, value in grads.named_tensors()}
        for part_loss, part_grads in results[1:]:
            total += part_loss
            for name, value in part_grads.named_tensors():
                tensors[name] += value
        grads = ModelParams.from_tensors(params.config, tensors)
    scale = 1.0 / size
    return total * scale, grads.map(lambda name, value: value * scale)


# -- loop -------------------------------------------------------------------

def _check_dataset(model_cfg: ModelConfig, dataset: WindowDataset, label: str):
    if dataset.histories.shape[1:] != (model_cfg.lookback, model_cfg.feature_dim):
        raise MotionShapeError(
            f"{label} windows are {dataset.histories.shape[1:]}, "
            f"model expects ({model_cfg.lookback}, {model_cfg.feature_dim})"
        )
    if dataset.targets.shape[1] != model_cfg.horizon:
        raise ShapeMismatchError(
            f"{label} targets have {dataset.targets.shape[1]} frames, model horizon is {model_cfg.horizon}"
        )


def _batches(state: TrainState, size: int, batch_size: int):
    """Endless stream of index batches, reshuffled from the state RNG every pass"""
    batch_size = min(batch_size, size)
    while True:
        order = state.rng.permutation(size)
        for lo in range(0, size - batch_size + 1, batch_size):
            yield order[lo:lo + batch_size]


def _format_eval(step: int, lr: float, loss: float, record: Optional[Dict[int, float]]) -> str:
    line = f"step={step} lr={lr:.3g} loss={loss:.4f}"
    if record:
        line += ' ' + ' '.join(f"mpjpe@{h}={value:.2f}" for h, value in record.items())
    return line


def train(model_cfg: ModelConfig, train_cfg: TrainConfig, dataset: WindowDataset,
          validation: Optional[WindowDataset] = None,
          params: Optional[ModelParams] = None) -> TrainResult:
    """
    Run total_steps Adam steps on shuffled minibatches; evaluates on validation every
    eval_interval steps and after the last step. Deterministic for a fixed seed.
    """
    model_cfg.validate()
    train_cfg.validate()
    if len(dataset) == 0:
        raise EmptyDatasetError(
            f"training set has no windows of {model_cfg.lookback}+{model_cfg.horizon} frames"
        )
    _check_dataset(model_cfg, dataset, 'training')
    if validation is not None and len(validation) == 0:
        logger.warning("Validation set is empty, skipping evaluation")
        validation = None
    if validation is not None:
        _check_dataset(model_cfg, validation, 'validation')

    horizons = train_cfg.resolved_horizons(model_cfg.horizon)
    if params is None and model_cfg.input_scale is None:
        model_cfg = replace(model_cfg, input_scale=fit_input_scale(dataset))
        logger.info(f"Input scale fitted to {model_cfg.input_scale:.4g} mm")
    params = init_model(model_cfg) if params is None else params
    state = TrainState.initial(params, train_cfg.seed)
    result = TrainResult(params=params, state=state)
    if train_cfg.total_steps == 0:
        return result

    logger.info(f"Training on {len(dataset)} windows for {train_cfg.total_steps} steps "
                f"(batch {min(train_cfg.batch_size, len(dataset))}, {train_cfg.threads} thread(s))")
    batches = _batches(state, len(dataset), train_cfg.batch_size)
    executor = ThreadPoolExecutor(max_workers=train_cfg.threads) if train_cfg.threads > 1 else None
    try:
        for step in tqdm(range(train_cfg.total_steps), desc='train', disable=not show_progress()):
            histories, targets = dataset.batch(next(batches))
            lr = lr_at(train_cfg, state.step)
            try:
                batch_loss, grads = batch_loss_and_grad(params, histories, targets, executor,
                                                        train_cfg.threads)
                if not np.isfinite(batch_loss):
                    raise NumericalError(f"loss became {batch_loss}")
                params, state = adam_step(params, grads, state, train_cfg)
            except NumericalError as e:
                raise DivergenceError(f"diverged at step {step + 1}: {e}", step=step + 1) from e
            state.loss_history.append(batch_loss)
            result.history.append(HistoryRow(step=state.step, loss=batch_loss, lr=lr))

            if state.step % train_cfg.eval_interval == 0 or state.step == train_cfg.total_steps:
                record = evaluate(params, validation, horizons) if validation is not None else None
                if record is not None:
                    result.evaluations.append(EvalRecord(step=state.step, mpjpe=record))
                smoothed = smoothed_losses(state.loss_history)[-1]
                logger.info(_format_eval(state.step, lr, smoothed, record))
    finally:
        if executor is not None:
            executor.shutdown()

    result.params = params
    result.state = state
    return result
