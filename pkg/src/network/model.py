"""
Full motion predictor: temporal encoding, spatial projection, B temporal blocks,
output projection, inverse encoding and last-pose residual.
"""
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Sequence, Tuple
import numpy as np
from network.config import ModelConfig
from network.layers import (
    KanLayerParams, LayerNormParams, LinearParams, block_vjp, linear_vjp,
)
from network.transform import (
    Direction, EncoderKind, TemporalEncoder, WaveletSpec, adjoint_apply, build_encoder, decode,
    encode,
)
from utils.errors import NonFiniteActivationError, NumericalError, ShapeMismatchError


@dataclass
class BlockParams:
    kan: KanLayerParams
    norm: LayerNormParams


@dataclass
class ModelParams:
    w1: LinearParams
    blocks: List[BlockParams]
    w2: LinearParams
    config: ModelConfig

    def named_tensors(self) -> List[Tuple[str, np.ndarray]]:
        """Canonical tensor order shared by serialization, the optimizer and gradient checks"""
        tensors = [('w1.weight', self.w1.weight), ('w1.bias', self.w1.bias)]
        for i, block in enumerate(self.blocks):
            tensors.append((f'blocks.{i}.gamma', block.kan.gamma))
            tensors.append((f'blocks.{i}.gain', block.norm.gain))
            tensors.append((f'blocks.{i}.shift', block.norm.shift))
        tensors.append(('w2.weight', self.w2.weight))
        tensors.append(('w2.bias', self.w2.bias))
        return tensors

    def tensor_dict(self) -> Dict[str, np.ndarray]:
        return dict(self.named_tensors())

    @classmethod
    def from_tensors(cls, config: ModelConfig, tensors: Dict[str, np.ndarray]) -> 'ModelParams':
        blocks = []
        for i in range(config.blocks):
            blocks.append(BlockParams(
                kan=KanLayerParams(tensors[f'blocks.{i}.gamma'], config.basis, config.squash_input),
                norm=LayerNormParams(tensors[f'blocks.{i}.gain'], tensors[f'blocks.{i}.shift']),
            ))
        return cls(
            w1=LinearParams(tensors['w1.weight'], tensors['w1.bias']),
            blocks=blocks,
            w2=LinearParams(tensors['w2.weight'], tensors['w2.bias']),
            config=config,
        )

    def map(self, fn) -> 'ModelParams':
        return ModelParams.from_tensors(
            self.config, {name: fn(name, value) for name, value in self.named_tensors()}
        )

    def copy(self) -> 'ModelParams':
        return self.map(lambda name, value: value.copy())

    def zeros_like(self) -> 'ModelParams':
        return self.map(lambda name, value: np.zeros_like(value))

    def scalar_count(self) -> int:
        return int(sum(value.size for _, value in self.named_tensors()))


@dataclass(frozen=True)
class Prediction:
    frames: np.ndarray  # (T, K), mm


@lru_cache(maxsize=32)
def _cached_encoder(kind: EncoderKind, lookback: int, vanishing_moments: int,
                    levels: int) -> TemporalEncoder:
    wavelet = WaveletSpec.daubechies(vanishing_moments, levels) if kind is EncoderKind.DWT else None
    return build_encoder(kind, lookback, wavelet)


def encoder_for(config: ModelConfig) -> TemporalEncoder:
    """Encoders are immutable, so one instance is shared per configuration"""
    return _cached_encoder(config.temporal_encoder, config.lookback,
                           config.wavelet_vanishing_moments, config.wavelet_levels)


def init_model(config: ModelConfig) -> ModelParams:
    """
    Xavier-uniform input projection, Gaussian KAN coefficients, identity LayerNorm and a
    zero output projection, so the untrained model repeats the last observed pose.
    """
    config.validate()
    rng = np.random.default_rng(config.seed)
    K, D, R = config.feature_dim, config.embed_dim, config.degree
    N = config.encoded_length

    limit = np.sqrt(6.0 / (K + D))
    w1 = LinearParams(rng.uniform(-limit, limit, size=(K, D)), np.zeros(D))

    sigma = 1.0 / (np.sqrt(N) * (R + 1))
    blocks = []
    for _ in range(config.blocks):
        blocks.append(BlockParams(
            kan=KanLayerParams(rng.normal(0.0, sigma, size=(N, N, R + 1)),
                               config.basis, config.squash_input),
            norm=LayerNormParams(np.ones(N), np.zeros(N)),
        ))

    w2 = LinearParams(np.zeros((D, K)), np.zeros(K))
    return ModelParams(w1=w1, blocks=blocks, w2=w2, config=config)


def _check_window(params: ModelParams, X: np.ndarray) -> np.ndarray:
    config = params.config
    X = np.asarray(X, dtype=np.float64)
    if X.ndim not in (2, 3) or X.shape[-2:] != (config.lookback, config.feature_dim):
        raise ShapeMismatchError(
            f"history must be ({config.lookback}, {config.feature_dim}) or batched, got {X.shape}"
        )
    if not np.all(np.isfinite(X)):
        raise NumericalError("history contains non-finite values")
    return X


def forward_vjp(params: ModelParams, X: np.ndarray):
    """
    Returns (prediction, pullback); pullback(d_prediction) -> ModelParams of gradients.
    X is (L, K) or (S, L, K); the prediction is (T, K) or (S, T, K).
    """
    X = _check_window(params, X)
    config = params.config
    encoder = encoder_for(config)

    # windows enter the network relative to their last pose, in units of motion_scale
    anchor = X[..., -1:, :]
    scale = config.motion_scale
    coeffs = encode(encoder, (X - anchor) / scale)
    hidden, w1_pullback = linear_vjp(coeffs, params.w1)

    pullbacks = []
    for i, block in enumerate(params.blocks):
        try:
            hidden, pullback = block_vjp(hidden, block.kan, block.norm)
        except NonFiniteActivationError as e:
            raise NonFiniteActivationError(f"block {i}: {e}", block_index=i) from e
        pullbacks.append(pullback)

    projected, w2_pullback = linear_vjp(hidden, params.w2)
    output = decode(encoder, projected)
    T = config.horizon
    prediction = output[..., :T, :] * scale + anchor
    if not np.all(np.isfinite(prediction)):
        raise NonFiniteActivationError("non-finite prediction")

    def pullback(d_prediction: np.ndarray) -> ModelParams:
        d_output = np.zeros_like(output)
        d_output[..., :T, :] = d_prediction * scale
        d_projected = adjoint_apply(encoder, Direction.INVERSE, d_output)
        d_hidden, d_w2 = w2_pullback(d_projected)

        d_blocks = [None] * len(pullbacks)
        for i in reversed(range(len(pullbacks))):
            d_hidden, d_kan, d_norm = pullbacks[i](d_hidden)
            d_blocks[i] = BlockParams(kan=d_kan, norm=d_norm)

        _, d_w1 = w1_pullback(d_hidden)
        return ModelParams(w1=d_w1, blocks=d_blocks, w2=d_w2, config=config)

    return prediction, pullback


def forward(params: ModelParams, X: np.ndarray) -> np.ndarray:
    return forward_vjp(params, X)[0]


def predict(params: ModelParams, history: np.ndarray) -> Prediction:
    history = np.asarray(history, dtype=np.float64)
    if history.ndim != 2:
        raise ShapeMismatchError(f"predict expects one (L, K) window, got {history.shape}")
    return Prediction(frames=forward(params, history))


# -- objective and metric ---------------------------------------------------

def _loss_terms(pred: np.ndarray, target: np.ndarray, last_observed: np.ndarray):
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    last = np.asarray(last_observed, dtype=np.float64)
    if pred.shape != target.shape or pred.ndim < 2:
        raise ShapeMismatchError(f"loss: prediction {pred.shape} vs target {target.shape}")
    if last.shape[-1] != pred.shape[-1]:
        raise ShapeMismatchError(
            f"loss: last observed pose has {last.shape[-1]} features, expected {pred.shape[-1]}"
        )
    last = last.reshape(pred.shape[:-2] + (1, pred.shape[-1]))

    position_error = pred - target
    # velocities anchored at the last observed pose for both sequences
    pred_velocity = np.diff(np.concatenate([last, pred], axis=-2), axis=-2)
    true_velocity = np.diff(np.concatenate([last, target], axis=-2), axis=-2)
    velocity_error = pred_velocity - true_velocity
    return position_error, velocity_error


def _per_sample_loss(position_error: np.ndarray, velocity_error: np.ndarray) -> np.ndarray:
    T = position_error.shape[-2]
    norms = (np.linalg.norm(position_error, axis=-1)
             + np.linalg.norm(velocity_error, axis=-1))
    return norms.sum(axis=-1) / T


def loss(pred: np.ndarray, target: np.ndarray, last_observed: np.ndarray) -> float:
    """(1/T) sum_t (|x_t - x^_t| + |v_t - v^_t|), averaged over samples when batched"""
    position_error, velocity_error = _loss_terms(pred, target, last_observed)
    return float(np.mean(_per_sample_loss(position_error, velocity_error)))


def _safe_unit(vectors: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(vectors, axis=-1, keepdims=True)
    return np.divide(vectors, norms, out=np.zeros_like(vectors), where=norms > 0)


def loss_grad(pred: np.ndarray, target: np.ndarray, last_observed: np.ndarray) -> np.ndarray:
    """Gradient of the per-sample loss with respect to pred (zero subgradient at zero error)"""
    position_error, velocity_error = _loss_terms(pred, target, last_observed)
    T = position_error.shape[-2]
    unit_velocity = _safe_unit(velocity_error)
    d_pred = _safe_unit(position_error) + unit_velocity
    # v_t depends on x_t and x_{t-1}
    d_pred[..., :-1, :] -= unit_velocity[..., 1:, :]
    return d_pred / T


def loss_and_grad(params: ModelParams, histories: np.ndarray, targets: np.ndarray,
                  reduction: str = 'mean') -> Tuple[float, ModelParams]:
    histories = np.asarray(histories, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if histories.ndim == 2:
        histories = histories[None]
        targets = targets[None]
    if targets.shape != (histories.shape[0], params.config.horizon, params.config.feature_dim):
        raise ShapeMismatchError(
            f"targets must be ({histories.shape[0]}, {params.config.horizon}, "
            f"{params.config.feature_dim}), got {targets.shape}"
        )

    prediction, pullback = forward_vjp(params, histories)
    last = histories[:, -1, :]
    position_error, velocity_error = _loss_terms(prediction, targets, last)
    total = float(np.sum(_per_sample_loss(position_error, velocity_error)))
    d_prediction = loss_grad(prediction, targets, last)

    if reduction == 'mean':
        scale = 1.0 / histories.shape[0]
    elif reduction == 'sum':
        scale = 1.0
    else:
        raise ValueError(f"unknown reduction '{reduction}'")
    grads = pullback(d_prediction * scale)
    return total * scale, grads


def mpjpe(pred: np.ndarray, target: np.ndarray, frame_index: int) -> float:
    """Mean per-joint Euclidean distance at 1-based predicted frame t (mean over samples if batched)"""
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape or pred.shape[-1] % 3:
        raise ShapeMismatchError(f"mpjpe: prediction {pred.shape} vs target {target.shape}")
    T = pred.shape[-2]
    if not 1 <= frame_index <= T:
        raise IndexError(f"mpjpe: frame index {frame_index} outside 1..{T}")
    return float(np.mean(per_sample_mpjpe(pred, target, frame_index)))


def per_sample_mpjpe(pred: np.ndarray, target: np.ndarray, frame_index: int) -> np.ndarray:
    diff = pred[..., frame_index - 1, :] - target[..., frame_index - 1, :]
    joints = diff.reshape(diff.shape[:-1] + (-1, 3))
    return np.linalg.norm(joints, axis=-1).mean(axis=-1)


def mpjpe_at_horizons(preds: np.ndarray, targets: np.ndarray,
                      horizons: Sequence[int]) -> Dict[int, float]:
    return {h: mpjpe(preds, targets, h) for h in horizons}


# -- size and cost ----------------------------------------------------------

def tensor_shapes(config: ModelConfig) -> Dict[str, Tuple[int, ...]]:
    K, D, R = config.feature_dim, config.embed_dim, config.degree
    N = config.encoded_length
    shapes = {'w1.weight': (K, D), 'w1.bias': (D,)}
    for i in range(config.blocks):
        shapes[f'blocks.{i}.gamma'] = (N, N, R + 1)
        shapes[f'blocks.{i}.gain'] = (N,)
        shapes[f'blocks.{i}.shift'] = (N,)
    shapes['w2.weight'] = (D, K)
    shapes['w2.bias'] = (K,)
    return shapes


def param_count(config: ModelConfig) -> int:
    K, D, R = config.feature_dim, config.embed_dim, config.degree
    N = config.encoded_length
    projections = (K * D + D) + (D * K + K)
    per_block = N * N * (R + 1) + 2 * N
    return projections + config.blocks * per_block


@dataclass
class ComplexityReport:
    config: ModelConfig
    encoded_length: int
    projection_params: int
    block_params: int
    total_params: int
    projection_macs: int
    transform_macs: int
    block_macs: int

    def to_dict(self) -> Dict:
        return {
            'encoded_length': self.encoded_length,
            'projection_params': self.projection_params,
            'block_params': self.block_params,
            'total_params': self.total_params,
            'projection_macs': self.projection_macs,
            'transform_macs': self.transform_macs,
            'block_macs': self.block_macs,
        }


def complexity_report(config: ModelConfig) -> ComplexityReport:
    """Parameter split and per-window multiply-accumulate estimates"""
    K, D, R, L = config.feature_dim, config.embed_dim, config.degree, config.lookback
    N = config.encoded_length
    projection_params = (K * D + D) + (D * K + K)
    block_params = config.blocks * (N * N * (R + 1) + 2 * N)
    return ComplexityReport(
        config=config,
        encoded_length=N,
        projection_params=projection_params,
        block_params=block_params,
        total_params=projection_params + block_params,
        projection_macs=2 * N * K * D,
        # dense matrices: the filter-bank cascade itself is linear in L
        transform_macs=(N * L + L * N) * K,
        block_macs=config.blocks * N * N * (R + 1) * D,
    )
