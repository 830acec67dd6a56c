"""
Adam with L2-coupled weight decay and a single-drop learning-rate schedule
"""
from dataclasses import dataclass, field
from typing import Dict, List, Tuple
import numpy as np
from network.model import ModelParams
from training.config import TrainConfig
from utils.errors import NonFiniteGradientError, ShapeMismatchError


@dataclass
class TrainState:
    step: int
    m: Dict[str, np.ndarray]
    v: Dict[str, np.ndarray]
    loss_history: List[float] = field(default_factory=list)
    rng: np.random.Generator = None

    @classmethod
    def initial(cls, params: ModelParams, seed: int = 0) -> 'TrainState':
        zeros = {name: np.zeros_like(value) for name, value in params.named_tensors()}
        return cls(
            step=0,
            m=zeros,
            v={name: np.zeros_like(value) for name, value in zeros.items()},
            rng=np.random.default_rng(seed),
        )


def lr_at(cfg: TrainConfig, step: int) -> float:
    if step < 0:
        raise ValueError(f"step must be >= 0, got {step}")
    return cfg.lr_init if step < cfg.decay_step else cfg.lr_final


def _check_congruent(params: ModelParams, grads: ModelParams, state: TrainState):
    sources = (('gradient', grads.tensor_dict()), ('first moment', state.m),
               ('second moment', state.v))
    for name, value in params.named_tensors():
        for label, other in sources:
            if name not in other or other[name].shape != value.shape:
                found = other[name].shape if name in other else 'missing'
                raise ShapeMismatchError(f"adam: {label} for '{name}' is {found}, expected {value.shape}")


def adam_step(params: ModelParams, grads: ModelParams, state: TrainState,
              cfg: TrainConfig) -> Tuple[ModelParams, TrainState]:
    """
    One bias-corrected Adam update. Weight decay is added to the gradient
    (g <- g + wd * theta) before the moments; the step is taken at lr_at(state.step).
    Inputs are not modified.
    """
    _check_congruent(params, grads, state)
    grad_tensors = grads.tensor_dict()
    for name, g in grad_tensors.items():
        if not np.all(np.isfinite(g)):
            raise NonFiniteGradientError(f"adam: non-finite gradient in '{name}'", tensor_name=name)

    lr = lr_at(cfg, state.step)
    t = state.step + 1
    correction1 = 1.0 - cfg.beta1 ** t
    correction2 = 1.0 - cfg.beta2 ** t

    new_m, new_v, updated = {}, {}, {}
    for name, theta in params.named_tensors():
        g = grad_tensors[name]
        if cfg.weight_decay:
            g = g + cfg.weight_decay * theta
        m = cfg.beta1 * state.m[name] + (1.0 - cfg.beta1) * g
        v = cfg.beta2 * state.v[name] + (1.0 - cfg.beta2) * g * g
        m_hat = m / correction1
        v_hat = v / correction2
        updated[name] = theta - lr * m_hat / (np.sqrt(v_hat) + cfg.epsilon)
        new_m[name] = m
        new_v[name] = v

    new_params = ModelParams.from_tensors(params.config, updated)
    new_state = TrainState(step=t, m=new_m, v=new_v,
                           loss_history=state.loss_history, rng=state.rng)
    return new_params, new_state
