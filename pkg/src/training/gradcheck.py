"""
Finite-difference verification of the hand-written gradients
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional
import numpy as np
import pandas as pd
from tqdm import tqdm
from network.config import ModelConfig, get_preset
from network.model import ModelParams, forward, init_model, loss, loss_and_grad
from utils.log import show_progress

DEFAULT_STEP = 1e-6
DEFAULT_TOLERANCE = 1e-4
PERTURBATION_SCALE = 0.1  # noise on the output projection and LayerNorm before differencing
MIN_DENOMINATOR = 1e-12

GradientFn = Callable[[ModelParams, np.ndarray, np.ndarray], ModelParams]

logger = logging.getLogger(__name__)


@dataclass
class GradCheckReport:
    errors: Dict[str, float] = field(default_factory=dict)  # tensor name -> max relative error
    tolerance: float = DEFAULT_TOLERANCE

    @property
    def worst(self) -> float:
        return max(self.errors.values()) if self.errors else 0.0

    @property
    def failing(self) -> Dict[str, float]:
        return {name: err for name, err in self.errors.items() if err > self.tolerance}

    @property
    def passed(self) -> bool:
        return not self.failing

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            'tensor': list(self.errors),
            'max_rel_error': list(self.errors.values()),
            'ok': [err <= self.tolerance for err in self.errors.values()],
        })


def analytic_gradient(params: ModelParams, history: np.ndarray, target: np.ndarray) -> ModelParams:
    return loss_and_grad(params, history, target)[1]


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    """max|a - f| / max(max|a|, max|f|, 1e-12)"""
    scale = max(float(np.max(np.abs(analytic))), float(np.max(np.abs(numeric))), MIN_DENOMINATOR)
    return float(np.max(np.abs(analytic - numeric))) / scale


def perturbed_init(model_cfg: ModelConfig, rng: np.random.Generator) -> ModelParams:
    """init_model with the zero output projection and identity LayerNorm jittered"""
    params = init_model(model_cfg)

    def jitter(name: str, value: np.ndarray) -> np.ndarray:
        if name.startswith('w2.') or name.endswith(('.gain', '.shift')):
            return value + rng.normal(0.0, PERTURBATION_SCALE, size=value.shape)
        return value.copy()

    return params.map(jitter)


def finite_difference(params: ModelParams, history: np.ndarray, target: np.ndarray,
                      step: float = DEFAULT_STEP) -> Dict[str, np.ndarray]:
    """Central differences of the loss for every scalar parameter"""
    work = params.copy()
    tensors = work.tensor_dict()
    last = history[-1]

    def objective() -> float:
        return loss(forward(work, history), target, last)

    numeric = {}
    for name, value in tqdm(tensors.items(), desc='finite differences', disable=not show_progress()):
        grad = np.zeros_like(value)
        flat = value.reshape(-1)
        for i in range(flat.size):
            original = flat[i]
            flat[i] = original + step
            f_plus = objective()
            flat[i] = original - step
            f_minus = objective()
            flat[i] = original
            grad.reshape(-1)[i] = (f_plus - f_minus) / (2.0 * step)
        numeric[name] = grad
    return numeric


def grad_check(model_cfg: Optional[ModelConfig] = None, seed: int = 0,
               gradient_fn: Optional[GradientFn] = None, step: float = DEFAULT_STEP,
               tolerance: float = DEFAULT_TOLERANCE) -> GradCheckReport:
    """
    Compare analytic loss gradients with central finite differences on one random window
    """
    model_cfg = (model_cfg or get_preset('gradcheck')).with_overrides(seed=seed).validate()
    gradient_fn = gradient_fn or analytic_gradient
    rng = np.random.default_rng(seed)

    params = perturbed_init(model_cfg, rng)
    history = rng.normal(size=(model_cfg.lookback, model_cfg.feature_dim))
    target = rng.normal(size=(model_cfg.horizon, model_cfg.feature_dim))
    logger.info(f"Gradient check on {params.scalar_count()} parameters (seed {seed}, step {step})")

    analytic = gradient_fn(params, history, target).tensor_dict()
    numeric = finite_difference(params, history, target, step)

    report = GradCheckReport(tolerance=tolerance)
    for name, _ in params.named_tensors():
        report.errors[name] = relative_error(analytic[name], numeric[name])
        logger.debug(f"{name}: max relative error {report.errors[name]:.3e}")
    if not report.passed:
        logger.warning(f"Gradient check failed for: {', '.join(report.failing)}")
    return report
