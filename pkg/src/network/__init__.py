"""
Polynomial-KAN motion predictor
"""
from network.basis_registry import BasisKind, basis_registry
from network.config import ModelConfig, MODEL_PRESETS, get_preset
from network.model import (
    ModelParams, Prediction, init_model, forward, predict, loss, loss_and_grad,
    mpjpe, param_count, complexity_report
)
from network.artifact import save_model, load_model

__all__ = [
    'BasisKind', 'basis_registry',
    'ModelConfig', 'MODEL_PRESETS', 'get_preset',
    'ModelParams', 'Prediction', 'init_model', 'forward', 'predict', 'loss', 'loss_and_grad',
    'mpjpe', 'param_count', 'complexity_report',
    'save_model', 'load_model'
]
