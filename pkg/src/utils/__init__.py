"""
Shared error types and logging setup
"""
from utils.errors import (
    LukanError, ConfigError, DataError, MotionFormatError, MotionShapeError, MotionValueError,
    EmptyDatasetError, ShapeMismatchError, BasisDomainError, NumericalError,
    NonFiniteActivationError, NonFiniteGradientError, DivergenceError, ArtifactError
)
from utils.log import configure_logging, show_progress

__all__ = [
    'LukanError', 'ConfigError', 'DataError', 'MotionFormatError', 'MotionShapeError',
    'MotionValueError', 'EmptyDatasetError', 'ShapeMismatchError', 'BasisDomainError',
    'NumericalError', 'NonFiniteActivationError', 'NonFiniteGradientError', 'DivergenceError',
    'ArtifactError',
    'configure_logging', 'show_progress'
]
