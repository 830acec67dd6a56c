"""
Error hierarchy shared by every package
"""
from typing import Optional


class LukanError(Exception):
    """Base class for all errors raised by this project"""


class ConfigError(LukanError):
    pass


class DataError(LukanError):
    pass


class MotionFormatError(DataError):
    """Motion file is not valid JSON or misses a required field"""


class MotionShapeError(DataError):
    """A row of a motion file has the wrong number of values"""

    def __init__(self, message: str, row: Optional[int] = None):
        super().__init__(message)
        self.row = row


class MotionValueError(DataError):
    """A motion file holds a non-finite coordinate"""

    def __init__(self, message: str, row: Optional[int] = None, column: Optional[int] = None):
        super().__init__(message)
        self.row = row
        self.column = column


class EmptyDatasetError(DataError):
    pass


class ShapeMismatchError(LukanError, ValueError):
    pass


class BasisDomainError(LukanError, ValueError):
    pass


class NumericalError(LukanError):
    pass


class NonFiniteActivationError(NumericalError):

    def __init__(self, message: str, block_index: Optional[int] = None):
        super().__init__(message)
        self.block_index = block_index


class NonFiniteGradientError(NumericalError):

    def __init__(self, message: str, tensor_name: Optional[str] = None):
        super().__init__(message)
        self.tensor_name = tensor_name


class DivergenceError(NumericalError):

    def __init__(self, message: str, step: Optional[int] = None):
        super().__init__(message)
        self.step = step


class ArtifactError(LukanError):
    pass

