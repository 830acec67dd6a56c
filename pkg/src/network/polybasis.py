"""
Polynomial basis evaluation by three-term recurrence, values and first derivatives in one pass
"""
import math
from dataclasses import dataclass
from typing import Tuple
import numpy as np
from network.basis_registry import BasisKind, basis_registry
from utils.errors import BasisDomainError


@dataclass(frozen=True)
class BasisValues:
    values: np.ndarray
    derivs: np.ndarray


def _check_degree(max_degree: int):
    if isinstance(max_degree, bool) or int(max_degree) != max_degree or max_degree < 0:
        raise BasisDomainError(f"max_degree must be a non-negative integer, got {max_degree}")


def eval_basis_array(kind, max_degree: int, x) -> Tuple[np.ndarray, np.ndarray]:
    """
    Evaluate P_0..P_R and their derivatives at every entry of x.

    Returns (values, derivs), each shaped x.shape + (R + 1,).
    """
    _check_degree(max_degree)
    max_degree = int(max_degree)
    x = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise BasisDomainError("basis input contains non-finite values")

    rec = basis_registry.get(kind)
    values = np.empty(x.shape + (max_degree + 1,), dtype=np.float64)
    derivs = np.empty_like(values)

    values[..., 0] = rec.p0
    derivs[..., 0] = 0.0
    if max_degree >= 1:
        values[..., 1] = rec.p1_slope * x
        derivs[..., 1] = rec.p1_slope

    for r in range(2, max_degree + 1):
        alpha, beta = rec.coefficients(r)
        values[..., r] = alpha * x * values[..., r - 1] - beta * values[..., r - 2]
        # formal derivative of the recurrence
        derivs[..., r] = (alpha * values[..., r - 1]
                          + alpha * x * derivs[..., r - 1]
                          - beta * derivs[..., r - 2])

    return values, derivs


def eval_basis(kind, max_degree: int, x: float) -> BasisValues:
    """Evaluate one basis family at a scalar point"""
    if isinstance(x, (int, float)) and not math.isfinite(x):
        raise BasisDomainError(f"basis input must be finite, got {x}")
    values, derivs = eval_basis_array(BasisKind.parse(kind), max_degree, np.float64(x))
    return BasisValues(values=values, derivs=derivs)
