"""
Differentiable building blocks with hand-written reverse-mode rules.

Every ``*_vjp`` function returns ``(output, pullback)``; ``pullback(d_output)`` gives
``(d_input, d_params)`` where ``d_params`` has the same type and shapes as the params.
All operations accept leading batch axes: Z is (..., N, D) with time on axis -2.
"""
from dataclasses import dataclass, replace
from typing import Callable, Tuple
import numpy as np
from network.basis_registry import BasisKind
from network.polybasis import eval_basis_array
from utils.errors import NonFiniteActivationError, ShapeMismatchError

DEFAULT_LN_EPSILON = 1e-5


@dataclass
class LinearParams:
    weight: np.ndarray  # (in_dim, out_dim)
    bias: np.ndarray  # (out_dim,)

    def zeros_like(self) -> 'LinearParams':
        return LinearParams(np.zeros_like(self.weight), np.zeros_like(self.bias))


@dataclass
class KanLayerParams:
    gamma: np.ndarray  # (N_out, N_in, R + 1)
    basis: BasisKind = BasisKind.LUCAS
    squash_input: bool = True

    @property
    def degree(self) -> int:
        return self.gamma.shape[2] - 1

    def zeros_like(self) -> 'KanLayerParams':
        return replace(self, gamma=np.zeros_like(self.gamma))


@dataclass
class LayerNormParams:
    gain: np.ndarray  # (N,)
    shift: np.ndarray  # (N,)
    epsilon: float = DEFAULT_LN_EPSILON

    def zeros_like(self) -> 'LayerNormParams':
        return replace(self, gain=np.zeros_like(self.gain), shift=np.zeros_like(self.shift))


def _sum_to_last(values: np.ndarray) -> np.ndarray:
    return values.reshape(-1, values.shape[-1]).sum(axis=0)


def _sum_to_time(values: np.ndarray) -> np.ndarray:
    return values.reshape((-1,) + values.shape[-2:]).sum(axis=(0, 2))


def _as_batch(values: np.ndarray, tail: int) -> np.ndarray:
    return values.reshape((-1,) + values.shape[values.ndim - tail:])


# -- linear projection ------------------------------------------------------

def linear_forward(X: np.ndarray, p: LinearParams) -> np.ndarray:
    if X.shape[-1] != p.weight.shape[0]:
        raise ShapeMismatchError(
            f"linear: input has {X.shape[-1]} features, weight expects {p.weight.shape[0]}"
        )
    if p.bias.shape != (p.weight.shape[1],):
        raise ShapeMismatchError(
            f"linear: bias shape {p.bias.shape} does not match output dim {p.weight.shape[1]}"
        )
    return X @ p.weight + p.bias


def linear_vjp(X: np.ndarray, p: LinearParams) -> Tuple[np.ndarray, Callable]:
    Y = linear_forward(X, p)

    def pullback(dY: np.ndarray) -> Tuple[np.ndarray, LinearParams]:
        d_weight = _as_batch(X, 1).T @ _as_batch(dY, 1)
        d_bias = _sum_to_last(dY)
        return dY @ p.weight.T, LinearParams(d_weight, d_bias)

    return Y, pullback


# -- KAN layer --------------------------------------------------------------

def _check_kan_shapes(Z: np.ndarray, p: KanLayerParams):
    n = Z.shape[-2]
    if p.gamma.ndim != 3 or p.gamma.shape[:2] != (n, n):
        raise ShapeMismatchError(
            f"kan: gamma shape {p.gamma.shape} does not match {n} temporal positions"
        )


def _kan_inputs(Z: np.ndarray, p: KanLayerParams) -> Tuple[np.ndarray, np.ndarray]:
    if p.squash_input:
        u = np.tanh(Z)
        return u, 1.0 - u * u
    return Z, np.ones_like(Z)


def kan_vjp(Z: np.ndarray, p: KanLayerParams) -> Tuple[np.ndarray, Callable]:
    """
    out[..., q, j] = sum_p sum_r gamma[q, p, r] * P_r(u[..., p, j]); the same
    function matrix is shared by every channel j.
    """
    _check_kan_shapes(Z, p)
    u, du_dz = _kan_inputs(Z, p)
    if not np.all(np.isfinite(u)):
        raise NonFiniteActivationError("kan: non-finite input")
    values, derivs = eval_basis_array(p.basis, p.degree, u)  # (..., N, D, R+1)
    out = np.einsum('qpr,...pdr->...qd', p.gamma, values, optimize=True)
    if not np.all(np.isfinite(out)):
        raise NonFiniteActivationError("kan: non-finite activation")

    def pullback(d_out: np.ndarray) -> Tuple[np.ndarray, KanLayerParams]:
        d_gamma = np.einsum('bqd,bpdr->qpr', _as_batch(d_out, 2), _as_batch(values, 3),
                            optimize=True)
        weighted = np.einsum('qpr,...qd->...pdr', p.gamma, d_out, optimize=True)
        d_u = np.sum(weighted * derivs, axis=-1)
        return d_u * du_dz, replace(p, gamma=d_gamma)

    return out, pullback


def kan_forward(Z: np.ndarray, p: KanLayerParams) -> np.ndarray:
    return kan_vjp(Z, p)[0]


# -- LayerNorm along the temporal axis --------------------------------------

def layernorm_vjp(Z: np.ndarray, p: LayerNormParams) -> Tuple[np.ndarray, Callable]:
    n = Z.shape[-2]
    if n < 2:
        raise ShapeMismatchError(f"layernorm: needs at least 2 temporal positions, got {n}")
    if p.gain.shape != (n,) or p.shift.shape != (n,):
        raise ShapeMismatchError(
            f"layernorm: gain/shift shapes {p.gain.shape}/{p.shift.shape}, expected ({n},)"
        )
    mean = Z.mean(axis=-2, keepdims=True)
    centered = Z - mean
    var = np.mean(centered * centered, axis=-2, keepdims=True)
    inv_std = 1.0 / np.sqrt(var + p.epsilon)
    normed = centered * inv_std
    out = p.gain[:, None] * normed + p.shift[:, None]

    def pullback(d_out: np.ndarray) -> Tuple[np.ndarray, LayerNormParams]:
        d_gain = _sum_to_time(d_out * normed)
        d_shift = _sum_to_time(d_out)
        d_normed = d_out * p.gain[:, None]
        d_Z = inv_std * (
            d_normed
            - d_normed.mean(axis=-2, keepdims=True)
            - normed * np.mean(d_normed * normed, axis=-2, keepdims=True)
        )
        return d_Z, replace(p, gain=d_gain, shift=d_shift)

    return out, pullback


def layernorm_forward(Z: np.ndarray, p: LayerNormParams) -> np.ndarray:
    return layernorm_vjp(Z, p)[0]


# -- temporal dependency block: LN(KAN(Z)) + Z ------------------------------

def block_vjp(Z: np.ndarray, kan: KanLayerParams, ln: LayerNormParams) -> Tuple[np.ndarray, Callable]:
    hidden, kan_pullback = kan_vjp(Z, kan)
    normed, ln_pullback = layernorm_vjp(hidden, ln)
    out = normed + Z

    def pullback(d_out: np.ndarray) -> Tuple[np.ndarray, KanLayerParams, LayerNormParams]:
        d_hidden, d_ln = ln_pullback(d_out)
        d_Z, d_kan = kan_pullback(d_hidden)
        return d_Z + d_out, d_kan, d_ln

    return out, pullback


def block_forward(Z: np.ndarray, kan: KanLayerParams, ln: LayerNormParams) -> np.ndarray:
    return block_vjp(Z, kan, ln)[0]
