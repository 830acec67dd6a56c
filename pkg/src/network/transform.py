"""
Temporal encoders: periodized multi-level Daubechies DWT and orthonormal DCT-II.

Both are materialized as dense matrices so that encode, decode and their adjoints
are plain matrix products along the time axis.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Tuple
import numpy as np
import scipy.fft
from utils.errors import ConfigError, ShapeMismatchError

DEFAULT_VANISHING_MOMENTS = 4
DEFAULT_LEVELS = 3

# Daubechies scaling filters, analysis-correlation order (largest taps first)
DAUBECHIES_LOWPASS = {
    1: (0.7071067811865476, 0.7071067811865476),
    2: (0.4829629131445341, 0.8365163037378079, 0.2241438680420134, -0.1294095225512604),
    3: (0.3326705529500826, 0.8068915093110925, 0.4598775021184915,
        -0.1350110200102545, -0.0854412738820267, 0.0352262918857095),
    4: (0.2303778133088964, 0.7148465705529154, 0.6308807679298587, -0.0279837694168599,
        -0.1870348117190931, 0.0308413818355607, 0.0328830116668852, -0.0105974017850690),
}


class EncoderKind(str, Enum):
    DWT = 'dwt'
    DCT = 'dct'

    @classmethod
    def parse(cls, name) -> 'EncoderKind':
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).strip().lower())
        except ValueError:
            raise ConfigError(f"Unknown temporal encoder '{name}' (expected 'dwt' or 'dct')") from None


class Direction(str, Enum):
    FORWARD = 'forward'
    INVERSE = 'inverse'


@dataclass(frozen=True)
class WaveletSpec:
    vanishing_moments: int
    levels: int
    lowpass: Tuple[float, ...]
    highpass: Tuple[float, ...]

    @classmethod
    def daubechies(cls, vanishing_moments: int = DEFAULT_VANISHING_MOMENTS,
                   levels: int = DEFAULT_LEVELS) -> 'WaveletSpec':
        if vanishing_moments not in DAUBECHIES_LOWPASS:
            raise ConfigError(
                f"Daubechies wavelet with {vanishing_moments} vanishing moments is not available "
                f"(supported: {sorted(DAUBECHIES_LOWPASS)})"
            )
        if levels < 1:
            raise ConfigError(f"wavelet levels must be >= 1, got {levels}")
        lowpass = DAUBECHIES_LOWPASS[vanishing_moments]
        n = len(lowpass)
        # quadrature mirror: g[j] = (-1)^j h[n-1-j]
        highpass = tuple(((-1.0) ** j) * lowpass[n - 1 - j] for j in range(n))
        return cls(vanishing_moments, levels, lowpass, highpass)

    @property
    def filter_length(self) -> int:
        return len(self.lowpass)


@dataclass
class WaveletCoeffs:
    approx: np.ndarray
    details: List[np.ndarray]  # coarsest first
    level_lengths: Tuple[int, ...]  # input length of each level, then final approx length

    @property
    def encoded_length(self) -> int:
        return len(self.approx) + sum(len(d) for d in self.details)

    def flatten(self) -> np.ndarray:
        return np.concatenate([self.approx] + list(self.details), axis=0)

    @classmethod
    def unflatten(cls, flat: np.ndarray, level_lengths: Tuple[int, ...]) -> 'WaveletCoeffs':
        approx_len = level_lengths[-1]
        detail_lens = [(n + 1) // 2 for n in level_lengths[:-1]][::-1]
        expected = approx_len + sum(detail_lens)
        if flat.shape[0] != expected:
            raise ShapeMismatchError(
                f"coefficient vector has length {flat.shape[0]}, expected {expected}"
            )
        approx = flat[:approx_len]
        details = []
        offset = approx_len
        for length in detail_lens:
            details.append(flat[offset:offset + length])
            offset += length
        return cls(approx=approx, details=details, level_lengths=tuple(level_lengths))


def wavelet_level_lengths(length: int, levels: int) -> Tuple[int, ...]:
    lengths = [length]
    n = length
    for _ in range(levels):
        n = (n + 1) // 2
        lengths.append(n)
    return tuple(lengths)


def _periodic_index(half: int, taps: int, period: int) -> np.ndarray:
    return (2 * np.arange(half)[:, None] + np.arange(taps)[None, :]) % period


def dwt_level(signal: np.ndarray, spec: WaveletSpec) -> Tuple[np.ndarray, np.ndarray]:
    """
    One periodized analysis step along axis 0. Odd lengths are padded by repeating the
    last sample.
    """
    if signal.shape[0] % 2:
        signal = np.concatenate([signal, signal[-1:]], axis=0)
    period = signal.shape[0]
    idx = _periodic_index(period // 2, spec.filter_length, period)
    windows = signal[idx]  # (half, taps, ...)
    approx = np.einsum('j,kj...->k...', np.asarray(spec.lowpass), windows)
    detail = np.einsum('j,kj...->k...', np.asarray(spec.highpass), windows)
    return approx, detail


def idwt_level(approx: np.ndarray, detail: np.ndarray, spec: WaveletSpec, length: int) -> np.ndarray:
    """Periodized synthesis step, truncated to the recorded pre-padding length"""
    half = approx.shape[0]
    period = 2 * half
    idx = _periodic_index(half, spec.filter_length, period)
    lo = np.asarray(spec.lowpass)
    hi = np.asarray(spec.highpass)
    extra = approx.shape[1:]
    taps_shape = (1, -1) + (1,) * len(extra)
    contrib = lo.reshape(taps_shape) * approx[:, None] + hi.reshape(taps_shape) * detail[:, None]
    out = np.zeros((period,) + extra, dtype=np.float64)
    np.add.at(out, idx.ravel(), contrib.reshape((half * spec.filter_length,) + extra))
    return out[:length]


def wavedec(signal: np.ndarray, spec: WaveletSpec) -> WaveletCoeffs:
    """Multi-level cascade along axis 0"""
    current = np.asarray(signal, dtype=np.float64)
    min_length = 2 ** spec.levels
    if current.shape[0] < min_length:
        raise ConfigError(
            f"signal length {current.shape[0]} is too short for {spec.levels} levels "
            f"(need at least {min_length})"
        )
    lengths = []
    details = []
    for _ in range(spec.levels):
        lengths.append(current.shape[0])
        current, detail = dwt_level(current, spec)
        details.insert(0, detail)
    lengths.append(current.shape[0])
    return WaveletCoeffs(approx=current, details=details, level_lengths=tuple(lengths))


def waverec(coeffs: WaveletCoeffs, spec: WaveletSpec) -> np.ndarray:
    current = coeffs.approx
    input_lengths = coeffs.level_lengths[:-1]
    for detail, length in zip(coeffs.details, reversed(input_lengths)):
        current = idwt_level(current, detail, spec, length)
    return current


@dataclass(frozen=True)
class TemporalEncoder:
    kind: EncoderKind
    input_length: int
    forward_matrix: np.ndarray = field(repr=False)
    inverse_matrix: np.ndarray = field(repr=False)
    wavelet: Optional[WaveletSpec] = None
    level_lengths: Tuple[int, ...] = ()

    @property
    def encoded_length(self) -> int:
        return self.forward_matrix.shape[0]


def _freeze(matrix: np.ndarray) -> np.ndarray:
    matrix = np.ascontiguousarray(matrix, dtype=np.float64)
    matrix.flags.writeable = False
    return matrix


def build_encoder(kind, length: int, wavelet: Optional[WaveletSpec] = None) -> TemporalEncoder:
    """
    Materialize forward (N x L) and inverse (L x N) matrices by transforming basis vectors
    """
    kind = EncoderKind.parse(kind)
    if kind is EncoderKind.DCT:
        if length < 1:
            raise ConfigError(f"DCT needs at least one frame, got {length}")
        identity = np.eye(length)
        forward = scipy.fft.dct(identity, type=2, norm='ortho', axis=0)
        inverse = scipy.fft.idct(identity, type=2, norm='ortho', axis=0)
        return TemporalEncoder(kind, length, _freeze(forward), _freeze(inverse))

    wavelet = wavelet or WaveletSpec.daubechies()
    decomposed = wavedec(np.eye(length), wavelet)
    forward = decomposed.flatten()
    n_coeffs = forward.shape[0]
    inverse = waverec(WaveletCoeffs.unflatten(np.eye(n_coeffs), decomposed.level_lengths), wavelet)
    return TemporalEncoder(kind, length, _freeze(forward), _freeze(inverse),
                           wavelet=wavelet, level_lengths=decomposed.level_lengths)


def encoded_length(kind, length: int, vanishing_moments: int = DEFAULT_VANISHING_MOMENTS,
                   levels: int = DEFAULT_LEVELS) -> int:
    kind = EncoderKind.parse(kind)
    if kind is EncoderKind.DCT:
        return length
    lengths = wavelet_level_lengths(length, levels)
    return lengths[-1] + sum(lengths[1:])


def _apply(matrix: np.ndarray, values: np.ndarray, what: str) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    expected = matrix.shape[1]
    if values.ndim == 1:
        if values.shape[0] != expected:
            raise ShapeMismatchError(f"{what}: expected length {expected}, got {values.shape[0]}")
        return matrix @ values
    if values.shape[-2] != expected:
        raise ShapeMismatchError(
            f"{what}: expected {expected} rows along the time axis, got {values.shape[-2]}"
        )
    return np.matmul(matrix, values)


def encode(encoder: TemporalEncoder, signal: np.ndarray) -> np.ndarray:
    """Length-L vector, or (..., L, K) with time on axis -2"""
    return _apply(encoder.forward_matrix, signal, 'encode')


def decode(encoder: TemporalEncoder, coeffs: np.ndarray) -> np.ndarray:
    return _apply(encoder.inverse_matrix, coeffs, 'decode')


def adjoint_apply(encoder: TemporalEncoder, direction, cotangent: np.ndarray) -> np.ndarray:
    direction = Direction(direction)
    matrix = encoder.forward_matrix if direction is Direction.FORWARD else encoder.inverse_matrix
    return _apply(matrix.T, cotangent, f'adjoint ({direction.value})')
