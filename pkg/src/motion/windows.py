"""
Windowing motion sequences into (history, future) pairs, the sequence-level
train/validation split and the zero-velocity baseline
"""
import hashlib
import logging
from dataclasses import dataclass
from typing import List, Sequence, Tuple
import numpy as np
from motion.sequence import MotionSequence
from utils.errors import ConfigError, MotionShapeError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Sample:
    history: np.ndarray  # (L, K)
    target: np.ndarray  # (T, K)
    source: str
    start: int


def window_count(frames: int, lookback: int, horizon: int, stride: int = 1) -> int:
    span = lookback + horizon
    if frames < span:
        return 0
    return (frames - span) // stride + 1


def window_dataset(seqs: Sequence[MotionSequence], lookback: int, horizon: int,
                   stride: int = 1) -> List[Sample]:
    """All windows [s, s+L+T) with s a multiple of stride, in sequence order then start frame"""
    if stride < 1:
        raise ConfigError(f"stride must be >= 1, got {stride}")
    if lookback < 1 or horizon < 1:
        raise ConfigError(f"lookback and horizon must be >= 1, got {lookback}, {horizon}")

    samples = []
    for seq in seqs:
        for i in range(window_count(seq.frames, lookback, horizon, stride)):
            start = i * stride
            samples.append(Sample(
                history=seq.data[start:start + lookback],
                target=seq.data[start + lookback:start + lookback + horizon],
                source=seq.name,
                start=start,
            ))
    return samples


@dataclass
class WindowDataset:
    """Samples stacked into dense arrays for vectorized training and evaluation"""
    histories: np.ndarray  # (S, L, K)
    targets: np.ndarray  # (S, T, K)
    sources: List[str]
    starts: List[int]

    def __len__(self) -> int:
        return self.histories.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.histories.shape[2]

    def batch(self, indices: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return self.histories[indices], self.targets[indices]

    @classmethod
    def from_samples(cls, samples: Sequence[Sample], lookback: int, horizon: int,
                     feature_dim: int) -> 'WindowDataset':
        if not samples:
            return cls(np.zeros((0, lookback, feature_dim)), np.zeros((0, horizon, feature_dim)), [], [])
        return cls(
            histories=np.stack([s.history for s in samples]),
            targets=np.stack([s.target for s in samples]),
            sources=[s.source for s in samples],
            starts=[s.start for s in samples],
        )

    @classmethod
    def from_sequences(cls, seqs: Sequence[MotionSequence], lookback: int, horizon: int,
                       stride: int = 1, feature_dim: int = None) -> 'WindowDataset':
        dims = {seq.feature_dim for seq in seqs}
        if feature_dim is not None:
            dims.add(feature_dim)
        if len(dims) > 1:
            raise MotionShapeError(f"sequences disagree on feature dimension: {sorted(dims)}")
        dim = dims.pop() if dims else 0
        samples = window_dataset(seqs, lookback, horizon, stride)
        logger.debug(f"{len(samples)} windows from {len(seqs)} sequences (L={lookback}, T={horizon})")
        return cls.from_samples(samples, lookback, horizon, dim)


def zero_velocity_baseline(history: np.ndarray, horizon: int) -> np.ndarray:
    """Repeat the last observed frame; history is (L, K) or batched (..., L, K)"""
    history = np.asarray(history)
    if history.ndim < 2 or history.shape[-2] < 1:
        raise MotionShapeError(f"baseline needs at least one history frame, got shape {history.shape}")
    return np.repeat(history[..., -1:, :], horizon, axis=-2)


def name_fraction(name: str) -> float:
    """Deterministic position of a sequence name in [0, 1)"""
    digest = hashlib.md5(name.encode('utf-8')).hexdigest()
    return int(digest[:16], 16) / float(1 << 64)


def split_by_name(seqs: Sequence[MotionSequence],
                  val_fraction: float) -> Tuple[List[MotionSequence], List[MotionSequence]]:
    """
    Split whole sequences, never windows; a sequence goes to validation when its name
    hashes into the top val_fraction of [0, 1). Original order is kept on both sides.
    """
    if not 0.0 <= val_fraction <= 1.0:
        raise ConfigError(f"val_fraction must be in [0, 1], got {val_fraction}")
    fractions = [name_fraction(seq.name) for seq in seqs]
    is_val = [f >= 1.0 - val_fraction for f in fractions]

    if len(seqs) >= 2 and 0.0 < val_fraction < 1.0:
        if not any(is_val):
            is_val[int(np.argmax(fractions))] = True
        elif all(is_val):
            is_val[int(np.argmin(fractions))] = False

    train = [seq for seq, v in zip(seqs, is_val) if not v]
    validation = [seq for seq, v in zip(seqs, is_val) if v]
    return train, validation
