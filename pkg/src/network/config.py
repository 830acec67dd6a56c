"""
Structured model configurations and named presets
"""
from dataclasses import dataclass, asdict, fields, replace
import math
from typing import Dict, Optional
from network.basis_registry import BasisKind
from network.transform import (
    DEFAULT_LEVELS, DEFAULT_VANISHING_MOMENTS, DAUBECHIES_LOWPASS, EncoderKind, WaveletSpec,
    encoded_length,
)
from utils.errors import ConfigError

# Default architecture constants (desk scale)
DEFAULT_JOINTS = 4
DEFAULT_LOOKBACK = 50  # frames
DEFAULT_HORIZON = 10  # frames
DEFAULT_EMBED_DIM = 32
DEFAULT_BLOCKS = 4
DEFAULT_DEGREE = 3


def _positive_finite(value) -> bool:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        return False
    try:
        return math.isfinite(float(value)) and value > 0
    except OverflowError:
        return False


@dataclass(frozen=True)
class ModelConfig:
    """All architecture hyperparameters of the network"""
    joints: int = DEFAULT_JOINTS
    lookback: int = DEFAULT_LOOKBACK
    horizon: int = DEFAULT_HORIZON
    embed_dim: int = DEFAULT_EMBED_DIM
    blocks: int = DEFAULT_BLOCKS
    degree: int = DEFAULT_DEGREE
    basis: BasisKind = BasisKind.LUCAS
    temporal_encoder: EncoderKind = EncoderKind.DWT
    wavelet_vanishing_moments: int = DEFAULT_VANISHING_MOMENTS
    wavelet_levels: int = DEFAULT_LEVELS
    squash_input: bool = True
    input_scale: Optional[float] = None  # mm per normalized unit; fitted from training data when None
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, 'basis', BasisKind.parse(self.basis))
        object.__setattr__(self, 'temporal_encoder', EncoderKind.parse(self.temporal_encoder))

    @property
    def feature_dim(self) -> int:
        return 3 * self.joints

    @property
    def encoded_length(self) -> int:
        return encoded_length(self.temporal_encoder, self.lookback,
                              self.wavelet_vanishing_moments, self.wavelet_levels)

    @property
    def motion_scale(self) -> float:
        return 1.0 if self.input_scale is None else float(self.input_scale)

    def wavelet(self) -> WaveletSpec:
        return WaveletSpec.daubechies(self.wavelet_vanishing_moments, self.wavelet_levels)

    def validate(self, allow_zero_blocks: bool = False) -> 'ModelConfig':
        problems = []
        for name in ('joints', 'lookback', 'horizon', 'embed_dim', 'degree', 'blocks',
                     'wavelet_vanishing_moments', 'wavelet_levels', 'seed'):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int):
                problems.append(f"{name} must be an integer, got {value!r}")
        if not isinstance(self.squash_input, bool):
            problems.append(f"squash_input must be true or false, got {self.squash_input!r}")
        if self.input_scale is not None and not _positive_finite(self.input_scale):
            problems.append(f"input_scale must be a positive number, got {self.input_scale!r}")
        if problems:
            raise ConfigError('; '.join(problems))

        if self.joints < 1:
            problems.append(f"joints must be >= 1, got {self.joints}")
        if self.horizon < 1:
            problems.append(f"horizon must be >= 1, got {self.horizon}")
        if self.horizon > self.lookback:
            problems.append(f"horizon ({self.horizon}) cannot exceed lookback ({self.lookback})")
        if self.embed_dim < 1:
            problems.append(f"embed_dim must be >= 1, got {self.embed_dim}")
        if self.blocks < (0 if allow_zero_blocks else 1):
            problems.append(f"blocks must be >= 1, got {self.blocks}")
        if self.degree < 0:
            problems.append(f"degree must be >= 0, got {self.degree}")
        if self.temporal_encoder is EncoderKind.DWT:
            if self.wavelet_vanishing_moments not in DAUBECHIES_LOWPASS:
                problems.append(
                    f"wavelet_vanishing_moments must be one of {sorted(DAUBECHIES_LOWPASS)}"
                )
            if self.wavelet_levels < 1:
                problems.append(f"wavelet_levels must be >= 1, got {self.wavelet_levels}")
            elif self.lookback < 2 ** self.wavelet_levels:
                problems.append(
                    f"lookback {self.lookback} too short for {self.wavelet_levels} wavelet levels"
                )
        elif self.lookback < 2:
            problems.append(f"lookback must be >= 2, got {self.lookback}")

        if problems:
            raise ConfigError('; '.join(problems))
        return self

    def to_dict(self) -> Dict:
        data = asdict(self)
        data['basis'] = self.basis.value
        data['temporal_encoder'] = self.temporal_encoder.value
        return data

    @classmethod
    def from_dict(cls, data: Dict) -> 'ModelConfig':
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"Unknown model config keys: {', '.join(unknown)}")
        return cls(**data)

    def with_overrides(self, **overrides) -> 'ModelConfig':
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})


# Named configurations
MODEL_PRESETS: Dict[str, ModelConfig] = {
    'desk': ModelConfig(),

    'gradcheck': ModelConfig(
        joints=2, lookback=16, horizon=4, embed_dim=8, blocks=2, degree=3,
        wavelet_levels=2,
    ),

    'h36m': ModelConfig(
        joints=22, lookback=50, horizon=10, embed_dim=200, blocks=48, degree=3,
    ),

    'amass': ModelConfig(
        joints=23, lookback=50, horizon=25, embed_dim=200, blocks=48, degree=3,
    ),
}


def get_preset(name: str) -> ModelConfig:
    if name not in MODEL_PRESETS:
        raise ConfigError(f"Unknown preset '{name}' (known: {', '.join(MODEL_PRESETS)})")
    return MODEL_PRESETS[name]
