"""
Optimizer and training-loop configuration
"""
from dataclasses import dataclass, asdict, fields, replace
from typing import Dict, List, Optional
from utils.errors import ConfigError

# Default training constants
DEFAULT_BATCH_SIZE = 128
DEFAULT_LR_INIT = 3e-4
DEFAULT_LR_FINAL = 1e-5
DEFAULT_TOTAL_STEPS = 2000  # optimizer iterations
DEFAULT_DECAY_STEP = 1200  # single hard drop at 60 % of training
DEFAULT_WEIGHT_DECAY = 1e-4
DEFAULT_BETA1 = 0.9
DEFAULT_BETA2 = 0.999
DEFAULT_EPSILON = 1e-8
DEFAULT_EVAL_INTERVAL = 100  # steps
DEFAULT_THREADS = 1

# Evaluation horizons in frames (80..1000 ms at 25 fps)
HORIZON_FRAMES = (2, 4, 8, 10, 14, 18, 22, 25)

WEIGHT_DECAY_MODES = ('l2',)


def horizon_grid(horizon: int) -> List[int]:
    """Standard horizons that fit in [1, T], always ending with T"""
    grid = [h for h in HORIZON_FRAMES if 1 <= h <= horizon]
    if horizon not in grid:
        grid.append(horizon)
    return grid


def frames_to_ms(frames: int, fps: float) -> float:
    return frames * 1000.0 / fps


@dataclass(frozen=True)
class TrainConfig:
    """Adam, schedule and loop settings"""
    batch_size: int = DEFAULT_BATCH_SIZE
    lr_init: float = DEFAULT_LR_INIT
    lr_final: float = DEFAULT_LR_FINAL
    decay_step: int = DEFAULT_DECAY_STEP
    total_steps: int = DEFAULT_TOTAL_STEPS
    weight_decay: float = DEFAULT_WEIGHT_DECAY
    beta1: float = DEFAULT_BETA1
    beta2: float = DEFAULT_BETA2
    epsilon: float = DEFAULT_EPSILON
    seed: int = 0

    # Loop plumbing
    eval_interval: int = DEFAULT_EVAL_INTERVAL
    threads: int = DEFAULT_THREADS
    weight_decay_mode: str = 'l2'
    horizons: Optional[List[int]] = None  # None: horizon_grid(T)

    def resolved_horizons(self, horizon: int) -> List[int]:
        if self.horizons is None:
            return horizon_grid(horizon)
        bad = [h for h in self.horizons if not 1 <= h <= horizon]
        if bad:
            raise ConfigError(f"horizons {bad} outside 1..{horizon}")
        return sorted(set(int(h) for h in self.horizons))

    def validate(self) -> 'TrainConfig':
        problems = []
        for name in ('batch_size', 'decay_step', 'total_steps', 'seed', 'eval_interval', 'threads'):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int):
                problems.append(f"{name} must be an integer, got {value!r}")
        if problems:
            raise ConfigError('; '.join(problems))

        if self.batch_size < 1:
            problems.append(f"batch_size must be >= 1, got {self.batch_size}")
        if not 0 < self.lr_final <= self.lr_init:
            problems.append(f"need 0 < lr_final <= lr_init, got {self.lr_final}, {self.lr_init}")
        if self.decay_step < 0:
            problems.append(f"decay_step must be >= 0, got {self.decay_step}")
        if self.total_steps < 0:
            problems.append(f"total_steps must be >= 0, got {self.total_steps}")
        if self.weight_decay < 0:
            problems.append(f"weight_decay must be >= 0, got {self.weight_decay}")
        if not (0 < self.beta1 < 1 and 0 < self.beta2 < 1):
            problems.append(f"betas must lie in (0, 1), got {self.beta1}, {self.beta2}")
        if not self.epsilon > 0:
            problems.append(f"epsilon must be > 0, got {self.epsilon}")
        if self.eval_interval < 1:
            problems.append(f"eval_interval must be >= 1, got {self.eval_interval}")
        if self.threads < 1:
            problems.append(f"threads must be >= 1, got {self.threads}")
        if self.weight_decay_mode not in WEIGHT_DECAY_MODES:
            problems.append(f"weight_decay_mode must be one of {WEIGHT_DECAY_MODES}")
        if self.horizons is not None and any(
            isinstance(h, bool) or not isinstance(h, int) or h < 1 for h in self.horizons
        ):
            problems.append(f"horizons must be positive integers, got {self.horizons}")

        if problems:
            raise ConfigError('; '.join(problems))
        return self

    def to_dict(self) -> Dict:
        data = asdict(self)
        if self.horizons is not None:
            data['horizons'] = list(self.horizons)
        return data

    @classmethod
    def from_dict(cls, data: Dict) -> 'TrainConfig':
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"Unknown train config keys: {', '.join(unknown)}")
        data = dict(data)
        if data.get('horizons') is not None:
            data['horizons'] = list(data['horizons'])
        return cls(**data)

    def with_overrides(self, **overrides) -> 'TrainConfig':
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})
