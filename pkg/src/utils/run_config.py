"""
Run configuration: model + training + data settings, loaded from JSON with flag overrides
and echoed back as resolved_config.json
"""
import json
import os
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Dict, Optional
from network.artifact import CONVENTIONS
from network.config import ModelConfig, get_preset
from training.config import TrainConfig
from utils.errors import ConfigError

DEFAULT_DATA_DIR = 'data'
DEFAULT_STRIDE = 1
DEFAULT_VAL_FRACTION = 0.2
RESOLVED_CONFIG_NAME = 'resolved_config.json'

# Top-level keys a config file may carry
SECTIONS = ('preset', 'model', 'train', 'data', 'conventions')


@dataclass(frozen=True)
class DataConfig:
    data_dir: str = DEFAULT_DATA_DIR
    stride: int = DEFAULT_STRIDE
    val_fraction: float = DEFAULT_VAL_FRACTION

    def validate(self) -> 'DataConfig':
        if isinstance(self.stride, bool) or not isinstance(self.stride, int) or self.stride < 1:
            raise ConfigError(f"stride must be an integer >= 1, got {self.stride!r}")
        if not 0.0 <= self.val_fraction <= 1.0:
            raise ConfigError(f"val_fraction must be in [0, 1], got {self.val_fraction}")
        return self

    def to_dict(self) -> Dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict) -> 'DataConfig':
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"Unknown data config keys: {', '.join(unknown)}")
        return cls(**data)


@dataclass(frozen=True)
class RunConfig:
    """Complete run configuration"""
    model: ModelConfig = field(default_factory=ModelConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    data: DataConfig = field(default_factory=DataConfig)

    def validate(self) -> 'RunConfig':
        self.model.validate()
        self.train.validate()
        self.data.validate()
        self.train.resolved_horizons(self.model.horizon)
        return self

    def to_dict(self) -> Dict:
        return {
            'model': self.model.to_dict(),
            'train': self.train.to_dict(),
            'data': self.data.to_dict(),
            'conventions': dict(CONVENTIONS),
        }

    @classmethod
    def from_dict(cls, data: Dict, preset: Optional[str] = None) -> 'RunConfig':
        """The 'conventions' block of a resolved echo is informational and ignored"""
        if not isinstance(data, dict):
            raise ConfigError("run config must be a JSON object")
        unknown = sorted(set(data) - set(SECTIONS))
        if unknown:
            raise ConfigError(f"Unknown run config sections: {', '.join(unknown)}")

        base = get_preset(preset or data.get('preset') or 'desk')
        model_overrides = data.get('model', {})
        unknown_model = sorted(set(model_overrides) - {f.name for f in fields(ModelConfig)})
        if unknown_model:
            raise ConfigError(f"Unknown model config keys: {', '.join(unknown_model)}")
        try:
            return cls(
                model=replace(base, **model_overrides),
                train=TrainConfig.from_dict(data.get('train', {})),
                data=DataConfig.from_dict(data.get('data', {})),
            )
        except (TypeError, ValueError) as e:
            raise ConfigError(f"Invalid run config: {e}") from e

    def with_overrides(self, model: Optional[Dict] = None, train: Optional[Dict] = None,
                       data: Optional[Dict] = None) -> 'RunConfig':
        """Apply flag overrides; None values mean 'not given'"""
        data_overrides = {k: v for k, v in (data or {}).items() if v is not None}
        return RunConfig(
            model=self.model.with_overrides(**(model or {})),
            train=self.train.with_overrides(**(train or {})),
            data=replace(self.data, **data_overrides),
        )


def load_run_config(path: Optional[str] = None, preset: Optional[str] = None) -> RunConfig:
    if path is None:
        return RunConfig(model=get_preset(preset or 'desk'))
    try:
        with open(path, 'r', encoding='utf-8') as f:
            raw = json.load(f)
    except OSError as e:
        raise ConfigError(f"Cannot read config {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"Config {path} is not valid JSON: {e}") from e
    return RunConfig.from_dict(raw, preset)


def write_resolved_config(run: RunConfig, out_dir: str) -> str:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, RESOLVED_CONFIG_NAME)
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        json.dump(run.to_dict(), f, indent=2, sort_keys=True)
        f.write('\n')
    return path
