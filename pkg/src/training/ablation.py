"""
Ablation driver: temporal encoder x polynomial basis, optionally an embedding-size sweep
"""
import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence
import pandas as pd
from motion.windows import WindowDataset
from network.basis_registry import BasisKind
from network.config import ModelConfig
from network.model import param_count
from network.transform import EncoderKind
from training.config import TrainConfig
from training.trainer import (
    DEFAULT_SMOOTHING_WINDOW, baseline_mpjpe, converged, evaluate, evaluate_by_source,
    smoothed_losses, train,
)

DEFAULT_ENCODERS = (EncoderKind.DWT, EncoderKind.DCT)
DEFAULT_BASES = (BasisKind.LUCAS, BasisKind.CHEBYSHEV, BasisKind.LEGENDRE, BasisKind.HERMITE)

logger = logging.getLogger(__name__)


@dataclass
class AblationRun:
    encoder: EncoderKind
    basis: BasisKind
    embed_dim: int
    params: int
    mpjpe: Dict[int, float]
    early_loss: float
    final_loss: float
    converged: bool
    by_source: Dict[str, float] = field(default_factory=dict)  # MPJPE at the longest horizon

    def to_row(self) -> Dict:
        row = {
            'encoder': self.encoder.value,
            'basis': self.basis.value,
            'embed_dim': self.embed_dim,
            'params': self.params,
        }
        row.update({f'mpjpe@{h}': value for h, value in self.mpjpe.items()})
        row.update({
            'early_loss': self.early_loss,
            'final_loss': self.final_loss,
            'converged': self.converged,
        })
        return row


@dataclass
class AblationResult:
    horizons: List[int]
    baseline: Dict[int, float]
    runs: List[AblationRun] = field(default_factory=list)
    embed_runs: List[AblationRun] = field(default_factory=list)

    @staticmethod
    def _frame(runs: Sequence[AblationRun]) -> pd.DataFrame:
        return pd.DataFrame([run.to_row() for run in runs])

    def table(self) -> pd.DataFrame:
        return self._frame(self.runs)

    def embed_table(self) -> pd.DataFrame:
        return self._frame(self.embed_runs)

    def source_table(self) -> pd.DataFrame:
        """One row per encoder/basis run, one column per validation sequence"""
        rows = []
        for run in self.runs:
            row = {'encoder': run.encoder.value, 'basis': run.basis.value}
            row.update(run.by_source)
            rows.append(row)
        return pd.DataFrame(rows)

    @property
    def all_converged(self) -> bool:
        return all(run.converged for run in self.runs + self.embed_runs)


def ablation_grid(base: ModelConfig, encoders: Sequence = DEFAULT_ENCODERS,
                  bases: Sequence = DEFAULT_BASES) -> List[ModelConfig]:
    """One config per (encoder, basis), encoder-major"""
    return [
        base.with_overrides(temporal_encoder=EncoderKind.parse(e), basis=BasisKind.parse(b)).validate()
        for e, b in itertools.product(encoders, bases)
    ]


def _run_one(model_cfg: ModelConfig, train_cfg: TrainConfig, train_set: WindowDataset,
             val_set: WindowDataset, horizons: List[int]) -> AblationRun:
    logger.info(f"Ablation run: encoder={model_cfg.temporal_encoder.value} "
                f"basis={model_cfg.basis.value} embed_dim={model_cfg.embed_dim}")
    result = train(model_cfg, train_cfg, train_set)
    smoothed = smoothed_losses(result.losses, DEFAULT_SMOOTHING_WINDOW)
    early = smoothed[max(0, len(smoothed) // 10 - 1)] if len(smoothed) else float('nan')
    longest = horizons[-1]
    per_source = evaluate_by_source(result.params, val_set, [longest])
    return AblationRun(
        encoder=model_cfg.temporal_encoder,
        basis=model_cfg.basis,
        embed_dim=model_cfg.embed_dim,
        params=param_count(model_cfg),
        mpjpe=evaluate(result.params, val_set, horizons),
        early_loss=float(early),
        final_loss=float(smoothed[-1]) if len(smoothed) else float('nan'),
        converged=converged(result.losses, DEFAULT_SMOOTHING_WINDOW),
        by_source={source: float(value) for source, value
                   in zip(per_source['source'], per_source[f'mpjpe@{longest}'])},
    )


def run_ablation(base: ModelConfig, train_cfg: TrainConfig, train_set: WindowDataset,
                 val_set: WindowDataset, encoders: Sequence = DEFAULT_ENCODERS,
                 bases: Sequence = DEFAULT_BASES,
                 embed_dims: Optional[Sequence[int]] = None) -> AblationResult:
    """
    Train every configuration from the same seed on the same windows and score it on
    the same validation windows.
    """
    horizons = train_cfg.resolved_horizons(base.horizon)
    result = AblationResult(horizons=horizons, baseline=baseline_mpjpe(val_set, horizons))

    for model_cfg in ablation_grid(base, encoders, bases):
        result.runs.append(_run_one(model_cfg, train_cfg, train_set, val_set, horizons))

    for embed_dim in embed_dims or ():
        model_cfg = base.with_overrides(embed_dim=int(embed_dim)).validate()
        result.embed_runs.append(_run_one(model_cfg, train_cfg, train_set, val_set, horizons))

    if not result.all_converged:
        stalled = [f"{r.encoder.value}/{r.basis.value}/D={r.embed_dim}"
                   for r in result.runs + result.embed_runs if not r.converged]
        logger.warning(f"Runs without loss decrease: {', '.join(stalled)}")
    return result
