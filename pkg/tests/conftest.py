import os
import sys
import numpy as np
import pytest

SRC_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), '..', 'src')
if SRC_DIR not in sys.path:
    sys.path.insert(0, SRC_DIR)

from network.config import ModelConfig, get_preset  # noqa: E402
from training.config import TrainConfig  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_config() -> ModelConfig:
    """J=2, L=16, T=4, D=8, B=2, R=3, db4 with 2 levels"""
    return get_preset('gradcheck')


@pytest.fixture
def tiny_train_config() -> TrainConfig:
    return TrainConfig(batch_size=8, total_steps=5, decay_step=3, eval_interval=2)


@pytest.fixture
def data_dir(tmp_path):
    """Six short synthetic sequences written as motion JSON"""
    from motion.sequence import save_motion_file
    from motion.synth import synth_dataset

    directory = tmp_path / 'data'
    for seq in synth_dataset(joints=2, frames=40, count=6, seed=3):
        save_motion_file(seq, str(directory / f'{seq.name}.json'))
    return str(directory)
