import json
import pytest
from network.artifact import CONVENTIONS
from network.config import get_preset
from utils.errors import ConfigError
from utils.run_config import (
    RESOLVED_CONFIG_NAME, DataConfig, RunConfig, load_run_config, write_resolved_config,
)


def write_json(path, payload):
    path.write_text(json.dumps(payload))
    return str(path)


def test_defaults_use_desk_preset():
    run = load_run_config()
    assert run.model == get_preset('desk')
    assert run.data == DataConfig()


def test_file_overrides_preset(tmp_path):
    path = write_json(tmp_path / 'run.json', {
        'preset': 'gradcheck',
        'model': {'basis': 'legendre', 'degree': 2},
        'train': {'total_steps': 7},
        'data': {'stride': 3},
    })
    run = load_run_config(path).validate()
    assert run.model.lookback == get_preset('gradcheck').lookback
    assert run.model.basis.value == 'legendre'
    assert run.model.degree == 2
    assert run.train.total_steps == 7
    assert run.data.stride == 3


def test_argument_preset_wins_over_file_preset(tmp_path):
    path = write_json(tmp_path / 'run.json', {'preset': 'gradcheck'})
    assert load_run_config(path, preset='h36m').model.joints == 22


def test_flag_overrides_ignore_none():
    run = RunConfig().with_overrides(model={'embed_dim': 16, 'blocks': None},
                                     train={'batch_size': None}, data={'val_fraction': 0.5})
    assert run.model.embed_dim == 16
    assert run.model.blocks == get_preset('desk').blocks
    assert run.train.batch_size == RunConfig().train.batch_size
    assert run.data.val_fraction == 0.5


@pytest.mark.parametrize("payload", [
    {'optimizer': {}},
    {'model': {'width': 3}},
    {'train': {'momentum': 0.9}},
    {'data': {'shuffle': True}},
    {'model': {'basis': 'bspline'}},
    [1, 2],
])
def test_rejects_bad_files(tmp_path, payload):
    path = write_json(tmp_path / 'run.json', payload)
    with pytest.raises(ConfigError):
        load_run_config(path)


def test_rejects_unreadable_file(tmp_path):
    with pytest.raises(ConfigError):
        load_run_config(str(tmp_path / 'absent.json'))
    bad = tmp_path / 'bad.json'
    bad.write_text('{')
    with pytest.raises(ConfigError):
        load_run_config(str(bad))


def test_validate_catches_bad_values():
    with pytest.raises(ConfigError):
        RunConfig(data=DataConfig(stride=0)).validate()
    with pytest.raises(ConfigError):
        RunConfig(data=DataConfig(val_fraction=1.5)).validate()


def test_resolved_config_round_trip(tmp_path):
    run = load_run_config(preset='gradcheck').with_overrides(
        model={'temporal_encoder': 'dct'}, train={'total_steps': 3, 'horizons': [1, 4]})
    path = write_resolved_config(run, str(tmp_path / 'out'))
    assert path.endswith(RESOLVED_CONFIG_NAME)

    echoed = json.loads(open(path).read())
    assert echoed['conventions'] == CONVENTIONS
    assert echoed['model']['temporal_encoder'] == 'dct'
    assert load_run_config(path) == run
