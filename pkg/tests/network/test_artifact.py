import json
import numpy as np
import pytest
from network.artifact import CONVENTIONS, FORMAT_VERSION, load_model, save_model
from network.model import forward, init_model
from utils.errors import ArtifactError


@pytest.fixture
def trained_like(small_config, rng):
    params = init_model(small_config.with_overrides(basis='chebyshev', temporal_encoder='dct'))
    params.w2.weight[:] = rng.normal(scale=0.05, size=params.w2.weight.shape)
    params.w2.bias[:] = rng.normal(size=params.w2.bias.shape)
    return params


def test_round_trip_preserves_predictions(trained_like, tmp_path, rng):
    path = str(tmp_path / 'model.bin')
    save_model(trained_like, path)
    loaded = load_model(path)

    assert loaded.config == trained_like.config
    for (name, a), (_, b) in zip(trained_like.named_tensors(), loaded.named_tensors()):
        np.testing.assert_array_equal(a, b, err_msg=name)
    X = rng.normal(size=(3, loaded.config.lookback, loaded.config.feature_dim))
    np.testing.assert_array_equal(forward(loaded, X), forward(trained_like, X))


def test_header_records_conventions(trained_like, tmp_path):
    path = tmp_path / 'model.bin'
    save_model(trained_like, str(path))
    header = json.loads(path.read_bytes().split(b'\n', 1)[0])
    assert header['format_version'] == FORMAT_VERSION
    assert header['conventions'] == CONVENTIONS
    assert header['config']['temporal_encoder'] == 'dct'
    assert [t['name'] for t in header['tensors']][:2] == ['w1.weight', 'w1.bias']


def test_save_is_deterministic(trained_like, tmp_path):
    save_model(trained_like, str(tmp_path / 'a.bin'))
    save_model(trained_like, str(tmp_path / 'b.bin'))
    assert (tmp_path / 'a.bin').read_bytes() == (tmp_path / 'b.bin').read_bytes()


def _rewrite_header(path, edit):
    head, payload = path.read_bytes().split(b'\n', 1)
    header = json.loads(head)
    edit(header)
    path.write_bytes(json.dumps(header).encode('utf-8') + b'\n' + payload)


def test_rejects_unknown_version(trained_like, tmp_path):
    path = tmp_path / 'model.bin'
    save_model(trained_like, str(path))
    _rewrite_header(path, lambda h: h.update(format_version=99))
    with pytest.raises(ArtifactError, match='format_version'):
        load_model(str(path))


def test_rejects_truncated_payload(trained_like, tmp_path):
    path = tmp_path / 'model.bin'
    save_model(trained_like, str(path))
    path.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(ArtifactError, match='truncated'):
        load_model(str(path))


def test_rejects_trailing_bytes(trained_like, tmp_path):
    path = tmp_path / 'model.bin'
    save_model(trained_like, str(path))
    path.write_bytes(path.read_bytes() + b'\x00' * 8)
    with pytest.raises(ArtifactError, match='trailing'):
        load_model(str(path))


def test_rejects_shape_mismatch(trained_like, tmp_path):
    path = tmp_path / 'model.bin'
    save_model(trained_like, str(path))

    def swap(header):
        header['tensors'][0]['shape'] = list(reversed(header['tensors'][0]['shape']))

    _rewrite_header(path, swap)
    with pytest.raises(ArtifactError, match='shape'):
        load_model(str(path))


def test_rejects_missing_or_garbled_file(tmp_path):
    with pytest.raises(ArtifactError):
        load_model(str(tmp_path / 'absent.bin'))
    garbled = tmp_path / 'garbled.bin'
    garbled.write_bytes(b'not json\n')
    with pytest.raises(ArtifactError):
        load_model(str(garbled))


@pytest.mark.parametrize("header", [b'[]', b'"model"', b'42'])
def test_rejects_non_object_header(tmp_path, header):
    path = tmp_path / 'model.bin'
    path.write_bytes(header + b'\n')
    with pytest.raises(ArtifactError, match='JSON object'):
        load_model(str(path))


@pytest.mark.parametrize("edit, message", [
    (lambda h: h['tensors'][0].pop('name'), "string 'name'"),
    (lambda h: h['tensors'][0].pop('shape'), "'shape' list"),
    (lambda h: h['tensors'][0].update(shape=[2, 'x']), "'shape' list"),
    (lambda h: h['tensors'].__setitem__(0, 'w1.weight'), "string 'name'"),
    (lambda h: h.update(tensors={'w1.weight': [2, 3]}), 'must be a list'),
    (lambda h: h.pop('tensors'), 'must be a list'),
])
def test_rejects_malformed_tensor_entries(trained_like, tmp_path, edit, message):
    path = tmp_path / 'model.bin'
    save_model(trained_like, str(path))
    _rewrite_header(path, edit)
    with pytest.raises(ArtifactError, match=message):
        load_model(str(path))


def test_rejects_unknown_tensor(trained_like, tmp_path):
    path = tmp_path / 'model.bin'
    save_model(trained_like, str(path))
    _rewrite_header(path, lambda h: h['tensors'].append({'name': 'extra.weight', 'shape': [1]}))
    path.write_bytes(path.read_bytes() + b'\x00' * 8)
    with pytest.raises(ArtifactError, match="unexpected tensor 'extra.weight'"):
        load_model(str(path))


def test_rejects_duplicate_tensor(trained_like, tmp_path):
    path = tmp_path / 'model.bin'
    save_model(trained_like, str(path))
    _rewrite_header(path, lambda h: h['tensors'].insert(1, dict(h['tensors'][0])))
    with pytest.raises(ArtifactError, match="duplicate tensor 'w1.weight'"):
        load_model(str(path))


def test_rejects_missing_tensor(trained_like, tmp_path):
    path = tmp_path / 'model.bin'
    save_model(trained_like, str(path))
    size = trained_like.w2.bias.size * 8
    _rewrite_header(path, lambda h: h['tensors'].pop())
    path.write_bytes(path.read_bytes()[:-size])
    with pytest.raises(ArtifactError, match='missing tensor.*w2.bias'):
        load_model(str(path))


def test_round_trip_keeps_input_scale(trained_like, tmp_path):
    path = str(tmp_path / 'model.bin')
    params = init_model(trained_like.config.with_overrides(input_scale=37.5))
    save_model(params, path)
    assert load_model(path).config.input_scale == 37.5
