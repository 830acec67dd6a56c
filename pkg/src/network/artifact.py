"""
Model artifact: one JSON header line followed by raw little-endian float64 tensors.

Layout:
    {"format_version": 1, "config": {...}, "conventions": {...},
     "tensors": [{"name": ..., "shape": [...]}, ...]}\\n
    <tensor 0 bytes><tensor 1 bytes>...

Tensors appear in ModelParams.named_tensors() order.
"""
import json
import logging
import os
from typing import Dict, Tuple
import numpy as np
from network.config import ModelConfig
from network.model import ModelParams, tensor_shapes
from utils.errors import ArtifactError, ConfigError

FORMAT_VERSION = 1
TENSOR_DTYPE = np.dtype('<f8')

# Modelling conventions recorded with every artifact
CONVENTIONS = {
    'hermite': 'physicists',
    'dwt_boundary': 'periodized, odd lengths right-padded by edge replication',
    'coefficient_order': 'approx, detail coarsest..finest',
    'layernorm_axis': 'temporal, per channel',
    'velocity_anchor': 'last observed pose',
}

logger = logging.getLogger(__name__)


def save_model(params: ModelParams, path: str):
    tensors = params.named_tensors()
    header = {
        'format_version': FORMAT_VERSION,
        'config': params.config.to_dict(),
        'conventions': CONVENTIONS,
        'tensors': [{'name': name, 'shape': list(value.shape)} for name, value in tensors],
    }
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, 'wb') as f:
        f.write(json.dumps(header, sort_keys=True).encode('utf-8'))
        f.write(b'\n')
        for _, value in tensors:
            f.write(np.ascontiguousarray(value, dtype=TENSOR_DTYPE).tobytes())
    logger.info(f"Saved model ({params.scalar_count()} parameters) to {path}")


def _tensor_entry(path: str, index: int, entry) -> Tuple[str, Tuple[int, ...]]:
    if not isinstance(entry, dict) or not isinstance(entry.get('name'), str):
        raise ArtifactError(f"{path}: tensor entry {index} needs a string 'name'")
    shape = entry.get('shape')
    if (not isinstance(shape, list)
            or any(isinstance(s, bool) or not isinstance(s, int) or s < 0 for s in shape)):
        raise ArtifactError(f"{path}: tensor '{entry['name']}' needs a 'shape' list of sizes")
    return entry['name'], tuple(shape)


def load_model(path: str) -> ModelParams:
    try:
        with open(path, 'rb') as f:
            raw = f.read()
    except OSError as e:
        raise ArtifactError(f"Cannot read model artifact {path}: {e}") from e

    newline = raw.find(b'\n')
    if newline < 0:
        raise ArtifactError(f"{path}: missing header line")
    try:
        header = json.loads(raw[:newline].decode('utf-8'))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ArtifactError(f"{path}: malformed header: {e}") from e

    if not isinstance(header, dict):
        raise ArtifactError(f"{path}: header must be a JSON object, got {type(header).__name__}")
    version = header.get('format_version')
    if version != FORMAT_VERSION:
        raise ArtifactError(f"{path}: unsupported format_version {version}")
    try:
        config = ModelConfig.from_dict(header['config']).validate()
    except (KeyError, TypeError, ConfigError) as e:
        raise ArtifactError(f"{path}: invalid config in header: {e}") from e

    expected = tensor_shapes(config)
    entries = header.get('tensors')
    if not isinstance(entries, list):
        raise ArtifactError(f"{path}: header 'tensors' must be a list")

    payload = memoryview(raw)[newline + 1:]
    offset = 0
    tensors: Dict[str, np.ndarray] = {}
    for index, entry in enumerate(entries):
        name, shape = _tensor_entry(path, index, entry)
        if name not in expected:
            raise ArtifactError(f"{path}: unexpected tensor '{name}'")
        if name in tensors:
            raise ArtifactError(f"{path}: duplicate tensor '{name}'")
        if shape != expected[name]:
            raise ArtifactError(f"{path}: tensor '{name}' has shape {shape}, expected {expected[name]}")
        nbytes = int(np.prod(shape, dtype=np.int64)) * TENSOR_DTYPE.itemsize
        if offset + nbytes > len(payload):
            raise ArtifactError(f"{path}: truncated payload while reading '{name}'")
        chunk = np.frombuffer(payload[offset:offset + nbytes], dtype=TENSOR_DTYPE)
        tensors[name] = chunk.reshape(shape).astype(np.float64)
        offset += nbytes
    if offset != len(payload):
        raise ArtifactError(f"{path}: {len(payload) - offset} trailing bytes after tensors")

    missing = [name for name in expected if name not in tensors]
    if missing:
        raise ArtifactError(f"{path}: missing tensor(s) {', '.join(missing)}")
    return ModelParams.from_tensors(config, tensors)
