"""
Motion sequence data model and the canonical motion JSON format
"""
import json
import math
import os
from dataclasses import dataclass
from typing import List, Optional
import numpy as np
from utils.errors import MotionFormatError, MotionShapeError, MotionValueError

REQUIRED_FIELDS = ('fps', 'joints', 'frames', 'data')


@dataclass
class MotionSequence:
    fps: float
    joints: int
    data: np.ndarray  # (frames, 3 * joints), mm
    name: str = ''

    @property
    def frames(self) -> int:
        return self.data.shape[0]

    @property
    def feature_dim(self) -> int:
        return 3 * self.joints

    def validate(self) -> 'MotionSequence':
        if self.joints < 1:
            raise MotionShapeError(f"{self.name}: joints must be >= 1, got {self.joints}")
        if self.data.ndim != 2 or self.data.shape[0] < 1:
            raise MotionShapeError(f"{self.name}: data must hold at least one frame")
        if self.data.shape[1] != self.feature_dim:
            raise MotionShapeError(
                f"{self.name}: frames have {self.data.shape[1]} values, expected {self.feature_dim}"
            )
        bad = np.argwhere(~np.isfinite(self.data))
        if len(bad):
            row, column = (int(v) for v in bad[0])
            raise MotionValueError(
                f"{self.name}: non-finite value at row {row}, column {column}", row=row, column=column
            )
        return self


def _name_from_path(path: str) -> str:
    return os.path.splitext(os.path.basename(path))[0]


def _finite_number(value) -> Optional[float]:
    """float(value) for a finite JSON number; None for bools, non-numbers, NaN, infinities and overflow"""
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        return None
    try:
        number = float(value)
    except OverflowError:
        return None
    return number if math.isfinite(number) else None


def parse_motion(raw: dict, name: str = '') -> MotionSequence:
    if not isinstance(raw, dict):
        raise MotionFormatError(f"{name}: top level must be a JSON object")
    missing = [key for key in REQUIRED_FIELDS if key not in raw]
    if missing:
        raise MotionFormatError(f"{name}: missing field(s) {', '.join(missing)}")

    fps, joints, frames, rows = raw['fps'], raw['joints'], raw['frames'], raw['data']
    if _finite_number(fps) is None or not fps > 0:
        raise MotionFormatError(f"{name}: fps must be a positive number, got {fps!r}")
    if not isinstance(joints, int) or isinstance(joints, bool) or joints < 1:
        raise MotionFormatError(f"{name}: joints must be a positive integer, got {joints!r}")
    if not isinstance(frames, int) or isinstance(frames, bool) or frames < 1:
        raise MotionFormatError(f"{name}: frames must be a positive integer, got {frames!r}")
    if not isinstance(rows, list):
        raise MotionFormatError(f"{name}: data must be a list of frame rows")
    if len(rows) != frames:
        raise MotionShapeError(f"{name}: header says {frames} frames, data has {len(rows)} rows")

    width = 3 * joints
    data = np.empty((frames, width), dtype=np.float64)
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != width:
            length = len(row) if isinstance(row, list) else type(row).__name__
            raise MotionShapeError(
                f"{name}: row {i} has length {length}, expected {width} (3 x {joints} joints)", row=i
            )
        for j, value in enumerate(row):
            number = _finite_number(value)
            if number is None:
                raise MotionValueError(
                    f"{name}: non-finite or non-numeric value {value!r} at row {i}, column {j}",
                    row=i, column=j,
                )
            data[i, j] = number

    return MotionSequence(fps=float(fps), joints=joints, data=data, name=name)


def load_motion_file(path: str) -> MotionSequence:
    name = _name_from_path(path)
    try:
        with open(path, 'r', encoding='utf-8') as f:
            # NaN/Infinity literals parse here and are rejected per value below
            raw = json.load(f)
    except json.JSONDecodeError as e:
        raise MotionFormatError(f"{name}: malformed JSON: {e}") from e
    except OSError as e:
        raise MotionFormatError(f"{name}: cannot read {path}: {e}") from e
    return parse_motion(raw, name)


def format_motion(seq: MotionSequence) -> str:
    """Canonical text: header fields in fixed order, one frame per line"""
    rows = ',\n'.join('    ' + json.dumps([float(v) for v in row]) for row in seq.data)
    return (
        '{\n'
        f'  "fps": {json.dumps(float(seq.fps))},\n'
        f'  "joints": {int(seq.joints)},\n'
        f'  "frames": {int(seq.frames)},\n'
        '  "data": [\n'
        f'{rows}\n'
        '  ]\n'
        '}\n'
    )


def save_motion_file(seq: MotionSequence, path: str):
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        f.write(format_motion(seq))


def load_dataset_dir(directory: str) -> List[MotionSequence]:
    if not os.path.isdir(directory):
        raise MotionFormatError(f"Dataset directory {directory} not found")
    files = sorted(f for f in os.listdir(directory) if f.endswith('.json'))
    return [load_motion_file(os.path.join(directory, f)) for f in files]
