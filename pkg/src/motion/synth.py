"""
Seeded synthetic motion: per-coordinate sinusoid mixtures around a rest pose, a shared
root drift on every joint and, in burst mode, short high-frequency transients.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import List
import numpy as np
from motion.sequence import MotionSequence
from utils.errors import ConfigError

DEFAULT_FPS = 25.0

# Sinusoid mixture per coordinate (periods in frames, amplitudes in mm)
MIN_COMPONENTS = 2
MAX_COMPONENTS = 4
PERIOD_RANGE = (10.0, 120.0)
AMPLITUDE_RANGE = (50.0, 300.0)
REST_RANGE = 400.0

# Root drift shared by all joints, one slow sinusoid per axis
DRIFT_BOUND = 150.0
DRIFT_PERIOD_RANGE = (200.0, 600.0)

# Burst transients
BURST_SPACING = 75  # frames per expected event
BURST_PERIOD_RANGE = (3.0, 6.0)
BURST_AMPLITUDE_RANGE = (20.0, 80.0)
BURST_CYCLES = (2, 4)


class SynthMode(str, Enum):
    SMOOTH = 'smooth'
    BURST = 'burst'
    CONST = 'const'

    @classmethod
    def parse(cls, value) -> 'SynthMode':
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            known = ', '.join(m.value for m in cls)
            raise ConfigError(f"Unknown synth mode '{value}' (known: {known})") from None


@dataclass
class BurstEvent:
    joint: int
    start: int
    duration: int
    period: float
    amplitudes: np.ndarray  # (3,), one per axis


@dataclass
class SynthRecipe:
    """All random draws behind one synthetic sequence"""
    joints: int
    mode: SynthMode
    rest_pose: np.ndarray  # (K,)
    amplitudes: np.ndarray  # (K, MAX_COMPONENTS), zero for unused components
    periods: np.ndarray  # (K, MAX_COMPONENTS)
    phases: np.ndarray  # (K, MAX_COMPONENTS)
    drift_amplitude: np.ndarray  # (3,)
    drift_period: np.ndarray  # (3,)
    drift_phase: np.ndarray  # (3,)
    bursts: List[BurstEvent] = field(default_factory=list)

    def deviation_bound(self) -> np.ndarray:
        """Per-coordinate bound on |trajectory - rest pose|"""
        bound = self.amplitudes.sum(axis=1) + np.tile(self.drift_amplitude, self.joints)
        for event in self.bursts:
            bound[3 * event.joint:3 * event.joint + 3] += event.amplitudes
        return bound

    def render(self, frames: int) -> np.ndarray:
        if self.mode is SynthMode.CONST:
            return np.tile(self.rest_pose, (frames, 1))

        t = np.arange(frames, dtype=np.float64)[:, None, None]
        waves = self.amplitudes * np.sin(2.0 * np.pi * t / self.periods + self.phases)
        data = self.rest_pose + waves.sum(axis=2)

        drift = self.drift_amplitude * np.sin(
            2.0 * np.pi * t[:, :, 0] / self.drift_period + self.drift_phase
        )
        data += np.tile(drift, (1, self.joints))

        for event in self.bursts:
            stop = min(event.start + event.duration, frames)
            local = np.arange(stop - event.start, dtype=np.float64)
            envelope = np.sin(np.pi * (local + 0.5) / event.duration) ** 2
            wave = envelope * np.sin(2.0 * np.pi * local / event.period)
            data[event.start:stop, 3 * event.joint:3 * event.joint + 3] += wave[:, None] * event.amplitudes
        return data


def draw_recipe(joints: int, frames: int, rng: np.random.Generator,
                mode: SynthMode = SynthMode.SMOOTH) -> SynthRecipe:
    K = 3 * joints
    rest_pose = rng.uniform(-REST_RANGE, REST_RANGE, size=K)

    counts = rng.integers(MIN_COMPONENTS, MAX_COMPONENTS + 1, size=K)
    active = np.arange(MAX_COMPONENTS)[None, :] < counts[:, None]
    amplitudes = rng.uniform(*AMPLITUDE_RANGE, size=(K, MAX_COMPONENTS)) * active
    periods = rng.uniform(*PERIOD_RANGE, size=(K, MAX_COMPONENTS))
    phases = rng.uniform(0.0, 2.0 * np.pi, size=(K, MAX_COMPONENTS))

    drift_amplitude = rng.uniform(0.0, DRIFT_BOUND, size=3)
    drift_period = rng.uniform(*DRIFT_PERIOD_RANGE, size=3)
    drift_phase = rng.uniform(0.0, 2.0 * np.pi, size=3)

    bursts = []
    if mode is SynthMode.BURST:
        for _ in range(max(1, frames // BURST_SPACING)):
            period = rng.uniform(*BURST_PERIOD_RANGE)
            cycles = int(rng.integers(BURST_CYCLES[0], BURST_CYCLES[1] + 1))
            duration = max(2, int(round(cycles * period)))
            bursts.append(BurstEvent(
                joint=int(rng.integers(0, joints)),
                start=int(rng.integers(0, max(1, frames - duration + 1))),
                duration=duration,
                period=period,
                amplitudes=rng.uniform(*BURST_AMPLITUDE_RANGE, size=3),
            ))

    return SynthRecipe(joints, mode, rest_pose, amplitudes, periods, phases,
                       drift_amplitude, drift_period, drift_phase, bursts)


def _check_dimensions(joints: int, frames: int, fps: float):
    for label, value in (('joints', joints), ('frames', frames)):
        if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < 1:
            raise ConfigError(f"synth: {label} must be a positive integer, got {value!r}")
    if not fps > 0:
        raise ConfigError(f"synth: fps must be positive, got {fps!r}")


def synth_recipe(joints: int, frames: int, seed: int = 0, mode='smooth') -> SynthRecipe:
    _check_dimensions(joints, frames, DEFAULT_FPS)
    return draw_recipe(joints, frames, np.random.default_rng(seed), SynthMode.parse(mode))


def synth_generate(joints: int, frames: int, fps: float = DEFAULT_FPS, seed: int = 0,
                   mode='smooth', name: str = None) -> MotionSequence:
    _check_dimensions(joints, frames, fps)
    recipe = synth_recipe(joints, frames, seed, mode)
    return MotionSequence(
        fps=float(fps),
        joints=joints,
        data=recipe.render(frames),
        name=name or f'synth_{seed}',
    )


def sequence_seeds(seed: int, count: int) -> List[int]:
    """Independent per-sequence seeds derived from one run seed"""
    states = np.random.SeedSequence(seed).generate_state(count, dtype=np.uint32)
    return [int(s) for s in states]


def synth_dataset(joints: int, frames: int, count: int, fps: float = DEFAULT_FPS,
                  seed: int = 0, mode='smooth') -> List[MotionSequence]:
    if count < 1:
        raise ConfigError(f"synth: count must be >= 1, got {count}")
    return [
        synth_generate(joints, frames, fps, s, mode, name=f'seq_{i:03d}')
        for i, s in enumerate(sequence_seeds(seed, count))
    ]
