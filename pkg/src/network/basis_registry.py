"""
Registry of polynomial families usable as KAN activations
"""
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, List, Tuple
from utils.errors import ConfigError


class BasisKind(str, Enum):
    LUCAS = 'lucas'
    CHEBYSHEV = 'chebyshev'
    LEGENDRE = 'legendre'
    HERMITE = 'hermite'

    @classmethod
    def parse(cls, name) -> 'BasisKind':
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).strip().lower())
        except ValueError:
            known = ', '.join(kind.value for kind in cls)
            raise ConfigError(f"Unknown basis '{name}' (expected one of: {known})") from None


@dataclass(frozen=True)
class ThreeTermRecurrence:
    """
    P_0 = p0, P_1 = p1_slope * x, and for r >= 2
    P_r = alpha_r * x * P_{r-1} - beta_r * P_{r-2}
    """
    kind: BasisKind
    p0: float
    p1_slope: float
    coefficients: Callable[[int], Tuple[float, float]]


class BasisRegistry:
    """
    Registry to look up the recurrence of each basis family
    """

    def __init__(self):
        self._recurrences: Dict[BasisKind, ThreeTermRecurrence] = {}

    def register(self, recurrence: ThreeTermRecurrence):
        self._recurrences[recurrence.kind] = recurrence

    def get(self, kind) -> ThreeTermRecurrence:
        kind = BasisKind.parse(kind)
        if kind not in self._recurrences:
            raise ConfigError(f"Basis '{kind.value}' not registered")
        return self._recurrences[kind]

    def kinds(self) -> List[BasisKind]:
        return list(self._recurrences.keys())


basis_registry = BasisRegistry()


def register_bases():
    # Lucas: P_r = x P_{r-1} + P_{r-2}
    basis_registry.register(ThreeTermRecurrence(
        BasisKind.LUCAS, p0=2.0, p1_slope=1.0,
        coefficients=lambda r: (1.0, -1.0)))
    basis_registry.register(ThreeTermRecurrence(
        BasisKind.CHEBYSHEV, p0=1.0, p1_slope=1.0,
        coefficients=lambda r: (2.0, 1.0)))
    # r P_r = (2r - 1) x P_{r-1} - (r - 1) P_{r-2}
    basis_registry.register(ThreeTermRecurrence(
        BasisKind.LEGENDRE, p0=1.0, p1_slope=1.0,
        coefficients=lambda r: ((2.0 * r - 1.0) / r, (r - 1.0) / r)))
    # physicists' convention
    basis_registry.register(ThreeTermRecurrence(
        BasisKind.HERMITE, p0=1.0, p1_slope=2.0,
        coefficients=lambda r: (2.0, 2.0 * (r - 1.0))))


register_bases()
