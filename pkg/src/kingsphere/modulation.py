"""Constellations, energy normalization and lifting to the binary model.

4-QAM separates into two BPSK dimensions per antenna. 16-QAM is written
as ``x = x1 + 2 x2`` with 4-QAM vectors ``x1``, ``x2`` and detected on the
widened channel ``[H, 2H]``; there is no native 16-ary enumeration.
"""

import enum
from dataclasses import dataclass
import math

import numpy as np

from .errors import DimensionMismatch, InvalidArgument
from .numerics import complex_to_real_model
from .problem import DetectionProblem

__all__ = [
    "ModulationKind",
    "Modulation",
    "QAM4_POINTS",
    "QAM16_POINTS",
    "normalize_energy",
    "lift_4qam",
    "expand_16qam",
    "lift_16qam",
    "recompose_16qam",
    "lifted_to_symbols",
    "symbols_to_lifted",
    "build_problem",
]


class ModulationKind(enum.Enum):
    QAM4 = "4qam"
    QAM16 = "16qam"


# Gray order: bit pairs 00, 01, 11, 10 walk the quadrants counterclockwise
# starting from -1-1j.
QAM4_POINTS = np.array([-1 - 1j, 1 - 1j, 1 + 1j, -1 + 1j])
QAM16_POINTS = np.array(
    [complex(re, im) for im in (-3, -1, 1, 3) for re in (-3, -1, 1, 3)])

_MEAN_ENERGY = {ModulationKind.QAM4: 2.0, ModulationKind.QAM16: 10.0}


@dataclass(frozen=True)
class Modulation:
    """A QAM constellation with a target per-symbol energy.

    The unscaled grids are ``{+-1 +-1j}`` (mean energy 2) and
    ``{+-1, +-3} x {+-1, +-3}j`` (mean energy 10); points are multiplied
    by ``scale`` so that the mean energy equals ``symbol_energy``.
    """

    kind: ModulationKind = ModulationKind.QAM4
    symbol_energy: float = 1.0

    def __post_init__(self):
        if not self.symbol_energy > 0:
            raise InvalidArgument("symbol energy must be positive")

    @property
    def scale(self):
        return math.sqrt(self.symbol_energy / _MEAN_ENERGY[self.kind])

    @property
    def grid(self):
        """Unscaled constellation points."""
        return QAM4_POINTS if self.kind is ModulationKind.QAM4 else QAM16_POINTS

    @property
    def points(self):
        return self.scale * self.grid

    @property
    def layers_per_antenna(self):
        """Binary tree layers contributed by each transmit antenna."""
        return 2 if self.kind is ModulationKind.QAM4 else 4


def normalize_energy(mod, K, Ex):
    """Grid scale giving total mean transmit energy ``Ex`` over ``K`` antennas.

    4-QAM returns ``sqrt(Ex / (2K))`` and 16-QAM ``sqrt(Ex / (10K))``.
    """
    if not Ex > 0:
        raise InvalidArgument("Ex must be positive")
    if K < 1:
        raise InvalidArgument("K must be at least 1")
    kind = mod.kind if isinstance(mod, Modulation) else ModulationKind(mod)
    return math.sqrt(Ex / (_MEAN_ENERGY[kind] * K))


def lift_4qam(H, y, scale=1.0, allow_rank_deficient=False):
    """Real binary problem for a 4-QAM system with grid scale ``scale``.

    The scale is folded into the lifted channel, so the returned problem
    searches ``{-1, +1}^(2K)``; coordinates are ``[Re x; Im x]``.
    """
    if not scale > 0:
        raise InvalidArgument("scale must be positive")
    Hr, yr = complex_to_real_model(H, y)
    return DetectionProblem.from_real(
        scale * Hr, yr, allow_rank_deficient=allow_rank_deficient)


def expand_16qam(H):
    """Widen ``H`` to ``[H, 2H]`` so 16-QAM becomes a 4-QAM system."""
    H = np.atleast_2d(np.asarray(H, dtype=complex))
    return np.hstack([H, 2 * H])


def lift_16qam(H, y, scale=1.0):
    # [H, 2H] has collinear column pairs, so L carries zero pivots.
    return lift_4qam(expand_16qam(H), y, scale, allow_rank_deficient=True)


def recompose_16qam(x1, x2):
    """Combine two 4-QAM vectors into the 16-QAM vector ``x1 + 2 x2``."""
    x1 = np.asarray(x1, dtype=complex)
    x2 = np.asarray(x2, dtype=complex)
    if x1.shape != x2.shape:
        raise DimensionMismatch("x1 and x2 must have equal length")
    return x1 + 2 * x2


def decompose_16qam(x):
    """Inverse of :func:`recompose_16qam` on the unscaled grid."""
    x = np.asarray(x, dtype=complex)

    def split(v):
        x2 = np.where(v > 0, 1.0, -1.0)
        return v - 2 * x2, x2

    a1, a2 = split(x.real)
    b1, b2 = split(x.imag)
    return a1 + 1j * b1, a2 + 1j * b2


def lifted_to_symbols(bits, kind, K):
    """Map a binary decision of the lifted problem back to unscaled symbols."""
    bits = np.asarray(bits, dtype=float)
    kind = ModulationKind(kind)
    half = bits.size // 2
    x = bits[:half] + 1j * bits[half:]
    if kind is ModulationKind.QAM4:
        return x
    return recompose_16qam(x[:K], x[K:])


def symbols_to_lifted(x, kind):
    """Binary coordinates of an unscaled symbol vector (inverse of above)."""
    x = np.asarray(x, dtype=complex)
    kind = ModulationKind(kind)
    if kind is ModulationKind.QAM16:
        x1, x2 = decompose_16qam(x)
        x = np.concatenate([x1, x2])
    return np.concatenate([x.real, x.imag]).astype(int)


def build_problem(mod, H, y):
    """Binary detection problem for ``y = H (scale * grid symbols) + n``."""
    if mod.kind is ModulationKind.QAM4:
        return lift_4qam(H, y, mod.scale)
    return lift_16qam(H, y, mod.scale)
