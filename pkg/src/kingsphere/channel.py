"""Fading channels, noise and SNR bookkeeping.

Every draw takes an explicit :class:`RngStream`; there is no global
random state. A stream is a (seed, key) pair fed to
:class:`numpy.random.SeedSequence`, so distinct keys give statistically
independent generators and identical pairs replay identical draws.
"""

from dataclasses import dataclass
import enum

import numpy as np

from .errors import InvalidArgument
from .numerics import psd_sqrt

__all__ = [
    "Fading",
    "ChannelSpec",
    "NoiseSpec",
    "RngStream",
    "draw_iid_channel",
    "kronecker_correlation",
    "draw_kronecker_channel",
    "draw_channel",
    "add_noise",
    "eta0_for_snr",
]


class Fading(enum.Enum):
    IID = "iid"
    KRONECKER = "kron"


@dataclass(frozen=True)
class RngStream:
    """Named, reproducible random stream.

    ``stream`` is an integer or a tuple of integers, e.g.
    ``(snr_index, trial_index, purpose)``.
    """

    seed: int
    stream: int | tuple = 0

    def generator(self):
        key = self.stream if isinstance(self.stream, tuple) else (self.stream,)
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=key)
        return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class ChannelSpec:
    N: int
    K: int
    fading: Fading = Fading.IID
    rho_t: float = 0.0
    rho_r: float = 0.0

    def __post_init__(self):
        if self.N < 1 or self.K < 1:
            raise InvalidArgument("antenna counts must be at least 1")
        for rho in (self.rho_t, self.rho_r):
            if not 0.0 <= rho < 1.0:
                raise InvalidArgument(f"correlation index {rho} not in [0, 1)")

    @property
    def tag(self):
        if self.fading is Fading.IID:
            return "iid"
        return f"kron({self.rho_t:g},{self.rho_r:g})"


@dataclass(frozen=True)
class NoiseSpec:
    eta0: float

    def __post_init__(self):
        if not self.eta0 > 0:
            raise InvalidArgument("eta0 must be positive")


def _complex_normal(gen, shape):
    return (gen.standard_normal(shape) + 1j * gen.standard_normal(shape)) / np.sqrt(2)


def draw_iid_channel(N, K, rng):
    """``N x K`` matrix of i.i.d. CN(0, 1) entries."""
    return _complex_normal(rng.generator(), (N, K))


def kronecker_correlation(rho, n):
    """Exponential-square correlation matrix with entries ``rho**((i-j)**2)``."""
    if not 0.0 <= rho < 1.0:
        raise InvalidArgument(f"rho must lie in [0, 1), got {rho}")
    idx = np.arange(n)
    return np.float_power(rho, (idx[:, None] - idx[None, :]) ** 2)


def draw_kronecker_channel(spec, rng):
    """``H = R_R^(1/2) G R_T^(1/2)`` with ``G`` drawn as in the i.i.d. case."""
    G = draw_iid_channel(spec.N, spec.K, rng)
    sr = psd_sqrt(kronecker_correlation(spec.rho_r, spec.N))
    st = psd_sqrt(kronecker_correlation(spec.rho_t, spec.K))
    return sr @ G @ st


def draw_channel(spec, rng):
    if spec.fading is Fading.IID:
        return draw_iid_channel(spec.N, spec.K, rng)
    return draw_kronecker_channel(spec, rng)


def add_noise(y_clean, eta0, rng):
    """Add circular complex Gaussian noise of variance ``eta0`` per entry."""
    if not eta0 > 0:
        raise InvalidArgument("eta0 must be positive")
    y_clean = np.asarray(y_clean, dtype=complex)
    return y_clean + np.sqrt(eta0) * _complex_normal(rng.generator(), y_clean.shape)


def eta0_for_snr(snr_db, Ex=1.0):
    """Noise variance for ``SNR = Ex / eta0`` given in dB."""
    if not Ex > 0:
        raise InvalidArgument("Ex must be positive")
    return Ex / 10.0 ** (snr_db / 10.0)
