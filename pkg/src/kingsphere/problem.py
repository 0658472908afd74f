"""The real-valued binary detection problem shared by every detector."""

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch
from .numerics import gram_and_matched_filter, ql_factorize

__all__ = ["DetectionProblem", "ALPHABET"]

#: Search alphabet of every tree layer; scaling lives in the channel.
ALPHABET = (-1, 1)


@dataclass(frozen=True, eq=False)
class DetectionProblem:
    """Minimize ``||yr - Hr x||^2`` over ``x`` in ``{-1, +1}^M``.

    Build instances with :meth:`from_real`, which precomputes the QL
    factors (when the model is not overloaded), the Gram matrix ``G`` and
    the matched filter output ``z``.

    Attributes
    ----------
    Hr : (rows, M) ndarray
    yr : (rows,) ndarray
    L : (M, M) ndarray or None
        Lower-triangular factor; ``None`` for overloaded models
        (``M > rows``), which only the king decoder can handle.
    y_tilde : (M,) ndarray or None
        ``Q^T yr``.
    G, z : ndarray
        ``Hr^T Hr`` and ``Hr^T yr``.
    """

    Hr: np.ndarray
    yr: np.ndarray
    L: np.ndarray | None
    y_tilde: np.ndarray | None
    G: np.ndarray
    z: np.ndarray
    # plain-list copies for the pure-Python search loops
    _L_rows: list | None = field(default=None, repr=False)
    _y_tilde: list | None = field(default=None, repr=False)

    @classmethod
    def from_real(cls, Hr, yr, allow_rank_deficient=False):
        Hr = np.atleast_2d(np.asarray(Hr, dtype=float))
        yr = np.asarray(yr, dtype=float).reshape(-1)
        if Hr.shape[0] != yr.shape[0]:
            raise DimensionMismatch(
                f"channel has {Hr.shape[0]} rows but y has {yr.shape[0]}")
        G, z = gram_and_matched_filter(Hr, yr)
        if Hr.shape[0] >= Hr.shape[1]:
            Q, L = ql_factorize(Hr, allow_rank_deficient=allow_rank_deficient)
            y_tilde = Q.T @ yr
            L_rows = [list(map(float, row[: i + 1])) for i, row in enumerate(L)]
            yt = list(map(float, y_tilde))
        else:
            L = y_tilde = L_rows = yt = None
        for a in (Hr, yr, G, z, L, y_tilde):
            if a is not None:
                a.setflags(write=False)
        return cls(Hr, yr, L, y_tilde, G, z, L_rows, yt)

    @property
    def depth(self):
        """Number of tree layers ``M``."""
        return self.Hr.shape[1]

    @property
    def has_ql(self):
        return self.L is not None

    def metric(self, x):
        """Full Euclidean metric ``||yr - Hr x||^2``."""
        r = self.yr - self.Hr @ np.asarray(x, dtype=float)
        return float(r @ r)
