"""Dense linear algebra used by the detectors.

All functions are pure: inputs are never modified and fresh arrays are
returned.
"""

import numpy as np

from .errors import DimensionMismatch, NotPSD, NotSymmetric, RankDeficient

__all__ = [
    "ql_factorize",
    "complex_to_real_model",
    "psd_sqrt",
    "gram_and_matched_filter",
]

RANK_TOL = 1e-10


def _householder_qr(B, allow_rank_deficient=False):
    """Thin Householder QR with a nonnegative diagonal in ``R``.

    Pivots below ``RANK_TOL`` times the original column norm either raise
    :class:`RankDeficient` or, when ``allow_rank_deficient`` is set, are
    stored as exact zeros.
    """
    m, n = B.shape
    R = B.astype(float).copy()
    Q = np.eye(m)
    col_norms = np.linalg.norm(B, axis=0)
    for j in range(n):
        x = R[j:, j]
        normx = np.linalg.norm(x)
        if normx <= RANK_TOL * col_norms[j] or col_norms[j] == 0.0:
            if not allow_rank_deficient:
                raise RankDeficient(
                    f"column {j} is numerically dependent on the previous ones")
            R[j:, j] = 0.0
            continue
        v = x.copy()
        v[0] += normx if x[0] >= 0 else -normx
        v /= np.linalg.norm(v)
        R[j:, j:] -= 2.0 * np.outer(v, v @ R[j:, j:])
        Q[:, j:] -= 2.0 * np.outer(Q[:, j:] @ v, v)
        R[j + 1:, j] = 0.0
    Q = Q[:, :n]
    R = np.triu(R[:n, :])
    signs = np.where(np.diag(R) < 0, -1.0, 1.0)
    return Q * signs, R * signs[:, None]


def ql_factorize(A, allow_rank_deficient=False):
    """Factor a tall real matrix as ``A = Q @ L``.

    ``Q`` has orthonormal columns (``rows x cols``) and ``L`` is
    ``cols x cols`` lower-triangular with a nonnegative diagonal, so that
    row ``i`` of ``L`` only touches coordinates ``0..i``.

    The factorization is a Householder QR of ``A`` with its columns in
    reversed order, mapped back by reversing rows and columns of ``R``.

    Parameters
    ----------
    A : (m, n) array_like of float, m >= n
    allow_rank_deficient : bool
        Accept dependent columns, leaving a zero on the diagonal of ``L``.
        Needed by the layered 16-QAM model, whose columns are collinear
        in pairs.

    Raises
    ------
    DimensionMismatch
        If ``A`` has fewer rows than columns.
    RankDeficient
        If a pivot falls below ``1e-10`` times its column norm.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise DimensionMismatch("expected a 2-D matrix")
    m, n = A.shape
    if m < n:
        raise DimensionMismatch(f"QL needs rows >= cols, got {m}x{n}")
    Q, R = _householder_qr(A[:, ::-1], allow_rank_deficient)
    return Q[:, ::-1].copy(), R[::-1, ::-1].copy()


def complex_to_real_model(H, y):
    """Lift a complex system ``y = H x`` to its real equivalent.

    Returns ``Hr = [[Re H, -Im H], [Im H, Re H]]`` and ``yr = [Re y; Im y]``.
    """
    H = np.atleast_2d(np.asarray(H, dtype=complex))
    y = np.asarray(y, dtype=complex).reshape(-1)
    if H.shape[0] != y.shape[0]:
        raise DimensionMismatch(
            f"channel has {H.shape[0]} rows but y has {y.shape[0]} entries")
    Hr = np.block([[H.real, -H.imag], [H.imag, H.real]])
    yr = np.concatenate([y.real, y.imag])
    return Hr, yr


def psd_sqrt(R):
    """Symmetric square root of a symmetric positive semidefinite matrix.

    Computed from the eigendecomposition, with eigenvalues in
    ``[-1e-8, 0)`` clamped to zero. Diagonal inputs take an exact path so
    that the identity maps to the identity bit for bit.
    """
    R = np.asarray(R, dtype=float)
    if R.ndim != 2 or R.shape[0] != R.shape[1]:
        raise DimensionMismatch("psd_sqrt needs a square matrix")
    scale = max(1.0, np.abs(R).max(initial=0.0))
    if np.abs(R - R.T).max(initial=0.0) > 1e-12 * scale:
        raise NotSymmetric("matrix is not symmetric")
    if np.count_nonzero(R - np.diag(np.diag(R))) == 0:
        d = np.diag(R)
        if d.min(initial=0.0) < -1e-8:
            raise NotPSD(f"negative eigenvalue {d.min()}")
        return np.diag(np.sqrt(np.clip(d, 0.0, None)))
    w, V = np.linalg.eigh((R + R.T) / 2)
    if w.min() < -1e-8:
        raise NotPSD(f"negative eigenvalue {w.min()}")
    S = (V * np.sqrt(np.clip(w, 0.0, None))) @ V.T
    return (S + S.T) / 2


def gram_and_matched_filter(Hr, yr):
    """Return ``G = Hr^T Hr`` and ``z = Hr^T yr``."""
    Hr = np.atleast_2d(np.asarray(Hr, dtype=float))
    yr = np.asarray(yr, dtype=float).reshape(-1)
    if Hr.shape[0] != yr.shape[0]:
        raise DimensionMismatch(
            f"channel has {Hr.shape[0]} rows but y has {yr.shape[0]} entries")
    G = Hr.T @ Hr
    G = (G + G.T) / 2
    return G, Hr.T @ yr
