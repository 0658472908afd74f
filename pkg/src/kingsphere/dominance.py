"""Dominance conditions and the decoders built on them.

For binary symbols the change in metric from flipping coordinate ``k``
is ``-2 (x_k - x'_k) (z_k - sum_{i != k} x_i g_ki)`` with ``z = Hr^T yr``
and ``G = Hr^T Hr``. When the matched-filter statistic ``z_k``, after
cancelling the known symbols, outweighs the worst-case interference of
the unknown ones, the sign of that difference no longer depends on the
unknowns and coordinate ``k`` of every best completion is fixed.

The checks work on ``G`` and ``z`` of the lifted system directly and
need no factorization.
"""

from dataclasses import dataclass, replace

import numpy as np

from .detection import DecodeResult, SearchConfig, TooLarge, tree_search
from .errors import DimensionMismatch

__all__ = [
    "DominanceContext",
    "DominanceDecision",
    "discrete_difference",
    "discrete_difference_k",
    "flip",
    "dominance_check",
    "king_decode",
    "king_sphere_decode",
]

KD_MAX_DEPTH = 24


@dataclass(frozen=True)
class DominanceDecision:
    decided: bool
    symbol: int = 0


UNDECIDED = DominanceDecision(False)


class DominanceContext:
    """Per-problem cache of ``G``, ``z`` and interference bounds.

    ``full_bounds[k]`` is ``sum_{i != k} |g_ki|`` (nothing known) and
    ``tail_bounds[k]`` is ``sum_{i > k} |g_ki|``, the bound left once
    coordinates ``0..k-1`` are known, as in a tree search.
    """

    def __init__(self, problem):
        G = np.asarray(problem.G, dtype=float)
        absG = np.abs(G)
        np.fill_diagonal(absG, 0.0)
        self.G = G
        self.z = np.asarray(problem.z, dtype=float)
        self.full_bounds = absG.sum(axis=1)
        self.tail_bounds = np.triu(absG, 1).sum(axis=1)
        self._G_rows = G.tolist()
        self._z = self.z.tolist()
        self._tail = self.tail_bounds.tolist()

    def prefix_rule(self, depth, xs):
        """Tree hook: coordinate ``depth`` with ``0..depth-1`` known."""
        row = self._G_rows[depth]
        s = self._z[depth]
        for m in range(depth):
            s -= xs[m] * row[m]
        if s > self._tail[depth]:
            return 1
        if -s > self._tail[depth]:
            return -1
        return 0


def flip(x, k):
    x = np.array(x, copy=True)
    x[k] = -x[k]
    return x


def discrete_difference(x, xhat, problem):
    """``f(x) - f(xhat)`` with ``f`` the Euclidean metric."""
    x = np.asarray(x, dtype=float)
    xhat = np.asarray(xhat, dtype=float)
    if x.shape != xhat.shape or x.shape != (problem.depth,):
        raise DimensionMismatch("symbol vectors must match the tree depth")
    return problem.metric(x) - problem.metric(xhat)


def discrete_difference_k(x, k, problem):
    """Closed form of ``f(x) - f(flip(x, k))`` for binary symbols."""
    x = np.asarray(x, dtype=float)
    if not 0 <= k < problem.depth:
        raise IndexError(f"coordinate {k} out of range")
    G, z = problem.G, problem.z
    interference = G[k] @ x - G[k, k] * x[k]
    return -2.0 * (2.0 * x[k]) * (z[k] - interference)


def dominance_check(k, known, context):
    """Conditional dominance test for coordinate ``k``.

    Parameters
    ----------
    k : int
    known : mapping of int to +-1
        The known symbols ``W``; ``k`` must not be among them. An empty
        mapping gives the unconditional test.
    context : DominanceContext or DetectionProblem
    """
    if not isinstance(context, DominanceContext):
        context = DominanceContext(context)
    if k in known:
        raise ValueError(f"coordinate {k} is already known")
    G_k = context.G[k]
    s = context.z[k]
    bound = context.full_bounds[k]
    for m, xm in known.items():
        s -= xm * G_k[m]
        bound -= abs(G_k[m])
    if abs(s) > bound and s != 0.0:
        return DominanceDecision(True, 1 if s > 0 else -1)
    return UNDECIDED


def king_decode(problem):
    """Tree search driven by dominance conditions alone.

    Every node of the coordinate tree is tested with ``0..depth-1`` known;
    decided nodes spawn one child, the others both. Surviving leaves are
    scored with the Euclidean metric and the best one returned, the first
    in lexicographic order on ties. Works for overloaded systems too.
    """
    M = problem.depth
    if M > KD_MAX_DEPTH:
        raise TooLarge(f"king decoder limited to depth {KD_MAX_DEPTH}")
    rule = DominanceContext(problem).prefix_rule
    visited = 0
    leaves = []
    stack = [()]
    while stack:
        xs = stack.pop()
        d = len(xs)
        if d == M:
            leaves.append(xs)
            continue
        keep = rule(d, xs)
        if keep:
            stack.append(xs + (keep,))
            visited += 1
        else:
            stack.append(xs + (1,))
            stack.append(xs + (-1,))
            visited += 2
    X = np.array(leaves, dtype=float).reshape(len(leaves), M)
    R = problem.yr[None, :] - X @ problem.Hr.T
    metrics = np.einsum("ij,ij->i", R, R)
    x = X[int(np.argmin(metrics))].astype(int)
    return DecodeResult(x, problem.metric(x), visited, 0, survivors=len(leaves))


def king_sphere_decode(problem, config=SearchConfig(dominance_enabled=True)):
    """Sphere decoder whose child generation also applies dominance.

    Before the children of a depth-``d`` node are evaluated, coordinate
    ``d`` is tested with the node's symbols as the known set; when the
    test fires only the dominant child is generated. The returned
    decision is the same as the plain sphere decoder's.
    """
    if not config.dominance_enabled:
        config = replace(config, dominance_enabled=True)
    return tree_search(problem, config, DominanceContext(problem).prefix_rule)
