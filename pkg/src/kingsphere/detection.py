"""Tree-search maximum-likelihood detection on the binary lifted model.

The metric ``||y_tilde - L x||^2`` is split layer by layer; layer ``i``
only involves ``x[0..i]`` because ``L`` is lower-triangular, so the
accumulated partial distance (apd) of a node never decreases along a
path. The search is the generic branch-and-bound loop: pop a node from
ACTIVE, expand it if it is still inside the sphere, push its valid
children, and update the radius when a leaf is reached.

Node counting: a node is counted when its partial distance is computed,
i.e. when its parent is expanded. The root is never counted; children
excluded by a dominance hook are never computed and never counted.
"""

from dataclasses import dataclass, field
import enum
from functools import lru_cache
import math

import numpy as np

from .errors import InvalidArgument, NoSolution, TooLarge

__all__ = [
    "Traversal",
    "Enumeration",
    "SearchConfig",
    "Node",
    "DecodeResult",
    "ml_exhaustive",
    "partial_distance",
    "enumerate_children",
    "babai_point",
    "tree_search",
    "sphere_decode",
]

ML_MAX_DEPTH = 24
_ML_CHUNK = 1 << 15


class Traversal(enum.Enum):
    DFS = "dfs"
    BFS = "bfs"


class Enumeration(enum.Enum):
    NATURAL = "natural"
    ZIGZAG = "zigzag"


@dataclass(frozen=True)
class SearchConfig:
    """Tree-search settings.

    ``initial_radius_sq`` is a squared radius, ``math.inf``, or the string
    ``"babai"`` to start from the metric of the greedy zig-zag leaf.
    """

    traversal: Traversal = Traversal.DFS
    enumeration: Enumeration = Enumeration.ZIGZAG
    initial_radius_sq: float | str = math.inf
    restart_growth: float = 4.0
    dominance_enabled: bool = False

    def __post_init__(self):
        if not self.restart_growth > 1:
            raise InvalidArgument("restart_growth must exceed 1")
        r = self.initial_radius_sq
        if isinstance(r, str):
            if r != "babai":
                raise InvalidArgument(f"unknown radius policy {r!r}")
        elif not r > 0:
            raise InvalidArgument("initial radius must be positive")


@dataclass(frozen=True)
class Node:
    depth: int
    partial_symbols: tuple = ()
    apd: float = 0.0


@dataclass(frozen=True)
class DecodeResult:
    """Outcome of one decode.

    ``metric`` is the full Euclidean distance ``||yr - Hr x||^2``
    recomputed from the decided ``symbols``.
    """

    symbols: np.ndarray
    metric: float
    visited_nodes: int
    restarts: int = 0
    survivors: int | None = field(default=None, compare=False)

    def as_dict(self):
        return {
            "symbols": [int(s) for s in self.symbols],
            "metric": self.metric,
            "visited_nodes": self.visited_nodes,
            "restarts": self.restarts,
            "survivors": self.survivors,
        }


@lru_cache(maxsize=None)
def _candidates(M):
    # lexicographic order with -1 < +1 and x[0] most significant
    idx = np.arange(1 << M)
    shifts = np.arange(M - 1, -1, -1)
    X = (((idx[:, None] >> shifts) & 1) * 2 - 1).astype(float)
    X.setflags(write=False)
    return X


def ml_exhaustive(problem):
    """Scan all of ``{-1, +1}^M``; ties go to the lexicographically first.

    ``visited_nodes`` is reported as ``2**M`` by convention.
    """
    M = problem.depth
    if M > ML_MAX_DEPTH:
        raise TooLarge(f"exhaustive search over 2^{M} vectors refused")
    Hr, yr = problem.Hr, problem.yr
    best_metric, best_x = math.inf, None
    if M <= 16:
        chunks = [_candidates(M)]
    else:
        chunks = (_chunk(M, s) for s in range(0, 1 << M, _ML_CHUNK))
    for X in chunks:
        R = yr[None, :] - X @ Hr.T
        metrics = np.einsum("ij,ij->i", R, R)
        i = int(np.argmin(metrics))
        if metrics[i] < best_metric:
            best_metric, best_x = float(metrics[i]), X[i]
    x = best_x.astype(int)
    return DecodeResult(x, problem.metric(x), 1 << M)


def _chunk(M, start):
    idx = np.arange(start, min(start + _ML_CHUNK, 1 << M))
    shifts = np.arange(M - 1, -1, -1)
    return (((idx[:, None] >> shifts) & 1) * 2 - 1).astype(float)


def _layer_mean(problem, depth, xs):
    row = problem._L_rows[depth]
    mean = problem._y_tilde[depth]
    for j in range(depth):
        mean -= row[j] * xs[j]
    return mean, row[depth]


def partial_distance(node, candidate, problem):
    """Apd of the child of ``node`` taking ``candidate`` at the next layer."""
    mean, diag = _layer_mean(problem, node.depth, node.partial_symbols)
    return node.apd + (mean - diag * candidate) ** 2


def enumerate_children(node, problem, order=Enumeration.ZIGZAG):
    """Candidate symbols for the next layer, in visiting order.

    Natural order is always ``(-1, +1)``. Zig-zag puts first the symbol
    nearer the unconstrained estimate ``mean / l_dd``, which is the one
    with the smaller layer term; an exact tie yields ``(-1, +1)``.
    """
    if Enumeration(order) is Enumeration.NATURAL:
        return (-1, 1)
    mean, diag = _layer_mean(problem, node.depth, node.partial_symbols)
    return (1, -1) if mean * diag > 0 else (-1, 1)


def babai_point(problem):
    """Greedy zig-zag leaf and its tree metric."""
    xs, apd = (), 0.0
    for d in range(problem.depth):
        mean, diag = _layer_mean(problem, d, xs)
        c = 1 if mean * diag > 0 else -1
        apd += (mean - diag * c) ** 2
        xs += (c,)
    return xs, apd


def tree_search(problem, config=SearchConfig(), restrict=None, trace=None):
    """Generic branch-and-bound search over the QL tree.

    Parameters
    ----------
    problem : DetectionProblem
        Must carry QL factors.
    config : SearchConfig
    restrict : callable, optional
        ``restrict(depth, partial_symbols)`` returns ``+1`` or ``-1`` to
        keep a single child at layer ``depth``, or ``0`` to keep both.
        Called on every expanded node before any child is evaluated.
    trace : list, optional
        Receives ``(event, depth, apd, radius_sq)`` tuples for every
        expansion (``"expand"``) and accepted leaf (``"leaf"``).

    Returns
    -------
    DecodeResult
        The ML decision; visited nodes are summed over restarts.
    """
    if not problem.has_ql:
        raise InvalidArgument("tree search needs rows >= tree depth")
    M = problem.depth
    L_rows, yt = problem._L_rows, problem._y_tilde
    zigzag = config.enumeration is Enumeration.ZIGZAG
    dfs = config.traversal is Traversal.DFS

    r2 = config.initial_radius_sq
    if r2 == "babai":
        r2 = babai_point(problem)[1]

    def expand(d, apd, xs):
        row = L_rows[d]
        mean = yt[d]
        for j in range(d):
            mean -= row[j] * xs[j]
        diag = row[d]
        keep = restrict(d, xs) if restrict is not None else 0
        if keep:
            cands = (keep,)
        elif zigzag and mean * diag > 0:
            cands = (1, -1)
        else:
            cands = (-1, 1)
        return [(apd + (mean - diag * c) ** 2, c) for c in cands]

    visited = 0
    restarts = 0
    while True:
        best, best_apd = None, math.inf
        if dfs:
            stack = [(0, 0.0, ())]
            while stack:
                d, apd, xs = stack.pop()
                if apd > r2:
                    continue
                if d == M:
                    if best is None or apd < best_apd:
                        best, best_apd = xs, apd
                        r2 = apd
                        if trace is not None:
                            trace.append(("leaf", d, apd, r2))
                    continue
                if trace is not None:
                    trace.append(("expand", d, apd, r2))
                kids = expand(d, apd, xs)
                visited += len(kids)
                for child_apd, c in reversed(kids):
                    if child_apd <= r2:
                        stack.append((d + 1, child_apd, xs + (c,)))
        else:
            level = [(0.0, ())]
            for d in range(M):
                nxt = []
                for apd, xs in level:
                    if trace is not None:
                        trace.append(("expand", d, apd, r2))
                    kids = expand(d, apd, xs)
                    visited += len(kids)
                    for child_apd, c in kids:
                        if child_apd <= r2:
                            nxt.append((child_apd, xs + (c,)))
                level = nxt
                if not level:
                    break
            for apd, xs in level:
                if best is None or apd < best_apd:
                    best, best_apd = xs, apd
            if best is not None and trace is not None:
                trace.append(("leaf", M, best_apd, r2))
        if best is not None:
            break
        if math.isinf(r2):
            raise NoSolution("no leaf found with an infinite radius")
        r2 *= config.restart_growth
        restarts += 1
        if math.isinf(r2):
            raise NoSolution("radius overflowed while restarting")

    x = np.array(best, dtype=int)
    return DecodeResult(x, problem.metric(x), visited, restarts)


def sphere_decode(problem, config=SearchConfig()):
    """Sphere decoder with partial-distance pruning only.

    A config with ``dominance_enabled`` set is routed to the king sphere
    decoder.
    """
    if config.dominance_enabled:
        from .dominance import king_sphere_decode

        return king_sphere_decode(problem, config)
    return tree_search(problem, config)
