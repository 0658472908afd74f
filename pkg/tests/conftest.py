import numpy as np
import pytest

from kingsphere.channel import ChannelSpec, Fading, RngStream, add_noise, draw_channel, eta0_for_snr
from kingsphere.modulation import Modulation, ModulationKind, build_problem
from kingsphere.problem import DetectionProblem


def random_real_problem(rng, M, rows=None, noise=0.5):
    """Tall Gaussian real problem with a BPSK transmit vector."""
    rows = rows or M + int(rng.integers(0, 3))
    Hr = rng.standard_normal((rows, M))
    x = rng.choice([-1.0, 1.0], M)
    yr = Hr @ x + noise * rng.standard_normal(rows)
    return DetectionProblem.from_real(Hr, yr)


def mimo_problem(K, N, kind, fading, snr_db, seed, trial):
    rho = 0.5 if fading == "kron" else 0.0
    spec = ChannelSpec(N, K, Fading(fading), rho, rho)
    mod = Modulation(ModulationKind(kind), 1.0 / K)
    H = draw_channel(spec, RngStream(seed, (trial, 0)))
    g = RngStream(seed, (trial, 1)).generator()
    x = mod.points[g.integers(len(mod.points), size=K)]
    y = add_noise(H @ x, eta0_for_snr(snr_db), RngStream(seed, (trial, 2)))
    return build_problem(mod, H, y)


def orthogonal_problem(rng, M, rows=None, zero_matched_filter=False):
    """Channel with orthonormal columns (identity Gram).

    With ``zero_matched_filter`` the columns are signed, permuted columns
    of an integer Hadamard matrix and ``yr`` an integer combination of the
    unused ones, so ``G = n I`` and ``z = 0`` hold exactly.
    """
    if zero_matched_filter:
        n = 1 << int(M).bit_length()
        Hd = np.array([[1.0]])
        while Hd.shape[0] < n:
            Hd = np.block([[Hd, Hd], [Hd, -Hd]])
        Hd = Hd[rng.permutation(n)] * rng.choice([-1.0, 1.0], n)[:, None]
        cols = rng.permutation(n)
        yr = Hd[:, cols[M:]] @ rng.integers(-3, 4, n - M).astype(float)
        return DetectionProblem.from_real(Hd[:, cols[:M]], yr)
    rows = rows or M + 2
    Q, _ = np.linalg.qr(rng.standard_normal((rows, rows)))
    Hr = Q[:, :M]
    yr = Hr @ rng.choice([-1.0, 1.0], M) + rng.standard_normal(rows)
    return DetectionProblem.from_real(Hr, yr)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def integer_left_null(A):
    """Integer vector orthogonal to the columns of an (M+1) x M integer matrix."""
    n = A.shape[0]
    return np.array([(-1) ** i * round(np.linalg.det(np.delete(A, i, 0))) for i in range(n)],
                    dtype=float)


def near_collinear_integer_problems(seed, budget, max_depth=5):
    """Integer channels ``c 1^T + small`` with ``yr`` orthogonal to every column.

    All Gram and matched-filter entries are small integers, so each
    dominance bracket is computed exactly and can be exactly zero.
    """
    rng = np.random.default_rng(seed)
    for _ in range(budget):
        M = int(rng.integers(2, max_depth + 1))
        c = rng.integers(1, 3, size=M + 1)
        Hr = (c[:, None] + rng.integers(-1, 2, size=(M + 1, M))).astype(float)
        if np.linalg.matrix_rank(Hr) < M:
            continue
        yield DetectionProblem.from_real(Hr, integer_left_null(Hr))


def max_abs_correlation(Hr):
    Hn = Hr / np.linalg.norm(Hr, axis=0)
    C = np.abs(Hn.T @ Hn)
    np.fill_diagonal(C, 0.0)
    return float(C.max()) if C.size > 1 else 0.0


ACCEPTANCE_LINES = []


def record(criterion, ok, detail):
    """Store a one-line verdict for the terminal summary, then assert it."""
    ACCEPTANCE_LINES.append(f"{criterion}: {'PASS' if ok else 'FAIL'} {detail}")
    assert ok, f"{criterion}: {detail}"


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
