import itertools

import numpy as np
import pytest

from kingsphere.detection import ml_exhaustive
from kingsphere.errors import DimensionMismatch, InvalidArgument
from kingsphere.modulation import (
    QAM16_POINTS,
    Modulation,
    ModulationKind,
    build_problem,
    decompose_16qam,
    expand_16qam,
    lift_4qam,
    lifted_to_symbols,
    normalize_energy,
    recompose_16qam,
    symbols_to_lifted,
)


def _complex_ml(H, y, points, K):
    # brute force over complex symbol vectors, independent of the lifting
    best, best_m = None, np.inf
    for cand in itertools.product(points, repeat=K):
        x = np.array(cand)
        m = np.sum(np.abs(y - H @ x) ** 2)
        if m < best_m:
            best, best_m = x, m
    return best


def test_lift_noiseless_scalar():
    s = 1 / np.sqrt(2)
    p = lift_4qam([[1]], [s * (1 + 1j)], scale=s)
    res = ml_exhaustive(p)
    np.testing.assert_array_equal(res.symbols, [1, 1])
    assert res.metric == pytest.approx(0.0, abs=1e-24)


def test_lift_doubles_depth():
    p = lift_4qam(np.ones((2, 2)) + 0.1 * np.eye(2), np.zeros(2))
    assert p.depth == 4


def test_lift_matches_complex_brute_force():
    rng = np.random.default_rng(0)
    mod = Modulation(ModulationKind.QAM4, 0.5)
    for _ in range(50):
        H = (rng.standard_normal((3, 2)) + 1j * rng.standard_normal((3, 2))) / np.sqrt(2)
        y = H @ mod.points[rng.integers(4, size=2)] + 0.4 * rng.standard_normal(3)
        x_c = _complex_ml(H, y, mod.points, 2)
        x_l = lifted_to_symbols(ml_exhaustive(build_problem(mod, H, y)).symbols,
                                ModulationKind.QAM4, 2)
        np.testing.assert_allclose(mod.scale * x_l, x_c)


def test_lift_metric_consistency():
    rng = np.random.default_rng(1)
    H = rng.standard_normal((3, 2)) + 1j * rng.standard_normal((3, 2))
    y = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    p = lift_4qam(H, y, scale=0.7)
    for bits in itertools.product([-1, 1], repeat=4):
        x = 0.7 * lifted_to_symbols(bits, "4qam", 2)
        assert abs(p.metric(bits) - np.sum(np.abs(y - H @ x) ** 2)) <= 1e-12


def test_lift_rejects_bad_scale():
    with pytest.raises(InvalidArgument):
        lift_4qam([[1]], [1], scale=0)


def test_expand_16qam():
    np.testing.assert_array_equal(expand_16qam([[1]]), [[1, 2]])


def test_16qam_decomposition_example():
    x1, x2 = decompose_16qam([3 + 1j])
    np.testing.assert_array_equal(x1, [1 - 1j])
    np.testing.assert_array_equal(x2, [1 + 1j])


def test_recompose_examples():
    np.testing.assert_array_equal(recompose_16qam([1 + 1j], [1 + 1j]), [3 + 3j])
    np.testing.assert_array_equal(recompose_16qam([-1 - 1j], [-1 - 1j]), [-3 - 3j])
    with pytest.raises(DimensionMismatch):
        recompose_16qam([1], [1, 1])


def test_recompose_is_bijection_onto_grid():
    qam4 = [complex(a, b) for a in (-1, 1) for b in (-1, 1)]
    out = {complex(recompose_16qam([a], [b])[0]) for a in qam4 for b in qam4}
    assert len(out) == 16
    assert out == set(QAM16_POINTS.tolist())


def test_16qam_expanded_ml_matches_direct_enumeration():
    rng = np.random.default_rng(2)
    mod = Modulation(ModulationKind.QAM16, 0.5)
    for _ in range(20):
        H = (rng.standard_normal((4, 2)) + 1j * rng.standard_normal((4, 2))) / np.sqrt(2)
        x = mod.points[rng.integers(16, size=2)]
        y = H @ x + 0.3 * (rng.standard_normal(4) + 1j * rng.standard_normal(4))
        direct = _complex_ml(H, y, mod.points, 2)
        p = build_problem(mod, H, y)
        assert p.depth == 8 and p.Hr.shape == (8, 8)
        xhat = lifted_to_symbols(ml_exhaustive(p).symbols, "16qam", 2)
        np.testing.assert_allclose(mod.scale * xhat, direct)


def test_symbols_round_trip():
    x = np.array([3 - 1j, -1 + 3j])
    np.testing.assert_array_equal(lifted_to_symbols(symbols_to_lifted(x, "16qam"), "16qam", 2), x)
    x = np.array([1 - 1j, -1 + 1j])
    np.testing.assert_array_equal(lifted_to_symbols(symbols_to_lifted(x, "4qam"), "4qam", 2), x)


def test_normalize_energy_examples():
    assert normalize_energy(Modulation(ModulationKind.QAM4), 1, 1.0) == pytest.approx(1 / np.sqrt(2))
    assert abs(1 + 1j) ** 2 * normalize_energy("4qam", 1, 1.0) ** 2 == pytest.approx(1.0)
    assert normalize_energy("16qam", 1, 10.0) == pytest.approx(1.0)
    assert normalize_energy("4qam", 4, 1.0) == pytest.approx(1 / np.sqrt(8))
    with pytest.raises(InvalidArgument):
        normalize_energy("4qam", 1, 0.0)


@pytest.mark.parametrize("kind", ["4qam", "16qam"])
def test_energy_law_of_large_numbers(kind):
    K, Ex = 4, 1.0
    mod = Modulation(ModulationKind(kind), Ex / K)
    assert mod.scale == pytest.approx(normalize_energy(kind, K, Ex))
    rng = np.random.default_rng(3)
    x = mod.points[rng.integers(len(mod.points), size=(100_000, K))]
    assert np.mean(np.sum(np.abs(x) ** 2, axis=1)) == pytest.approx(Ex, rel=0.01)


def test_constellation_mean_energy():
    for kind in ModulationKind:
        mod = Modulation(kind, 2.5)
        assert np.mean(np.abs(mod.points) ** 2) == pytest.approx(2.5, abs=1e-12)
