import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nafs.errors import DataError, ParameterError
from nafs.graph import build_graph, generate_er, normalized_operator
from nafs.smoothing import (
    SpectralInfo,
    decile_thresholds,
    euclid_distances,
    first_passage_steps,
    mixing_time_bound,
    second_eigenvalue,
    smoothing_speed_report,
    spectral_info,
    theorem1_bound,
)

from conftest import connected_er
from oracles import dense_adjacency, dense_distances, dense_operator


def cycle(n):
    return build_graph([(i, (i + 1) % n) for i in range(n)], n)


def test_second_eigenvalue_closed_forms(triangle, path2):
    # complete graphs collapse to the all-ones projector
    assert second_eigenvalue(triangle) == pytest.approx(0.0, abs=1e-12)
    assert second_eigenvalue(path2) == pytest.approx(0.0, abs=1e-12)
    # on the n-cycle every d~ is 3, so eigenvalues are (1 + 2 cos(2 pi j / n)) / 3
    for n in (4, 7, 12):
        expected = (1 + 2 * math.cos(2 * math.pi / n)) / 3
        assert second_eigenvalue(cycle(n)) == pytest.approx(expected, abs=1e-12)


def test_power_iteration_agrees_with_dense_solver():
    g = connected_er(300, 0.05, 2)
    dense = second_eigenvalue(g)
    iterative = second_eigenvalue(g, dense_limit=0, tol=1e-12)
    assert iterative == pytest.approx(dense, abs=1e-5)


def test_spectral_info_constants():
    g = build_graph([(0, 1), (1, 2)], 3)
    x = np.array([[1.0, -2.0], [0.0, 3.0], [1.0, 1.0]])
    info = spectral_info(g, x)
    # d~ = (2, 3, 2)
    assert info.cdx == pytest.approx(2 * 5 + 3 * 9 + 2 * 2)
    assert info.cdx_l1 == pytest.approx(2 * 3 + 3 * 3 + 2 * 2)


def test_theorem1_bound_formula():
    g = build_graph([(0, 1), (1, 2)], 3)
    info = SpectralInfo(lambda2=0.5, cdx=12.0, cdx_l1=1.0)
    np.testing.assert_allclose(theorem1_bound(g, info, 2), 0.25 * np.sqrt(12.0 / np.array([2, 3, 2])))


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 100_000), n=st.integers(20, 60))
def test_theorem1_bound_holds_on_connected_er(seed, n):
    g = connected_er(n, 0.2, seed)
    x = np.random.default_rng(seed).standard_normal((n, 5))
    info = spectral_info(g, x)
    dist = euclid_distances(g, x, 0.0, 12)
    for k in range(13):
        assert np.all(dist[:, k] <= theorem1_bound(g, info, k) * (1 + 1e-9) + 1e-12)


def test_mixing_time_formula():
    g = build_graph([(0, 1), (1, 2)], 3)
    info = SpectralInfo(lambda2=0.5, cdx=1.0, cdx_l1=64.0)
    # 2 * d~ * eps / 64 with eps = 1 gives 1/16 (d~=2) and 3/32 (d~=3)
    expected = [4, math.ceil(math.log(3 / 32) / math.log(0.5)), 4]
    assert mixing_time_bound(g, info, 1.0).tolist() == expected


def test_mixing_time_clamps_at_zero_and_handles_zero_features():
    g = build_graph([(0, 1)], 2)
    info = SpectralInfo(lambda2=0.5, cdx=1.0, cdx_l1=1.0)
    assert mixing_time_bound(g, info, 10.0).tolist() == [0, 0]
    assert mixing_time_bound(g, SpectralInfo(0.5, 0.0, 0.0), 0.1).tolist() == [0, 0]


def test_mixing_time_rejects_bad_inputs():
    g = build_graph([(0, 1)], 2)
    with pytest.raises(ParameterError):
        mixing_time_bound(g, SpectralInfo(0.0, 1.0, 1.0), 0.1)
    with pytest.raises(ParameterError):
        mixing_time_bound(g, SpectralInfo(0.5, 1.0, 1.0), 0.0)
    disconnected = build_graph([(0, 1)], 3)
    with pytest.raises(DataError):
        mixing_time_bound(disconnected, SpectralInfo(0.5, 1.0, 1.0), 0.1)
    with pytest.raises(DataError):
        theorem1_bound(disconnected, SpectralInfo(0.5, 1.0, 1.0), 1)


def test_distance_bound_on_er_30_with_dense_distances():
    g = connected_er(30, 0.2, 7)
    x = np.random.default_rng(7).standard_normal((30, 4))
    info = spectral_info(g, x)
    dist = dense_distances(dense_operator(dense_adjacency(g), 0.0), x, 10, "euclid-stationary")
    for k in range(1, 11):
        assert np.all(dist[:, k] <= theorem1_bound(g, info, k))


def test_mixing_time_bound_holds_empirically():
    g = connected_er(30, 0.2, 1)
    x = np.random.default_rng(0).standard_normal((30, 4))
    info = spectral_info(g, x)
    bound = mixing_time_bound(g, info, 0.01)
    dist = dense_distances(dense_operator(dense_adjacency(g), 0.0), x, int(bound.max()) + 5, "euclid-stationary")
    hit = first_passage_steps(dist, 0.01)
    assert np.all(hit >= 0) and np.all(hit <= bound)


def test_first_passage_steps():
    d = np.array([[3.0, 1.0, 0.5, 0.1], [3.0, 3.0, 3.0, 3.0], [0.0, 1.0, 0.0, 0.0]])
    assert first_passage_steps(d, 0.5).tolist() == [2, -1, 0]


def test_decile_thresholds():
    deg = np.arange(1, 101)
    assert decile_thresholds(deg) == [11, 90]
    assert decile_thresholds(np.full(10, 4)) == [4]


def test_speed_report_buckets():
    g = generate_er(400, 0.03, 5)
    x = np.random.default_rng(1).standard_normal((400, 8))
    rep = smoothing_speed_report(g, x, 0.0, 6, thresholds=[8, 16, 10_000])
    assert [(b.lo, b.hi) for b in rep.buckets] == [(0, 8), (8, 16), (16, 10_000), (10_000, None)]
    assert sum(b.nodes for b in rep.buckets) == 400
    assert rep.buckets[-1].nodes == 0 and rep.buckets[-1].curve is None
    dist = euclid_distances(g, x, 0.0, 6)
    low = g.degrees < 8
    np.testing.assert_allclose(rep.buckets[0].curve, dist[low].mean(axis=0))
    np.testing.assert_allclose(rep.overall, dist.mean(axis=0))
    with pytest.raises(ParameterError):
        smoothing_speed_report(g, x, 0.0, 3, thresholds=[5, 5])


def test_distances_to_stationary_decay():
    g = connected_er(200, 0.05, 3)
    x = np.random.default_rng(0).standard_normal((200, 6))
    for r in (0.0, 0.5, 1.0):
        curve = euclid_distances(g, x, r, 40).mean(axis=0)
        assert curve[-1] < 1e-3 * curve[0]


def test_bound_with_lambda2_can_fail_when_a_negative_eigenvalue_dominates():
    # K_{2,3}-like graph: the most negative eigenvalue (-5/12) outweighs lambda2 (1/3),
    # so distances decay like (5/12)^k and eventually cross the lambda2 curve
    g = build_graph([(0, 2), (0, 3), (1, 2), (1, 3), (2, 4), (3, 4)], 5)
    x = np.random.default_rng(3).standard_normal((5, 2))
    info = spectral_info(g, x)
    eig = np.linalg.eigvalsh(normalized_operator(g, 0.5).to_dense())
    assert info.lambda2 == pytest.approx(1 / 3) and eig[0] == pytest.approx(-5 / 12)
    dist = euclid_distances(g, x, 0.0, 30)
    lam2_bound = np.column_stack([theorem1_bound(g, info, k) for k in range(31)])
    assert np.any(dist > lam2_bound)
    modulus = max(abs(eig[0]), eig[-2])
    safe = np.column_stack([modulus ** k * np.sqrt(info.cdx / g.dtilde) for k in range(31)])
    assert np.all(dist <= safe * (1 + 1e-9))
