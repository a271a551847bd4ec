import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nafs.ensemble import (
    DEFAULT_R_VALUES,
    EnsembleConfig,
    nafs_ensemble,
    nafs_ensemble_sweep,
    pool,
)
from nafs.errors import NafsError, ParameterError
from nafs.graph import generate_er
from nafs.smoothing import SmoothingConfig, nafs_single, row_normalize


@pytest.fixture(scope="module")
def problem():
    g = generate_er(120, 0.04, 6)
    x = np.random.default_rng(3).standard_normal((120, 7))
    return g, x


def test_pool_strategies():
    a = np.array([[1.0, -2.0], [0.0, 4.0]])
    b = np.array([[3.0, -1.0], [-2.0, 1.0]])
    np.testing.assert_allclose(pool([a, b], "mean"), [[2.0, -1.5], [-1.0, 2.5]])
    np.testing.assert_allclose(pool([a, b], "max"), [[3.0, -1.0], [0.0, 4.0]])
    np.testing.assert_allclose(pool([a, b], "concat"), np.hstack([a, b]))
    np.testing.assert_allclose(pool([a, b], "mean", normalize_branches=True),
                               (row_normalize(a) + row_normalize(b)) / 2)


def test_pool_shape_mismatch():
    with pytest.raises(NafsError):
        pool([np.ones((2, 2)), np.ones((3, 2))], "mean")


def test_config_validation():
    assert EnsembleConfig().r_values == DEFAULT_R_VALUES
    for bad in ((), (0.1, 0.1), (0.2, 1.3)):
        with pytest.raises(ParameterError):
            EnsembleConfig(r_values=bad)
    with pytest.raises(ParameterError):
        EnsembleConfig(strategy="sum")


@pytest.mark.parametrize("strategy", ["mean", "max", "concat"])
def test_ensemble_pools_single_branches(problem, strategy):
    g, x = problem
    cfg = SmoothingConfig(k_max=5)
    ens = EnsembleConfig(r_values=(0.0, 0.25, 0.5), strategy=strategy)
    branches = [nafs_single(g, x, r, cfg).matrix for r in ens.r_values]
    np.testing.assert_allclose(nafs_ensemble(g, x, cfg, ens), pool(branches, strategy), atol=1e-15)


def test_parallel_branches_are_identical(problem):
    g, x = problem
    cfg = SmoothingConfig(k_max=4)
    ens = EnsembleConfig(strategy="concat")
    serial = nafs_ensemble(g, x, cfg, ens)
    parallel = nafs_ensemble(g, x, cfg, ens, parallel_branches=True)
    assert np.array_equal(serial, parallel)
    assert serial.shape == (120, 7 * len(DEFAULT_R_VALUES))


def test_single_r_ensemble_equals_single_branch(problem):
    g, x = problem
    cfg = SmoothingConfig(k_max=3, distance_mode="euclid-stationary")
    for strategy in ("mean", "max", "concat"):
        out = nafs_ensemble(g, x, cfg, EnsembleConfig(r_values=(0.3,), strategy=strategy))
        np.testing.assert_allclose(out, nafs_single(g, x, 0.3, cfg).matrix, atol=1e-15)


@settings(max_examples=15, deadline=None)
@given(ks=st.lists(st.integers(0, 12), min_size=1, max_size=5),
       strategy=st.sampled_from(["mean", "max", "concat"]),
       mode=st.sampled_from(["cos-initial", "euclid-stationary"]))
def test_sweep_matches_independent_runs(problem, ks, strategy, mode):
    g, x = problem
    ens = EnsembleConfig(r_values=(0.0, 0.5), strategy=strategy)
    got = dict(nafs_ensemble_sweep(g, x, SmoothingConfig(distance_mode=mode), ens, ks))
    assert sorted(got) == sorted(set(ks))
    for k, z in got.items():
        ref = nafs_ensemble(g, x, SmoothingConfig(k_max=k, distance_mode=mode), ens)
        np.testing.assert_allclose(z, ref, atol=1e-13)


def test_sweep_rejects_negative_k(problem):
    g, x = problem
    with pytest.raises(ParameterError):
        list(nafs_ensemble_sweep(g, x, SmoothingConfig(), EnsembleConfig(), [-1, 2]))


@settings(max_examples=20, deadline=None)
@given(order=st.permutations([0.0, 0.2, 0.5]))
def test_mean_and_max_ignore_branch_order(problem, order):
    g, x = problem
    cfg = SmoothingConfig(k_max=3)
    for strategy in ("mean", "max"):
        ref = nafs_ensemble(g, x, cfg, EnsembleConfig(r_values=(0.0, 0.2, 0.5), strategy=strategy))
        got = nafs_ensemble(g, x, cfg, EnsembleConfig(r_values=tuple(order), strategy=strategy))
        np.testing.assert_allclose(got, ref, rtol=0, atol=1e-15)


def test_pooling_bounds_and_concat_order(problem):
    g, x = problem
    cfg = SmoothingConfig(k_max=3)
    rs = (0.0, 0.1, 0.4, 0.5)
    branches = np.stack([nafs_single(g, x, r, cfg).matrix for r in rs])
    mean = nafs_ensemble(g, x, cfg, EnsembleConfig(r_values=rs, strategy="mean"))
    top = nafs_ensemble(g, x, cfg, EnsembleConfig(r_values=rs, strategy="max"))
    assert np.all(branches.min(axis=0) <= mean + 1e-15) and np.all(mean <= top + 1e-15)
    cat = nafs_ensemble(g, x, cfg, EnsembleConfig(r_values=rs, strategy="concat"))
    assert cat.shape[1] == len(rs) * x.shape[1]
    np.testing.assert_array_equal(cat[:, x.shape[1]:2 * x.shape[1]], branches[1])


def test_concat_of_two_branches_on_er_20():
    g = generate_er(20, 0.2, 4)
    x = np.random.default_rng(4).standard_normal((20, 3))
    cfg = SmoothingConfig(k_max=4)
    cat = nafs_ensemble(g, x, cfg, EnsembleConfig(r_values=(0.1, 0.4), strategy="concat"))
    np.testing.assert_array_equal(cat[:, :3], nafs_single(g, x, 0.1, cfg).matrix)
    np.testing.assert_array_equal(cat[:, 3:], nafs_single(g, x, 0.4, cfg).matrix)
