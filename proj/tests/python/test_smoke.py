"""Smoke tests for the python bindings: exercise each exposed operation once
and check the analytic identities the C++ suites verify in depth."""

import math

import numpy as np
import pytest

import airfl


def make_round(seed=7, n=2, k=5, d=64):
    rng = airfl.Rng(seed)
    region = airfl.PlacementRegion()
    geo = airfl.sample_geometry(rng, np.array([-50.0, 0.0, 10.0]), region, k)
    cfg = airfl.ChannelConfig()
    cfg.num_antennas = n
    cfg.num_nodes = k
    chan = airfl.draw_realization(rng, geo, cfg)
    grads = np.random.default_rng(seed).normal(size=(k, d)) + 0.2
    symbols, stats = airfl.normalize(grads)
    return chan, symbols, stats


def test_path_loss_reference_point():
    assert airfl.path_loss(1.0, 1e-3, 1.0, 2.2) == pytest.approx(1e-3)
    assert airfl.path_loss(10.0, 1e-3, 1.0, 2.2) == pytest.approx(
        1e-3 * 10 ** -2.2
    )
    with pytest.raises(ValueError):
        airfl.path_loss(-1.0, 1e-3, 1.0, 2.2)


def test_rician_los_limit_is_exact():
    rng = airfl.Rng(1)
    assert airfl.sample_rician(rng, 1e12) == 1.0 + 0.0j


def test_normalize_round_trip():
    grads = np.random.default_rng(3).normal(size=(4, 100)) * 2.0 + 1.0
    symbols, stats = airfl.normalize(grads)
    assert np.allclose(symbols.mean(axis=1), 0.0, atol=1e-10)
    assert np.allclose((symbols**2).mean(axis=1), 1.0, atol=1e-10)
    superposed = (stats.delta[:, None] * symbols).sum(axis=0).astype(complex)
    decoded = airfl.denormalize(superposed, stats.g_bar)
    assert np.allclose(decoded, grads.mean(axis=0), atol=1e-9)


def test_design_satisfies_uniform_forcing():
    chan, _, stats = make_round()
    design, trace_u, trace_v = airfl.design(chan, stats)
    assert trace_u.converged and trace_v.converged
    audit = airfl.audit_uniform_forcing(design, chan, stats.delta)
    assert audit.max_residual <= 1e-8
    # Rank-one forwarding matrix with unit-norm factors.
    s = np.linalg.svd(design.M, compute_uv=False)
    assert s[1] <= 1e-9 * s[0]
    assert math.isclose(np.linalg.norm(design.u), 1.0, rel_tol=1e-9)


def test_node_mse_identity():
    chan, _, stats = make_round(seed=11)
    design, _, _ = airfl.design(chan, stats)
    for node in range(chan.H.shape[1]):
        direct = airfl.node_mse(design, chan, node)
        assert direct == pytest.approx(design.mse[node], rel=1e-9)
        scaled = airfl.expected_error_norm(design, chan, node, 1000)
        assert scaled == pytest.approx(
            1000 * direct / chan.H.shape[1] ** 2, rel=1e-12
        )


def test_transmit_round_noiseless_is_exact():
    chan, symbols, stats = make_round(seed=13)
    design, _, _ = airfl.design(chan, stats)
    rng = airfl.Rng(5)
    tx = airfl.transmit_round(symbols, stats, design, chan, rng, 0.0)
    assert np.abs(tx.error).max() <= 1e-10


def test_solver_single_constraint():
    rng = np.random.default_rng(17)
    c = (rng.normal(size=(3, 1)) + 1j * rng.normal(size=(3, 1))) / math.sqrt(2)
    w = np.array([1.5])
    x, value, trace = airfl.solve_max_min(c, w)
    assert value == pytest.approx(1.5 / np.linalg.norm(c) ** 2, rel=1e-6)
    assert trace.converged


def test_convergence_bound_shapes():
    bounds = airfl.convergence_bound(1.0, 0.5, 2.0, [0.0] * 5)
    assert len(bounds) == 5
    assert bounds[0] == pytest.approx(0.75)
    assert bounds[4] == pytest.approx(0.75**5)


def test_synthetic_dataset_and_sharding():
    ds = airfl.make_synthetic_digits(200, 3)
    assert ds.size() == 200
    assert ds.features.shape == (200, 784)
    shards = airfl.shard_non_iid(ds, 4, 50)
    assert len(shards) == 4
    flat = [i for shard in shards for i in shard]
    assert len(set(flat)) == 200
