import math

import numpy as np
import pytest

from mmwsched.channel import (NetworkRealization, UeState, array_response,
                              cluster_power_profile, dump_realization,
                              generate_realization, load_realization, path_loss_db,
                              synthesize_channel, synthesize_mb)
from mmwsched.config import load_config, with_overrides
from mmwsched.rng import SMALLSCALE, substream


@pytest.fixture(scope="module")
def cfg():
    return load_config(profile="desk")


def test_array_response_basics():
    np.testing.assert_allclose(array_response(2, 0.0), [1.0, 1.0])
    np.testing.assert_allclose(array_response(2, np.pi / 2), [1.0, -1.0], atol=1e-12)
    resp = array_response(4, 0.7)
    np.testing.assert_allclose(np.abs(resp), 1.0)
    # element k is e^{j pi k sin phi}
    np.testing.assert_allclose(resp[3], np.exp(1j * np.pi * 3 * np.sin(0.7)))


def test_path_loss_deterministic_part():
    assert path_loss_db(1.0, 72.0, 2.92) == pytest.approx(72.0)
    delta = path_loss_db(100.0, 72.0, 2.92) - path_loss_db(10.0, 72.0, 2.92)
    assert delta == pytest.approx(29.2)
    with pytest.raises(ValueError):
        path_loss_db(0.0, 72.0, 2.92)


def test_shadowing_std_consistency():
    rng = substream(7, 1)
    draws = np.array([path_loss_db(50.0, 72.0, 2.92, 8.7, rng) for _ in range(10000)])
    assert abs(draws.std(ddof=1) - 8.7) / 8.7 < 0.02
    assert draws.mean() == pytest.approx(path_loss_db(50.0, 72.0, 2.92), rel=0.01)


def test_realization_determinism(cfg):
    a = generate_realization(cfg, seed=11)
    b = generate_realization(cfg, seed=11)
    for ua, ub in zip(a.ues, b.ues):
        np.testing.assert_array_equal(ua.position, ub.position)
        np.testing.assert_array_equal(ua.aod, ub.aod)
        assert ua.path_loss_db == ub.path_loss_db
    c = generate_realization(cfg, seed=12)
    assert not np.array_equal(a.ues[0].position, c.ues[0].position)


def test_drops_inside_annulus(cfg):
    big = with_overrides(cfg, n_ues=2000)
    real = generate_realization(big, seed=3)
    dist = np.array([np.hypot(*ue.position) for ue in real.ues])
    assert np.all(dist > cfg.exclusion_radius)
    assert np.all(dist <= cfg.cell_radius)


def test_annulus_mean_distance(cfg):
    big = with_overrides(cfg, n_ues=100000)
    real = generate_realization(big, seed=7)
    dist = np.array([np.hypot(*ue.position) for ue in real.ues])
    r1, r2 = cfg.exclusion_radius, cfg.cell_radius
    analytic = (2.0 / 3.0) * (r2 ** 3 - r1 ** 3) / (r2 ** 2 - r1 ** 2)
    assert abs(dist.mean() - analytic) / analytic < 0.01


def test_cluster_powers_normalized(cfg):
    nu = cluster_power_profile(5)
    assert nu.sum() == pytest.approx(1.0)
    assert np.all(nu > 0)
    assert np.all(np.diff(nu) < 0)
    real = generate_realization(cfg, seed=5)
    for ue in real.ues:
        assert ue.cluster_powers.sum() == pytest.approx(1.0)
        assert np.all(np.abs(ue.aod) <= np.pi / 2)
        assert np.all(np.abs(ue.aoa) <= np.pi / 2)


def test_single_path_outer_product(cfg):
    ue = UeState(position=np.zeros(2), path_loss_db=80.0, cluster_powers=np.ones(1),
                 aod=np.array([[0.3]]), aoa=np.array([[-0.2]]))
    real = NetworkRealization(seed=5, bs_height=10.0, ues=[ue])
    h = synthesize_channel(real, cfg, u=0, q=2, mb=7)
    rng = substream(5, SMALLSCALE, 7, 2, 0)
    kappa = complex((rng.standard_normal((1, 1)) + 1j * rng.standard_normal((1, 1)))[0, 0]) \
        / math.sqrt(2.0)
    sigma = math.sqrt(10 ** (-0.1 * 80.0))
    expected = sigma * kappa * np.outer(array_response(cfg.n_ue_antennas, -0.2),
                                        array_response(cfg.n_bs_antennas, 0.3).conj())
    np.testing.assert_allclose(h, expected, rtol=1e-13)
    assert np.linalg.matrix_rank(h) == 1


def test_rank_bound(cfg):
    ue = UeState(position=np.zeros(2), path_loss_db=70.0,
                 cluster_powers=np.array([0.6, 0.4]),
                 aod=np.array([[0.1, 0.4], [-0.5, 0.9]]),
                 aoa=np.array([[0.2, -0.1], [0.6, -0.8]]))
    real = NetworkRealization(seed=1, bs_height=10.0, ues=[ue])
    h = synthesize_channel(real, cfg, u=0, q=0, mb=0)
    assert np.linalg.matrix_rank(h) <= 4


def test_frobenius_energy(cfg):
    small = with_overrides(cfg, n_ues=1)
    real = generate_realization(small, seed=33)
    pl = real.ues[0].path_loss_db
    target = cfg.n_ue_antennas * cfg.n_bs_antennas * 10 ** (-0.1 * pl)
    total = 0.0
    n_draws = 3000
    for i in range(n_draws):
        h = synthesize_channel(real, small, u=0, q=i, mb=0)
        total += np.linalg.norm(h) ** 2
    assert abs(total / n_draws - target) / target < 0.02


def test_small_scale_independent_per_cb(cfg):
    real = generate_realization(cfg, seed=4)
    h0 = synthesize_channel(real, cfg, u=0, q=0, mb=0)
    h1 = synthesize_channel(real, cfg, u=0, q=1, mb=0)
    h0_again = synthesize_channel(real, cfg, u=0, q=0, mb=0)
    assert not np.array_equal(h0, h1)
    np.testing.assert_array_equal(h0, h0_again)


def test_synthesize_mb_shape(cfg):
    real = generate_realization(cfg, seed=4)
    block = synthesize_mb(real, cfg, mb=0)
    assert block.shape == (cfg.n_cbs_freq, cfg.n_ues, cfg.n_ue_antennas, cfg.n_bs_antennas)
    assert np.all(np.isfinite(block))


def test_dump_load_replay(tmp_path, cfg):
    real = generate_realization(cfg, seed=21)
    path = tmp_path / "real.txt"
    dump_realization(real, path)
    replay = load_realization(path)
    assert replay.seed == real.seed
    for ua, ub in zip(real.ues, replay.ues):
        np.testing.assert_array_equal(ua.position, ub.position)
        assert ua.path_loss_db == ub.path_loss_db
        np.testing.assert_array_equal(ua.cluster_powers, ub.cluster_powers)
        np.testing.assert_array_equal(ua.aod, ub.aod)
        np.testing.assert_array_equal(ua.aoa, ub.aoa)
    # replay is a bit-exact input: same channels come out
    np.testing.assert_array_equal(synthesize_channel(replay, cfg, 0, 1, 2),
                                  synthesize_channel(real, cfg, 0, 1, 2))
