import csv

import numpy as np
import pytest

from mmwsched.beams import (beam_align, design_codebook, effective_channels,
                            export_patterns)
from mmwsched.channel import array_response


def ripple_db(codebook, beam, grid):
    lo, hi = codebook.sin_edges[beam], codebook.sin_edges[beam + 1]
    mask = (grid >= lo) & (grid <= hi)
    gain = codebook.gain_pattern(beam, grid[mask])
    return 10.0 * np.log10(gain.max() / gain.min())


def test_codewords_unit_norm():
    for k in (1, 2, 4):
        cb = design_codebook(32, 4, k)
        norms = np.linalg.norm(cb.codewords, axis=1)
        np.testing.assert_allclose(norms, 1.0, atol=1e-12)


def test_orthogonal_when_beams_match_antennas():
    cb = design_codebook(8, 3, 1)   # 2^3 beams on 8 antennas
    gram = cb.codewords @ cb.codewords.conj().T
    np.testing.assert_allclose(gram, np.eye(8), atol=1e-12)


def test_steering_codeword_at_center():
    cb = design_codebook(16, 2, 1)
    j = 1
    phi = np.arcsin(cb.sin_centers[j])
    expected = array_response(16, phi) / np.sqrt(16)
    np.testing.assert_allclose(cb.codewords[j], expected, rtol=1e-12)


def test_more_chains_flatten_inbeam_ripple():
    # 1-degree azimuth grid, in-beam max/min gain ratio
    grid = np.sin(np.radians(np.arange(-90.0, 90.5, 1.0)))
    for n, bits in ((32, 3), (32, 4), (16, 3)):
        cb1 = design_codebook(n, bits, 1)
        cb4 = design_codebook(n, bits, 4)
        for j in range(cb1.n_beams):
            lo, hi = cb1.sin_edges[j], cb1.sin_edges[j + 1]
            if ((grid >= lo) & (grid <= hi)).sum() < 2:
                continue
            assert ripple_db(cb4, j, grid) <= ripple_db(cb1, j, grid) + 1e-9


def test_invalid_configuration():
    with pytest.raises(ValueError, match="invalid configuration"):
        design_codebook(2, 2, 4)
    with pytest.raises(ValueError):
        design_codebook(8, -1, 1)


def single_path_channel(n_ue, n_bs, phi_ue, phi_bs, gain=1.0):
    return gain * np.outer(array_response(n_ue, phi_ue),
                           array_response(n_bs, phi_bs).conj())


def test_alignment_matches_brute_force():
    # 16 x 8 = 128 pairs, re-scanned exhaustively
    bs_cb = design_codebook(32, 4, 1)
    ue_cb = design_codebook(8, 3, 1)
    rng = np.random.default_rng(2)
    n_q, n_ues = 3, 4
    channels = (rng.standard_normal((n_q, n_ues, 8, 32))
                + 1j * rng.standard_normal((n_q, n_ues, 8, 32)))
    align = beam_align(channels, bs_cb, ue_cb)
    for u in range(n_ues):
        best = (-1.0, None)
        for jb in range(bs_cb.n_beams):
            for ju in range(ue_cb.n_beams):
                metric = sum(
                    abs(ue_cb.codewords[ju].conj() @ channels[q, u] @ bs_cb.codewords[jb]) ** 2
                    for q in range(n_q))
                if metric > best[0]:
                    best = (metric, (jb, ju))
        assert (align.bs_beam[u], align.ue_beam[u]) == best[1]
        assert align.metric[u] == pytest.approx(best[0])


def test_alignment_single_path_picks_nearest_centers():
    bs_cb = design_codebook(32, 4, 1)
    ue_cb = design_codebook(8, 3, 1)
    jb, ju = 11, 5
    h = single_path_channel(8, 32, np.arcsin(ue_cb.sin_centers[ju]),
                            np.arcsin(bs_cb.sin_centers[jb]))
    align = beam_align(h[None, None], bs_cb, ue_cb)
    assert align.bs_beam[0] == jb
    assert align.ue_beam[0] == ju


def test_identical_channels_identical_beams():
    bs_cb = design_codebook(16, 3, 1)
    ue_cb = design_codebook(4, 2, 1)
    rng = np.random.default_rng(5)
    h = rng.standard_normal((2, 1, 4, 16)) + 1j * rng.standard_normal((2, 1, 4, 16))
    channels = np.concatenate([h, h], axis=1)
    align = beam_align(channels, bs_cb, ue_cb)
    assert align.bs_beam[0] == align.bs_beam[1]
    assert align.ue_beam[0] == align.ue_beam[1]
    assert len(align.distinct_bs_beams) == 1


def test_distinct_beams_bounded_by_ue_count():
    bs_cb = design_codebook(32, 5, 1)
    ue_cb = design_codebook(8, 2, 1)
    rng = np.random.default_rng(9)
    n_ues = 5
    channels = (rng.standard_normal((2, n_ues, 8, 32))
                + 1j * rng.standard_normal((2, n_ues, 8, 32)))
    align = beam_align(channels, bs_cb, ue_cb)
    assert len(align.distinct_bs_beams) <= n_ues


def test_effective_channel_values_and_sharing():
    bs_cb = design_codebook(16, 3, 1)
    ue_cb = design_codebook(4, 2, 1)
    rng = np.random.default_rng(3)
    channels = (rng.standard_normal((2, 3, 4, 16))
                + 1j * rng.standard_normal((2, 3, 4, 16)))
    align = beam_align(channels, bs_cb, ue_cb)
    eff = effective_channels(channels, align, bs_cb, ue_cb)
    for q in range(2):
        for u in range(3):
            for n in range(3):
                v = ue_cb.codewords[align.ue_beam[u]]
                w = bs_cb.codewords[align.bs_beam[n]]
                expected = v.conj() @ channels[q, u] @ w
                assert eff.gain(q, u, n) == pytest.approx(expected)
    # operator norm bound
    for q in range(2):
        for u in range(3):
            bound = np.linalg.norm(channels[q, u], ord=2) ** 2
            for n in range(3):
                assert abs(eff.gain(q, u, n)) ** 2 <= bound + 1e-9


def test_perfect_steering_gain_equality():
    n_ue, n_bs = 8, 32
    bs_cb = design_codebook(n_bs, 4, 1)
    ue_cb = design_codebook(n_ue, 3, 1)
    sigma = 10 ** (-0.1 * 80.0 / 2)
    h = single_path_channel(n_ue, n_bs, np.arcsin(ue_cb.sin_centers[2]),
                            np.arcsin(bs_cb.sin_centers[5]), gain=sigma)[None, None]
    align = beam_align(h, bs_cb, ue_cb)
    eff = effective_channels(h, align, bs_cb, ue_cb)
    assert abs(eff.gain(0, 0, 0)) ** 2 == pytest.approx(sigma ** 2 * n_ue * n_bs)


def test_zero_channel_zero_effective():
    bs_cb = design_codebook(16, 3, 1)
    ue_cb = design_codebook(4, 2, 1)
    channels = np.zeros((1, 2, 4, 16), dtype=complex)
    align = beam_align(channels, bs_cb, ue_cb)
    eff = effective_channels(channels, align, bs_cb, ue_cb)
    assert np.all(eff.gains == 0)


def test_pattern_export(tmp_path):
    cb = design_codebook(16, 2, 1)
    path = tmp_path / "patterns.csv"
    export_patterns(cb, path)
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["beam", "azimuth_deg", "gain_db"]
    assert len(rows) == 1 + cb.n_beams * 181
    export_patterns(cb, tmp_path / "again.csv")
    assert (tmp_path / "again.csv").read_bytes() == path.read_bytes()
